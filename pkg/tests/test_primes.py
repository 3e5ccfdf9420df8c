"""Tests for the sieve, the cousin-pair oracle and the deletion simulator."""

import numpy as np
import pytest
from pydantic import ValidationError
from sympy import isprime, primepi, primerange

from cousin_sieve.core.errors import DomainError
from cousin_sieve.core.primes import (
    _small_odd_bitmap,
    count_cousin_pairs,
    cousin_count_series,
    deletion_residues,
    list_cousin_pairs,
    prime_count_oracle,
    sieve_odd_bitmap,
    sieve_primes,
    simulate_deletion,
    survivor_counts,
)
from cousin_sieve.models.schemas import CousinPair, DeletionResidue
from cousin_sieve.storage.prime_cache import PrimeCache, get_prime_cache, reset_prime_cache

COUNT_TO_1E8 = 440_257


def _cousin_reference(n, exclude_3_7=True):
    count = sum(1 for p in primerange(2, n + 1) if isprime(p + 4))
    return count - 1 if exclude_3_7 and n >= 3 else count


class TestPrimeTable:
    """Test cases for the segmented sieve and PrimeTable."""

    def test_first_primes(self):
        """The table for 100 holds the 25 primes below 100."""
        table = sieve_primes(100)

        assert len(table) == 25
        assert table.to_list() == list(primerange(2, 101))
        assert table.nth(1) == 2
        assert table.nth(25) == 97
        assert 97 in table
        assert 91 not in table

    def test_small_and_large_limits(self):
        """Ten gives the four primes below it; 10^6 gives pi = 78498."""
        assert sieve_primes(10).to_list() == [2, 3, 5, 7]
        assert sieve_primes(48).primes_upto(6) == [2, 3, 5]
        assert len(sieve_primes(10**6)) == 78498

    def test_count_and_lookup(self):
        """count_upto, primes_upto and largest_at_most agree with pi(x)."""
        table = sieve_primes(1000)

        assert table.count_upto(10) == 4
        assert table.count_upto(1000) == 168
        assert table.primes_upto(12) == [2, 3, 5, 7, 11]
        assert table.largest_at_most(48) == 47
        assert table.largest_at_most(1) is None

    def test_is_prime_beyond_limit(self):
        """is_prime above the limit raises; the in operator answers False."""
        table = sieve_primes(100)

        with pytest.raises(DomainError):
            table.is_prime(101)
        assert 101 not in table
        assert 103 not in table

    def test_limit_too_small(self):
        """A limit below 2 is rejected."""
        with pytest.raises(DomainError):
            sieve_primes(1)

    @pytest.mark.parametrize("segment_size", [1, 2, 4, 1024])
    def test_segment_size_independent(self, segment_size):
        """Segmented output matches the one-shot sieve for any segment length."""
        limit = 20_011
        segmented = sieve_odd_bitmap(limit, segment_size, use_cache=False)

        np.testing.assert_array_equal(segmented, _small_odd_bitmap(limit))

    @pytest.mark.parametrize("segment_size", [2**6, 2**10])
    def test_segmented_matches_flat_to_a_million(self, segment_size):
        """Many-segment sieving up to 10^6 equals the one-shot sieve."""
        limit = 10**6
        segmented = sieve_odd_bitmap(limit, segment_size, use_cache=False)

        np.testing.assert_array_equal(segmented, _small_odd_bitmap(limit))

    def test_prime_count_oracle(self):
        """pi(n) by sieve agrees with sympy."""
        for n in (1, 2, 3, 10, 97, 10_000, 65_537):
            assert prime_count_oracle(n) == int(primepi(n))


class TestCousinOracle:
    """Test cases for counting and listing cousin pairs."""

    def test_pairs_up_to_100(self):
        """Eight pairs up to 100, the last being (97, 101)."""
        pairs = list_cousin_pairs(100)

        assert len(pairs) == 8
        assert pairs[0] == CousinPair(lo=7, hi=11)
        assert pairs[-1] == CousinPair(lo=97, hi=101)
        assert count_cousin_pairs(100) == 8

    def test_all_pairs_includes_three(self):
        """With exclude_3_7 off, (3, 7) is counted too."""
        pairs = list_cousin_pairs(100, exclude_3_7=False)

        assert len(pairs) == 9
        assert pairs[0] == CousinPair(lo=3, hi=7)
        assert count_cousin_pairs(100, exclude_3_7=False) == 9

    def test_small_n(self):
        """Edge values around the excluded pair (3, 7)."""
        assert count_cousin_pairs(1) == 0
        assert count_cousin_pairs(3) == 0
        assert count_cousin_pairs(3, exclude_3_7=False) == 1
        assert count_cousin_pairs(7) == 1
        assert count_cousin_pairs(48) == 5

    def test_no_pairs_below_seven(self):
        """Only (3, 7) lies below 7 and it is excluded by default."""
        assert list_cousin_pairs(6) == []
        assert len(list_cousin_pairs(6, exclude_3_7=False)) == 1

    def test_invalid_n(self):
        """n below 1 is a domain error."""
        with pytest.raises(DomainError):
            count_cousin_pairs(0)

    @pytest.mark.parametrize("segment_size", [1, 2, 8])
    def test_pairs_straddling_segments(self, segment_size):
        """Pairs across a segment boundary are counted exactly once."""
        n = 50_000
        assert count_cousin_pairs(n, segment_size=segment_size) == _cousin_reference(n)

    def test_series_matches_counts(self):
        """The cumulative series agrees with point counts."""
        series = cousin_count_series(2000)

        for n in (1, 3, 7, 48, 100, 1999, 2000):
            assert series[n] == count_cousin_pairs(n)

    def test_cousin_pair_validation(self):
        """CousinPair rejects non-prime or mis-spaced members."""
        with pytest.raises(ValidationError):
            CousinPair(lo=9, hi=13)
        with pytest.raises(ValidationError):
            CousinPair(lo=7, hi=13)

    def test_every_n_against_trial_division(self):
        """Both conventions match sympy for every n up to 10^4 and differ by one from n = 3."""
        limit = 10_000
        lows = {p for p in primerange(2, limit + 1) if isprime(p + 4)}
        running = 0
        for n in range(1, limit + 1):
            running += n in lows
            with_3_7 = count_cousin_pairs(n, exclude_3_7=False)
            without = count_cousin_pairs(n)

            assert with_3_7 == running
            assert with_3_7 - without == (1 if n >= 3 else 0)

    @pytest.mark.slow
    def test_count_below_one_hundred_million(self, use_cache):
        """The count to 10^8 is 440257, with and without the prime cache."""
        n = 10**8
        assert count_cousin_pairs(n) == COUNT_TO_1E8

        PrimeCache(use_cache).write(n + 4, sieve_odd_bitmap(n + 4, use_cache=False))
        reset_prime_cache()

        assert get_prime_cache() is not None
        assert count_cousin_pairs(n) == COUNT_TO_1E8

    @pytest.mark.slow
    def test_count_up_to_ten_million(self):
        """Large counts do not depend on the segment length."""
        n = 10_000_000
        assert count_cousin_pairs(n, segment_size=2**12) == count_cousin_pairs(n)


class TestDeletion:
    """Test cases for deletion residues and the simulator."""

    def test_standard_residues(self):
        """{0} for 2, {0, p - 4 mod p} for odd primes."""
        stages = deletion_residues([2, 3, 5, 7])

        assert [s.residues for s in stages] == [(0,), (0, 2), (0, 1), (0, 3)]

    def test_residue_validation(self):
        """Composite moduli and foreign residues are rejected."""
        with pytest.raises(ValidationError):
            DeletionResidue(modulus=9, residues=(0,))
        with pytest.raises(ValidationError):
            DeletionResidue(modulus=5, residues=(0, 2))
        with pytest.raises(ValidationError):
            DeletionResidue(modulus=2, residues=(1,))

    def test_survivors_at_48(self, residues_235):
        """The 2, 3, 5 deletions leave 7, 13, 19, 37, 43 in 1..48."""
        outcome = simulate_deletion(48, residues_235)

        assert outcome.count == 5
        assert outcome.survivors == [7, 13, 19, 37, 43]

    def test_single_prime_stages(self):
        """Odd numbers up to 10; k = 1 (mod 3) up to 48."""
        evens = simulate_deletion(10, deletion_residues([2]))
        threes = simulate_deletion(48, deletion_residues([3]))

        assert evens.survivors == [1, 3, 5, 7, 9]
        assert threes.count == 16

    def test_order_independent(self, residues_235):
        """Value-based deletion does not depend on stage order."""
        forward = simulate_deletion(500, residues_235)
        backward = simulate_deletion(500, list(reversed(residues_235)))

        assert forward.survivors == backward.survivors

    def test_offset_block(self, residues_235):
        """Congruences are tested on the original values of the block."""
        outcome = simulate_deletion(10, residues_235, offset=30)

        assert outcome.survivors == [37]

    def test_reindexed_pipeline(self):
        """Positional deletion composes the bracket counts."""
        outcome = simulate_deletion(49, deletion_residues([2, 3, 5, 7]), reindexed=True)

        assert outcome.count == 5

    def test_materialize_cap(self, residues_235):
        """Survivors are omitted above the cap."""
        outcome = simulate_deletion(48, residues_235, materialize_cap=10)

        assert outcome.count == 5
        assert outcome.survivors is None

    def test_negative_n(self, residues_235):
        """Negative lengths are a domain error."""
        with pytest.raises(DomainError):
            simulate_deletion(-1, residues_235)

    def test_survivor_counts_prefixes(self, residues_235):
        """Prefix counts match point simulations and are read-only."""
        counts = survivor_counts(200, tuple(residues_235))

        for n in (0, 1, 7, 48, 200):
            assert counts[n] == simulate_deletion(n, residues_235).count
        with pytest.raises(ValueError):
            counts[0] = 1
