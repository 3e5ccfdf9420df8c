"""Tests for the lemma checks and sweeps."""

from functools import reduce

import pytest

from cousin_sieve.config.settings import get_settings
from cousin_sieve.core.errors import DomainError
from cousin_sieve.core.lemmas import (
    DEFAULT_GRIDS,
    bracket_op,
    check_l1,
    check_l3,
    check_l4,
    check_l5,
    check_p1,
    check_p2,
    check_p3,
    check_p4,
    check_p5,
    check_p6,
    resolve_grid,
    run_suite,
    run_sweep,
    unconditional_failures,
)
from cousin_sieve.models.schemas import LemmaGrid, LemmaId, LemmaWitness, SweepReport


class TestInstanceChecks:
    """Test cases for single lemma instances."""

    def test_bracket_op(self):
        """bracket(m) = m - floor(m/p) - floor((m + 4 mod p)/p)."""
        assert bracket_op(48, 3) == 16
        assert bracket_op(6, 3) == 2
        assert bracket_op(10, 2) == 5
        assert bracket_op(0, 5) == 0
        with pytest.raises(DomainError):
            bracket_op(-1, 5)

    def test_p1_order_free(self, residues_235):
        """Every stage order leaves 5 survivors in 1..48."""
        witness = check_p1(48, residues_235)

        assert witness.passed
        assert witness.lhs == witness.rhs == 5

    def test_p2_carry(self):
        """floor(15/5) = 1 + 1 + carry 1."""
        witness = check_p2(7, 8, 5)

        assert witness.passed
        assert witness.lhs == witness.rhs == 3

    def test_p3_block_split(self):
        """bracket(m) splits into full blocks and a remainder."""
        for m in (0, 4, 25, 49, 100):
            assert check_p3(m, 7).passed
        with pytest.raises(DomainError):
            check_p3(10, 2)

    def test_p4_extremes(self):
        """delta reaches -2 for p = 11 and +1 for p = 5."""
        low = check_p4(6, 6, 11)
        high = check_p4(1, 1, 5)

        assert low.params["delta"] == -2
        assert low.passed
        assert high.params["delta"] == 1
        assert high.passed

    def test_p5_concatenation(self):
        """Adding a block adds its shifted survivors."""
        for p in (2, 3, 5, 7):
            assert check_p5(10, 7, p).passed

    def test_p6_monotone(self):
        """bracket never decreases; m' < m is out of domain."""
        assert check_p6(10, 11, 3).passed
        assert check_p6(5, 5, 7).passed

        reversed_args = check_p6(11, 10, 3)
        assert not reversed_args.in_domain

    def test_l1(self):
        """Single prime: 29 survivors against ceil(48 * 2/5) = 20."""
        witness = check_l1(48, 5)

        assert (witness.lhs, witness.rhs) == (29, 20)
        assert witness.passed
        assert not check_l1(3, 5).in_domain

    def test_l3(self):
        """Two odd primes at m = 25."""
        witness = check_l3(25, 3, 5)

        assert witness.lemma_id == LemmaId.L3
        assert (witness.lhs, witness.rhs) == (5, 4)
        assert witness.passed

    def test_l3_with_two(self):
        """p_i = 2 is reported as L32."""
        witness = check_l3(25, 2, 5)

        assert witness.lemma_id == LemmaId.L32
        assert (witness.lhs, witness.rhs) == (7, 5)

    def test_l3_out_of_domain(self):
        """m below p_j^2 or p_j <= p_i is outside the claim."""
        assert not check_l3(10, 3, 5).in_domain
        assert not check_l3(50, 5, 3).in_domain

    def test_l4(self):
        """k = 1 (mod 6) survives; eight of them up to 48."""
        witness = check_l4(48)

        assert (witness.lhs, witness.rhs) == (8, 8)
        assert check_l4(0).passed

    def test_l5(self):
        """Four survivors at 49 against three in the truncated prefix."""
        witness = check_l5(49, [2, 3, 5], 7)

        assert (witness.lhs, witness.rhs) == (4, 3)
        assert witness.passed
        expected = reduce(bracket_op, [2, 3, 5, 7], 49)
        assert witness.params["reindexed"] == expected == 5

    def test_l5_out_of_domain(self):
        """p_j below 5 or m below p_j^2 is outside the claim."""
        assert not check_l5(9, [2], 3).in_domain
        assert not check_l5(40, [2, 3, 5], 7).in_domain
        assert not check_l5(60, [3, 2], 7).in_domain

    def test_witness_alias(self):
        """passed is serialised as pass."""
        dumped = check_l4(12).model_dump(by_alias=True)

        assert dumped["pass"] is True
        assert "passed" not in dumped


class TestSweeps:
    """Test cases for exhaustive sweeps."""

    def test_p2_sweep(self):
        """Every pair in the grid is checked for each prime."""
        report = run_sweep(LemmaId.P2, LemmaGrid(m_max=30, p_max=7))

        assert report.ok
        assert report.unconditional
        assert report.instances_checked == 31 * 31 * 4

    def test_p6_sweep(self):
        """Upper-triangle pairs for each odd prime."""
        report = run_sweep(LemmaId.P6, LemmaGrid(m_max=40, p_max=7))

        assert report.ok
        assert report.instances_checked == (41 * 42 // 2) * 3

    def test_p1_sweep(self):
        """All six orders of 2, 3, 5."""
        report = run_sweep(LemmaId.P1, LemmaGrid(m_max=60, p_max=5))

        assert report.ok
        assert report.instances_checked == 61 * 6

    @pytest.mark.parametrize(
        "lemma_id, grid",
        [
            (LemmaId.P3, LemmaGrid(m_max=80, p_max=11)),
            (LemmaId.P5, LemmaGrid(m_max=25, p_max=7)),
            (LemmaId.L1, LemmaGrid(m_max=300, p_max=13)),
            (LemmaId.L4, LemmaGrid(m_max=1000)),
        ],
    )
    def test_sweeps_without_failures(self, lemma_id, grid):
        """Properties that hold over small grids report no failures."""
        report = run_sweep(lemma_id, grid)

        assert report.ok
        assert report.instances_checked > 0

    def test_p4_extreme_witnesses(self):
        """Min and max delta are recorded for each prime."""
        report = run_sweep(LemmaId.P4, LemmaGrid(m_max=20, primes=[5, 11]))
        deltas = [w.params["delta"] for w in report.extremes]

        assert report.ok
        assert deltas == [-1, 1, -2, 0]

    def test_claim_sweeps(self):
        """Claims report counts and every failure is a genuine violation."""
        expected = {LemmaId.L3: 126, LemmaId.L32: 86, LemmaId.L5: 76}
        for lemma_id, checked in expected.items():
            report = run_sweep(lemma_id, LemmaGrid(p_max=7, factor=2))

            assert not report.unconditional
            assert report.instances_checked == checked
            assert all(w.lhs < w.rhs for w in report.failures)
            assert all(w.in_domain for w in report.extremes)

    def test_sweep_deterministic(self):
        """Two runs differ only in elapsed time."""
        grid = LemmaGrid(p_max=11, factor=2)
        first = run_sweep(LemmaId.L5, grid).model_dump(exclude={"elapsed"})
        second = run_sweep(LemmaId.L5, grid).model_dump(exclude={"elapsed"})

        assert first == second


class TestGridsAndSuite:
    """Test cases for grid resolution and the suite runner."""

    def test_default_grid(self):
        """Without overrides the default grid is used."""
        assert resolve_grid(LemmaId.L4) == DEFAULT_GRIDS[LemmaId.L4]

    def test_explicit_override(self):
        """Explicit overrides win; a p_max override drops a fixed prime list."""
        grid = resolve_grid(LemmaId.P4, {"P4": {"p_max": 7, "m_max": 10}})

        assert grid.m_max == 10
        assert grid.p_max == 7
        assert grid.primes is None

    def test_settings_override(self, monkeypatch):
        """sweep_overrides from the environment apply before explicit ones."""
        monkeypatch.setenv("SWEEP_OVERRIDES", '{"L4": {"m_max": 10}}')
        get_settings.cache_clear()

        assert resolve_grid(LemmaId.L4).m_max == 10
        assert resolve_grid(LemmaId.L4, {"L4": {"m_max": 20}}).m_max == 20

    def test_run_suite_order(self):
        """Reports come back in the requested order."""
        overrides = {"L4": {"m_max": 100}, "P2": {"m_max": 10, "p_max": 5}}
        reports = run_suite([LemmaId.L4, LemmaId.P2], overrides, max_workers=1)

        assert [r.lemma_id for r in reports] == [LemmaId.L4, LemmaId.P2]
        assert unconditional_failures(reports) == []

    def test_unconditional_failures(self):
        """Only failing unconditional reports are returned."""
        bad = LemmaWitness(lemma_id=LemmaId.P2, lhs=1, rhs=2)
        reports = [
            SweepReport(lemma_id=LemmaId.P2, range_description="r", unconditional=True,
                        instances_checked=1, failures=[bad]),
            SweepReport(lemma_id=LemmaId.L5, range_description="r", unconditional=False,
                        instances_checked=1, failures=[bad.model_copy(update={"lemma_id": LemmaId.L5})]),
            SweepReport(lemma_id=LemmaId.P6, range_description="r", unconditional=True,
                        instances_checked=1),
        ]

        assert [r.lemma_id for r in unconditional_failures(reports)] == [LemmaId.P2]

    @pytest.mark.slow
    def test_default_suite(self):
        """The full default suite finds no unconditional failure."""
        reports = run_suite()

        assert len(reports) == len(LemmaId)
        assert unconditional_failures(reports) == []
