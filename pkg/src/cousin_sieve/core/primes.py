"""Segmented odd-only sieve, cousin-pair oracle and deletion simulator.

Every bitmap in this module is odd-only: index ``i`` stands for the number
``2*i + 1``, so a bitmap for ``limit`` has ``(limit + 1) // 2`` entries.
"""

import math
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..config.settings import get_settings
from ..models.schemas import CousinPair, DeletionOutcome, DeletionResidue
from ..storage.prime_cache import get_prime_cache
from .errors import DomainError

logger = structlog.get_logger(__name__)

WORD_BITS = 64


def _small_odd_bitmap(limit: int) -> np.ndarray:
    """Non-segmented odd-only sieve, used for base primes and as a reference."""
    flags = np.ones((limit + 1) // 2, dtype=bool)
    if flags.size:
        flags[0] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p // 2]:
            flags[p * p // 2 :: p] = False
    return flags


def iter_odd_segments(
    limit: int, segment_size: Optional[int] = None
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(first_index, flags)`` for consecutive odd-bitmap segments.

    Args:
        limit: Inclusive sieve bound
        segment_size: Segment length in 64-bit words of odd numbers

    Yields:
        The index of the first entry and the primality flags of the segment
    """
    words = segment_size or get_settings().segment_size
    span = words * WORD_BITS
    total = (limit + 1) // 2

    base = np.flatnonzero(_small_odd_bitmap(math.isqrt(limit))) * 2 + 1
    base = base.tolist()

    for lo in range(0, total, span):
        hi = min(lo + span, total)
        flags = np.ones(hi - lo, dtype=bool)
        if lo == 0:
            flags[0] = False

        low_value = 2 * lo + 1
        for p in base:
            square = p * p
            if square // 2 >= hi:
                break
            start = max(square, -(-low_value // p) * p)
            if start % 2 == 0:
                start += p
            offset = start // 2 - lo
            if offset < flags.size:
                flags[offset::p] = False
        yield lo, flags


def sieve_odd_bitmap(
    limit: int, segment_size: Optional[int] = None, *, use_cache: bool = True
) -> np.ndarray:
    """Return the odd-only primality bitmap up to ``limit``.

    A configured prime cache that covers ``limit`` is used instead of sieving.
    """
    if limit < 1:
        return np.zeros(0, dtype=bool)

    if use_cache:
        cache = get_prime_cache()
        if cache is not None:
            cached = cache.bitmap(limit)
            if cached is not None:
                return cached
            logger.warning("Prime cache too small", limit=limit, cache_limit=cache.limit)

    flags = np.empty((limit + 1) // 2, dtype=bool)
    for lo, segment in iter_odd_segments(limit, segment_size):
        flags[lo : lo + segment.size] = segment
    return flags


class PrimeTable:
    """Sorted primes up to an inclusive limit, with constant-time membership."""

    def __init__(self, limit: int, odd_flags: np.ndarray):
        self.limit = limit
        self._odd_flags = odd_flags
        odd_primes = np.flatnonzero(odd_flags).astype(np.int64) * 2 + 1
        head = np.array([2] if limit >= 2 else [], dtype=np.int64)
        self.primes = np.concatenate((head, odd_primes))

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self.primes.tolist())

    def __contains__(self, n: object) -> bool:
        """Values above the limit are not members; use is_prime to get an error."""
        if not isinstance(n, (int, np.integer)) or n > self.limit:
            return False
        return self.is_prime(int(n))

    def __repr__(self) -> str:
        return f"PrimeTable(limit={self.limit}, count={len(self)})"

    def is_prime(self, n: int) -> bool:
        """Membership test for ``n <= limit``."""
        if n > self.limit:
            raise DomainError(f"{n} exceeds the table limit {self.limit}")
        if n < 2:
            return False
        if n % 2 == 0:
            return n == 2
        return bool(self._odd_flags[n // 2])

    def to_list(self) -> List[int]:
        return self.primes.tolist()

    def count_upto(self, x: int) -> int:
        """pi(x) for ``x <= limit``."""
        return int(np.searchsorted(self.primes, x, side="right"))

    def primes_upto(self, x: int) -> List[int]:
        return self.primes[: self.count_upto(x)].tolist()

    def nth(self, index: int) -> int:
        """The ``index``-th prime, 1-based (``nth(1) == 2``)."""
        if not 1 <= index <= len(self):
            raise DomainError(f"prime index {index} outside 1..{len(self)}")
        return int(self.primes[index - 1])

    def largest_at_most(self, x: int) -> Optional[int]:
        count = self.count_upto(x)
        return int(self.primes[count - 1]) if count else None


def sieve_primes(limit: int, segment_size: Optional[int] = None) -> PrimeTable:
    """Build the prime table for ``limit``.

    Args:
        limit: Inclusive bound, at least 2
        segment_size: Optional segment length override in 64-bit words

    Returns:
        PrimeTable covering every prime up to ``limit``

    Raises:
        DomainError: If ``limit < 2``
    """
    if limit < 2:
        raise DomainError(f"sieve limit must be at least 2, got {limit}")
    table = PrimeTable(limit, sieve_odd_bitmap(limit, segment_size))
    logger.debug("Sieved primes", limit=limit, count=len(table))
    return table


def _pair_flags(flags: np.ndarray) -> np.ndarray:
    """Flag ``j`` is set when both ``2j+1`` and ``2j+5`` are prime."""
    return flags[:-2] & flags[2:]


def count_cousin_pairs(
    n: int, exclude_3_7: bool = True, segment_size: Optional[int] = None
) -> int:
    """Count primes ``p <= n`` with ``p + 4`` also prime.

    With ``exclude_3_7`` the pair (3, 7) is not counted.

    Raises:
        DomainError: If ``n < 1``
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")

    limit = n + 4
    total = 0
    cache = get_prime_cache()
    cached = cache.bitmap(limit) if cache is not None else None
    if cached is not None:
        total = int(np.count_nonzero(_pair_flags(cached)))
    else:
        # Two trailing flags carry over so pairs straddling a boundary count once.
        carry = np.zeros(0, dtype=bool)
        for _, segment in iter_odd_segments(limit, segment_size):
            window = np.concatenate((carry, segment))
            total += int(np.count_nonzero(_pair_flags(window)))
            carry = window[-2:]

    if exclude_3_7 and n >= 3:
        total -= 1
    logger.debug("Counted cousin pairs", n=n, count=total, exclude_3_7=exclude_3_7)
    return total


def list_cousin_pairs(n: int, exclude_3_7: bool = True) -> List[CousinPair]:
    """List cousin pairs with lower member ``<= n`` in ascending order."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    flags = sieve_odd_bitmap(n + 4)
    lows = (np.flatnonzero(_pair_flags(flags)) * 2 + 1).tolist()
    if exclude_3_7:
        lows = [p for p in lows if p != 3]
    return [CousinPair(lo=p, hi=p + 4) for p in lows]


def cousin_count_series(hi: int, exclude_3_7: bool = True) -> np.ndarray:
    """Cousin-pair counts for every ``n`` in ``0..hi`` as an int64 array."""
    counts = np.zeros(hi + 1, dtype=np.int64)
    if hi < 1:
        return counts
    lows = np.flatnonzero(_pair_flags(sieve_odd_bitmap(hi + 4))) * 2 + 1
    counts[lows[lows <= hi]] = 1
    if exclude_3_7 and hi >= 3:
        counts[3] = 0
    return np.cumsum(counts)


def prime_count_oracle(n: int) -> int:
    """pi(n) by sieve."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    flags = sieve_odd_bitmap(n)
    return int(np.count_nonzero(flags)) + (1 if n >= 2 else 0)


def deletion_residues(primes: Sequence[int]) -> List[DeletionResidue]:
    """Standard residues: ``{0}`` for 2 and ``{0, p - (4 mod p)}`` otherwise."""
    return [
        DeletionResidue(modulus=p, residues=(0,) if p == 2 else (0, p - 4 % p))
        for p in primes
    ]


def _survivor_mask(
    n: int, residues: Sequence[DeletionResidue], offset: int = 0
) -> np.ndarray:
    """Keep-mask over ``offset+1 .. offset+n`` with original-value congruences."""
    keep = np.ones(n, dtype=bool)
    for stage in residues:
        m = stage.modulus
        for r in stage.residues:
            keep[(r - offset - 1) % m :: m] = False
    return keep


def _reindexed_survivors(
    n: int, residues: Sequence[DeletionResidue], offset: int = 0
) -> np.ndarray:
    values = np.arange(offset + 1, offset + n + 1, dtype=np.int64)
    for stage in residues:
        positions = np.arange(1, values.size + 1, dtype=np.int64) % stage.modulus
        values = values[~np.isin(positions, stage.residues)]
    return values


def simulate_deletion(
    n: int,
    residues: Sequence[DeletionResidue],
    *,
    offset: int = 0,
    reindexed: bool = False,
    materialize_cap: Optional[int] = None,
) -> DeletionOutcome:
    """Delete residue classes from ``{offset+1, ..., offset+n}`` stage by stage.

    In the default mode every stage tests the original values, so the order
    of ``residues`` does not matter. With ``reindexed`` each stage tests the
    1-based positions within the current survivor sequence instead.

    Args:
        n: Block length
        residues: Ordered deletion stages
        offset: Values start at ``offset + 1``
        reindexed: Apply congruences to survivor positions
        materialize_cap: Largest ``n`` for which survivors are returned

    Returns:
        DeletionOutcome with the survivor count, and survivors below the cap

    Raises:
        DomainError: If ``n`` or ``offset`` is negative
    """
    if n < 0 or offset < 0:
        raise DomainError("n and offset must be non-negative")
    cap = get_settings().materialize_cap if materialize_cap is None else materialize_cap

    if reindexed:
        values = _reindexed_survivors(n, residues, offset)
        count = int(values.size)
        survivors = values.tolist() if n <= cap else None
    else:
        keep = _survivor_mask(n, residues, offset)
        count = int(np.count_nonzero(keep))
        survivors = (np.flatnonzero(keep) + offset + 1).tolist() if n <= cap else None

    return DeletionOutcome(n=n, count=count, survivors=survivors)


@lru_cache(maxsize=256)
def survivor_counts(upto: int, residues: Tuple[DeletionResidue, ...]) -> np.ndarray:
    """Survivor counts of every prefix ``[1, k]`` for ``k`` in ``0..upto``.

    The returned array is shared between callers and is read-only.
    """
    counts = np.zeros(upto + 1, dtype=np.int64)
    counts[1:] = np.cumsum(_survivor_mask(upto, residues))
    counts.setflags(write=False)
    return counts
