"""Exact growth sequence W(v), the lower bounds derived from it and the figure series.

Primes are indexed from 1: p_1 = 2, p_2 = 3, p_3 = 5. W(v) is
p_v times the product of (p_{i+1} - 3) / p_i over i = 3..v-1.
"""

import math
from fractions import Fraction
from math import isqrt
from typing import List, Tuple

import structlog

from ..config.settings import get_settings
from ..models.schemas import BoundCheck, BoundPoint, DescentChain, RecurrenceCheck
from .errors import BudgetExceededError, DomainError
from .operators import d_sqrt
from .primes import count_cousin_pairs, cousin_count_series, sieve_primes

logger = structlog.get_logger(__name__)


def first_primes(count: int) -> List[int]:
    """The first ``count`` primes."""
    if count < 1:
        return []
    # Rosser's bound p_k < k(ln k + ln ln k) holds for k >= 6.
    limit = 15 if count < 6 else int(count * (math.log(count) + math.log(math.log(count)))) + 1
    return sieve_primes(limit).primes_upto(limit)[:count]


def _w(primes: List[int], v: int) -> Fraction:
    w = Fraction(primes[v - 1])
    for i in range(3, v):
        w *= Fraction(primes[i] - 3, primes[i - 1])
    return w


def w_value(v: int) -> Fraction:
    """W(v) for ``v >= 3``; W(3) = 5 is the empty product."""
    if v < 3:
        raise DomainError(f"W(v) needs v >= 3, got {v}")
    return _w(first_primes(v), v)


def w_sequence(v_max: int) -> List[Tuple[int, Fraction]]:
    """W(v) for v = 4..v_max by direct product."""
    if v_max < 4:
        raise DomainError(f"v_max must be at least 4, got {v_max}")
    primes = first_primes(v_max)
    product = Fraction(primes[3] - 3, primes[2])
    sequence = []
    for v in range(4, v_max + 1):
        sequence.append((v, primes[v - 1] * product))
        if v < v_max:
            product *= Fraction(primes[v] - 3, primes[v - 1])
    return sequence


def w_recurrence_check(v: int) -> RecurrenceCheck:
    """W(v+1) by direct product against W(v) * (p_{v+1}^2 - 3 p_{v+1}) / p_v^2."""
    if v < 4:
        raise DomainError(f"recurrence check needs v >= 4, got {v}")
    primes = first_primes(v + 1)
    direct = _w(primes, v + 1)
    p, q = primes[v - 1], primes[v]
    recurrence = _w(primes, v) * Fraction(q * q - 3 * q, p * p)
    return RecurrenceCheck(
        v=v,
        direct_num=direct.numerator,
        direct_den=direct.denominator,
        recurrence_num=recurrence.numerator,
        recurrence_den=recurrence.denominator,
        passed=direct == recurrence,
    )


def w_growth_violations(v_max: int) -> List[int]:
    """Every v in 4..v_max-1 where W(v+1) > W(v) > 3 fails."""
    sequence = w_sequence(v_max)
    bad = [v for v, w in sequence if w <= 3]
    bad += [v for (v, w), (_, w_next) in zip(sequence, sequence[1:]) if w_next <= w]
    return sorted(set(bad))


def bounds_from_w(w: Fraction) -> Tuple[int, int]:
    """(floor(W / 3), ceil(W / 3)) for an exact W."""
    third = w / 3
    return math.floor(third), math.ceil(third)


def d_prime_bound(v: int) -> int:
    """ceil(W(v) / 3)."""
    return bounds_from_w(w_value(v))[1]


def descent_chain(n: int) -> DescentChain:
    """
    Apply m <- ceil(m(1 - 3/p_j)) for p_v down to p_3 = 5, starting from n.

    What is left after 5 carries only the 2 and 3 deletions, which keep at
    least floor(m / 6) values.
    """
    if n < 25:
        raise DomainError(f"descent chain needs n >= 25, got {n}")
    table = sieve_primes(isqrt(n))
    primes = table.primes_upto(isqrt(n))

    m = n
    steps, above = [], True
    for p in reversed(primes[2:]):
        if m < p * p:
            above = False
        m = -(-m * (p - 3) // p)
        steps.append((p, m))
    return DescentChain(n=n, steps=steps, above_square=above, d0_lower=m // 6)


def tl2_check(n: int) -> BoundCheck:
    """
    Check D(n) >= floor(W(v) / 3) + D(sqrt n) against the oracle.

    The ceiling bound D' and the descent-chain bound are reported alongside.
    """
    if n < 25:
        raise DomainError(f"the bound lemma needs n >= 25, got {n}")
    root = isqrt(n)
    primes = sieve_primes(root).primes_upto(root)
    v, p_v = len(primes), primes[-1]
    w = _w(primes, v)

    floor_bound, ceil_bound = bounds_from_w(w)
    pairs_below = d_sqrt(n)
    actual = count_cousin_pairs(n, exclude_3_7=True)
    check = BoundCheck(
        n=n,
        v=v,
        p_v=p_v,
        bound_floor=floor_bound,
        bound_ceil=ceil_bound,
        d_sqrt=pairs_below,
        chain_lower=descent_chain(n).d0_lower,
        d_actual=actual,
        passed=actual >= floor_bound + pairs_below,
    )
    if not check.passed:
        logger.warning(
            "Lower bound exceeds the oracle count",
            n=n,
            bound=floor_bound + pairs_below,
            actual=actual,
        )
    return check


def figure_series(v_max: int) -> List[BoundPoint]:
    """
    One BoundPoint per v in 4..v_max with the oracle count at n = p_v^2.

    Raises:
        BudgetExceededError: If p_{v_max} exceeds the configured figure_max_prime
    """
    if v_max < 4:
        raise DomainError(f"v_max must be at least 4, got {v_max}")
    cap = get_settings().figure_max_prime
    primes = first_primes(v_max + 1)
    if primes[v_max - 1] > cap:
        raise BudgetExceededError(
            f"p_{v_max} = {primes[v_max - 1]} exceeds figure_max_prime = {cap}"
        )

    actual = cousin_count_series(primes[v_max - 1] ** 2, exclude_3_7=True)
    consecutive = [
        lo for lo, nxt in zip(primes, primes[1:]) if nxt - lo == 4
    ]

    points = []
    for v, w in w_sequence(v_max):
        p_v = primes[v - 1]
        pairs_below = sum(1 for lo in consecutive if lo <= p_v)
        floor_bound, ceil_bound = bounds_from_w(w)
        points.append(
            BoundPoint(
                v=v,
                p_v=p_v,
                w_num=w.numerator,
                w_den=w.denominator,
                d_prime=ceil_bound,
                d_lower_tl2=floor_bound + pairs_below,
                d_actual=int(actual[p_v * p_v]),
            )
        )
    logger.info("Built figure series", v_max=v_max, points=len(points))
    return points
