"""Bracket operators, term expansion and the D(n) counting formulas.

A term of the expansion is a signed pair of prime sets: ``plain`` primes
delete ``k = 0 (mod p)`` and ``tilde`` primes delete ``k = -4 (mod p)``. The
value of a term at ``n`` is the number of ``k <= n`` satisfying all of its
congruences, ``(n + M - lam) // M`` with ``M`` the combined modulus and
``lam`` the first such ``k``.
"""

from math import isqrt, prod
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from sympy import isprime
from sympy.ntheory.modular import crt

from ..config.settings import get_settings
from ..models.schemas import CousinCountReport, CrtOffset, ExpansionTerm
from .errors import DomainError, ExpansionBudgetExceeded, ExpansionTooLargeError
from .primes import (
    PrimeTable,
    cousin_count_series,
    count_cousin_pairs,
    deletion_residues,
    sieve_primes,
    simulate_deletion,
    survivor_counts,
)

logger = structlog.get_logger(__name__)

# Pruned term arrays keep lam * (lam + 4) inside int64.
MAX_PRUNED_LIMIT = 2**31

RawTerm = Tuple[int, Tuple[int, ...], Tuple[int, ...], int, int]


def _require_prime(p: int) -> None:
    if not isprime(p):
        raise DomainError(f"{p} is not prime")


def four_mod(p: int) -> int:
    """4 mod p for an odd prime; the second deleted residue is ``p - four_mod(p)``."""
    if p == 2:
        raise DomainError("four_mod is defined for odd primes only")
    _require_prime(p)
    return 4 % p


def y_count(p: int, n: int) -> int:
    """Multiples of ``p`` in ``1..n``."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    return n // p


def y_tilde_count(p: int, n: int) -> int:
    """Values ``k <= n`` with ``k = -4 (mod p)``; always 0 for ``p = 2``."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if p == 2:
        return 0
    return (n + 4 % p) // p


def bracket_shifted(t: int, p: int, offset: int = 0) -> int:
    """Survivors of the mod-``p`` deletions within ``{offset+1, ..., offset+t}``."""
    if t < 0 or offset < 0:
        raise DomainError("t and offset must be non-negative")
    plain = (t + offset % p) // p
    if p == 2:
        return t - plain
    return t - plain - (t + (offset + 4) % p) // p


def crt_offset(p_i: int, p_j: int) -> CrtOffset:
    """
    First position where ``p_i`` (plain) and ``p_j`` (tilde) both delete.

    Args:
        p_i: Plain prime
        p_j: Tilde prime, odd

    Returns:
        CrtOffset with lam in [1, p_i * p_j] and theta = p_i * p_j - lam

    Raises:
        DomainError: If the primes coincide, are not prime, or ``p_j == 2``
    """
    if p_j == 2:
        raise DomainError("the tilde operator never applies to 2")
    if p_i == p_j:
        raise DomainError("p_i and p_j must differ")
    _require_prime(p_i)
    _require_prime(p_j)

    modulus = p_i * p_j
    lam = _crt_first_position([p_i, p_j], [0, (-4) % p_j])
    return CrtOffset(p_i=p_i, p_j=p_j, lam=lam, theta=modulus - lam)


def _crt_first_position(moduli: List[int], residues: List[int]) -> int:
    """Smallest positive solution of the congruence system."""
    if not moduli:
        return 1
    solution = crt(moduli, residues)
    if solution is None:
        raise DomainError(f"no common solution for moduli {moduli}")
    r, modulus = int(solution[0]), int(solution[1])
    return r if r else modulus


def _validate_odd_primes(odd_primes: Sequence[int]) -> List[int]:
    primes = sorted(odd_primes)
    if len(set(primes)) != len(primes):
        raise DomainError("primes must be distinct")
    for p in primes:
        if p == 2:
            raise DomainError("2 belongs to include_two, not the odd prime set")
        _require_prime(p)
    return primes


def _expand_raw(odd_primes: Sequence[int], include_two: bool) -> List[RawTerm]:
    """All terms as ``(sign, plain, tilde, lam, modulus)`` in canonical order.

    Primes are taken in ascending order. For each prime the existing terms are
    repeated without it, with it plain, then with it tilde.
    """
    terms: List[RawTerm] = [(1, (), (), 1, 1)]
    stages = ([2] if include_two else []) + list(odd_primes)
    for q in stages:
        choices = [("plain", 0)] if q == 2 else [("plain", 0), ("tilde", (-4) % q)]
        extended = list(terms)
        for kind, r in choices:
            for sign, plain, tilde, lam, modulus in terms:
                step = ((r - lam) * pow(modulus, -1, q)) % q
                child_lam = lam + modulus * step
                if kind == "plain":
                    extended.append((-sign, plain + (q,), tilde, child_lam, modulus * q))
                else:
                    extended.append((-sign, plain, tilde + (q,), child_lam, modulus * q))
        terms = extended
    return terms


def expand_product(odd_primes: Sequence[int], include_two: bool = True) -> List[ExpansionTerm]:
    """
    Expand the product of ``[1 - 1/p - ~1/p]`` into signed terms.

    Args:
        odd_primes: Distinct odd primes
        include_two: Add the ``[1 - 1/2]`` factor

    Returns:
        ``3**len(odd_primes) * (2 if include_two else 1)`` terms

    Raises:
        ExpansionTooLargeError: Above the configured odd-prime count
    """
    primes = _validate_odd_primes(odd_primes)
    cap = get_settings().expansion_max_primes
    if len(primes) > cap:
        raise ExpansionTooLargeError(
            f"expansion over {len(primes)} odd primes exceeds the cap of {cap}"
        )
    return [
        ExpansionTerm(sign=sign, plain=plain, tilde=tilde)
        for sign, plain, tilde, _, _ in _expand_raw(primes, include_two)
    ]


def eval_term(n: int, term: ExpansionTerm) -> int:
    """Signed count of ``k <= n`` meeting every congruence of ``term``."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    moduli = list(term.plain) + list(term.tilde)
    if not moduli:
        return term.sign * n
    residues = [0] * len(term.plain) + [(-4) % p for p in term.tilde]
    lam = _crt_first_position(moduli, residues)
    modulus = prod(moduli)
    return term.sign * ((n + modulus - lam) // modulus)


def _inverse_table(q: int) -> np.ndarray:
    table = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        table[a] = pow(a, -1, q)
    return table


def live_term_arrays(
    limit: int,
    primes: Sequence[int],
    *,
    tilde: bool = True,
    budget: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Terms whose first position does not exceed ``limit``, as parallel arrays.

    Every refinement of a term starts at or after the term itself, so a term
    starting beyond ``limit`` is dropped together with its whole subtree.

    Args:
        limit: Largest ``n`` the terms will be evaluated at
        primes: Ascending primes of the product (2 optional)
        tilde: Include tilde choices; False gives the Legendre expansion
        budget: Largest number of live terms allowed

    Returns:
        ``(signs, lams, moduli)`` int64 arrays in canonical term order

    Raises:
        ExpansionBudgetExceeded: If the live terms outgrow ``budget``
    """
    if limit > MAX_PRUNED_LIMIT:
        raise ExpansionBudgetExceeded(f"limit {limit} exceeds {MAX_PRUNED_LIMIT}")
    budget = budget or get_settings().expansion_node_budget

    signs = np.ones(1, dtype=np.int64)
    lams = np.ones(1, dtype=np.int64)
    moduli = np.ones(1, dtype=np.int64)
    if limit < 1:
        return signs[:0], lams[:0], moduli[:0]

    for q in sorted(primes):
        inverse = _inverse_table(q)
        residues = [0] if q == 2 or not tilde else [0, (-4) % q]
        reach = (limit - lams) // moduli
        parts_s, parts_l, parts_m = [signs], [lams], [moduli]
        for r in residues:
            step = ((r - lams % q) % q) * inverse[moduli % q] % q
            keep = step <= reach
            parts_s.append(-signs[keep])
            parts_l.append(lams[keep] + moduli[keep] * step[keep])
            parts_m.append(moduli[keep] * q)
        signs = np.concatenate(parts_s)
        lams = np.concatenate(parts_l)
        moduli = np.concatenate(parts_m)
        if signs.size > budget:
            raise ExpansionBudgetExceeded(
                f"{signs.size} live terms at prime {q} exceed the budget of {budget}"
            )
    return signs, lams, moduli


def iter_live_terms(n: int, primes: Sequence[int]) -> Iterator[ExpansionTerm]:
    """Yield the expansion terms that are nonzero at ``n``."""
    primes = sorted(primes)
    odd = [p for p in primes if p != 2]
    _validate_odd_primes(odd)
    signs, lams, moduli = live_term_arrays(n, primes)
    for sign, lam, modulus in zip(signs.tolist(), lams.tolist(), moduli.tolist()):
        members = [p for p in primes if modulus % p == 0]
        yield ExpansionTerm(
            sign=sign,
            plain=tuple(p for p in members if lam % p == 0),
            tilde=tuple(p for p in members if lam % p),
        )


def _sum_terms(n: int, signs: np.ndarray, lams: np.ndarray, moduli: np.ndarray) -> int:
    return int(np.sum(signs * ((n + moduli - lams) // moduli)))


def _series_from_terms(
    upto: int, signs: np.ndarray, lams: np.ndarray, moduli: np.ndarray
) -> np.ndarray:
    """Value of the signed sum at every ``k`` in ``0..upto``.

    Each term adds its sign at lam, lam + M, lam + 2M, ... and the series is
    the running total of those marks.
    """
    hits = (upto - lams) // moduli + 1
    total = int(hits.sum())
    first = np.repeat(np.cumsum(hits) - hits, hits)
    positions = np.repeat(lams, hits) + np.repeat(moduli, hits) * (
        np.arange(total, dtype=np.int64) - first
    )
    positive = np.repeat(signs > 0, hits)
    delta = np.bincount(positions[positive], minlength=upto + 1) - np.bincount(
        positions[~positive], minlength=upto + 1
    )
    return np.cumsum(delta)


def _primes_below_root(n: int) -> List[int]:
    root = isqrt(n)
    if root < 2:
        return []
    return sieve_primes(root).primes_upto(root)


def d0(n: int, primes: Optional[Sequence[int]] = None, method: str = "auto") -> int:
    """
    Survivors in ``1..n`` after the plain and tilde deletions for ``primes``.

    Args:
        n: Upper end, at least 1
        primes: Deleting primes, default the primes up to sqrt(n)
        method: ``auto`` sums the live terms and simulates when the live-term
            budget runs out, ``expansion`` sums the full guarded expansion,
            ``simulation`` runs the deletion simulator

    Raises:
        DomainError: If ``n < 1`` or ``method`` is unknown
        ExpansionTooLargeError: For ``expansion`` above the odd-prime cap
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    primes = sorted(_primes_below_root(n) if primes is None else primes)
    odd = _validate_odd_primes([p for p in primes if p != 2])

    if method == "simulation":
        return simulate_deletion(n, deletion_residues(primes), materialize_cap=0).count

    if method == "expansion":
        cap = get_settings().expansion_max_primes
        if len(odd) > cap:
            raise ExpansionTooLargeError(
                f"expansion over {len(odd)} odd primes exceeds the cap of {cap}"
            )
        return sum(
            sign * ((n + modulus - lam) // modulus)
            for sign, _, _, lam, modulus in _expand_raw(odd, 2 in primes)
        )

    if method != "auto":
        raise DomainError(f"unknown d0 method {method!r}")

    try:
        signs, lams, moduli = live_term_arrays(n, primes)
    except ExpansionBudgetExceeded as e:
        logger.warning("Falling back to deletion simulation", n=n, reason=str(e))
        return simulate_deletion(n, deletion_residues(primes), materialize_cap=0).count
    return _sum_terms(n, signs, lams, moduli)


def _prime_set_intervals(
    lo: int, hi: int, table: PrimeTable
) -> Iterator[Tuple[int, int, List[int]]]:
    """Split ``[lo, hi]`` into runs sharing the same primes up to sqrt(n)."""
    ps = table.primes_upto(isqrt(hi))
    a = lo
    while a <= hi:
        k = table.count_upto(isqrt(a))
        end = ps[k] ** 2 - 1 if k < len(ps) else hi
        b = min(hi, end)
        yield a, b, ps[:k]
        a = b + 1


def _series_table(hi: int) -> PrimeTable:
    return sieve_primes(isqrt(hi) + 5)


def d0_series(lo: int, hi: int) -> np.ndarray:
    """d0(n) by live-term expansion for every ``n`` in ``lo..hi``."""
    if lo < 1 or hi < lo:
        raise DomainError(f"invalid range [{lo}, {hi}]")
    table = _series_table(hi)
    values = np.empty(hi - lo + 1, dtype=np.int64)
    for a, b, primes in _prime_set_intervals(lo, hi, table):
        series = _series_from_terms(b, *live_term_arrays(b, primes, budget=2**62))
        values[a - lo : b - lo + 1] = series[a : b + 1]
    return values


def _d_sqrt_for(table: PrimeTable, p_v: Optional[int]) -> int:
    if p_v is None:
        return 0
    ps = table.primes_upto(p_v + 4)
    return sum(
        1 for lo, nxt in zip(ps, ps[1:]) if lo <= p_v and nxt - lo == 4
    )


def d_sqrt(n: int) -> int:
    """Consecutive-prime cousin pairs ``[p_i, p_i + 4]`` with ``p_i <= p_v``."""
    table = sieve_primes(isqrt(max(n, 4)) + 5)
    return _d_sqrt_for(table, table.largest_at_most(isqrt(n)))


def d_total(n: int) -> CousinCountReport:
    """
    D(n) = d0 + D(sqrt n) - D1 next to the oracle count.

    Only ``n >= 25`` (so ``p_v >= 5``) can be reconciled; smaller ``n`` get a
    report with ``reconciled`` off.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    table = sieve_primes(isqrt(n) + 5)
    root = isqrt(n)
    p_v = table.largest_at_most(root)
    primes = table.primes_upto(root)

    d0_value = d0(n, primes)
    pairs_below = _d_sqrt_for(table, p_v)
    d1 = 0 if p_v is not None and p_v >= 5 else 1
    formula = d0_value + pairs_below - d1
    oracle = count_cousin_pairs(n, exclude_3_7=True)

    report = CousinCountReport(
        n=n,
        p_v=p_v,
        d0=d0_value,
        d_sqrt=pairs_below,
        d1=d1,
        d_formula=formula,
        d_oracle=oracle,
        reconciled=n >= 25 and formula == oracle,
    )
    if n >= 25 and not report.reconciled:
        logger.error("Formula disagrees with oracle", **report.model_dump())
    return report


def legendre_pi(n: int) -> int:
    """pi(n) as pi(sqrt n) - 1 + sum of mu(d) * floor(n / d)."""
    if n < 4:
        raise DomainError(f"legendre_pi needs n >= 4, got {n}")
    primes = _primes_below_root(n)
    signs, lams, moduli = live_term_arrays(n, primes, tilde=False, budget=2**62)
    return len(primes) - 1 + _sum_terms(n, signs, lams, moduli)


def legendre_pi_series(lo: int, hi: int) -> np.ndarray:
    """legendre_pi(n) for every ``n`` in ``lo..hi``."""
    if lo < 4 or hi < lo:
        raise DomainError(f"invalid range [{lo}, {hi}], need lo >= 4")
    table = _series_table(hi)
    values = np.empty(hi - lo + 1, dtype=np.int64)
    for a, b, primes in _prime_set_intervals(lo, hi, table):
        arrays = live_term_arrays(b, primes, tilde=False, budget=2**62)
        series = _series_from_terms(b, *arrays)
        values[a - lo : b - lo + 1] = series[a : b + 1] + len(primes) - 1
    return values


def reconcile_range(lo: int, hi: int) -> Tuple[int, List[CousinCountReport]]:
    """
    Compare d_formula against the oracle for every ``n`` in ``lo..hi``.

    Returns:
        Number of ``n`` checked and a report for every mismatch
    """
    if lo < 25 or hi < lo:
        raise DomainError(f"reconciliation needs 25 <= lo <= hi, got [{lo}, {hi}]")
    table = _series_table(hi)
    oracle = cousin_count_series(hi, exclude_3_7=True)
    d0_values = d0_series(lo, hi)

    mismatches: List[CousinCountReport] = []
    for a, b, primes in _prime_set_intervals(lo, hi, table):
        p_v = primes[-1]
        pairs_below = _d_sqrt_for(table, p_v)
        for n in range(a, b + 1):
            formula = int(d0_values[n - lo]) + pairs_below
            if formula != oracle[n]:
                mismatches.append(
                    CousinCountReport(
                        n=n,
                        p_v=p_v,
                        d0=int(d0_values[n - lo]),
                        d_sqrt=pairs_below,
                        d1=0,
                        d_formula=formula,
                        d_oracle=int(oracle[n]),
                        reconciled=False,
                    )
                )

    logger.info("Reconciled range", lo=lo, hi=hi, mismatches=len(mismatches))
    return hi - lo + 1, mismatches


def expansion_check(lo: int, hi: int) -> Tuple[int, List[Tuple[int, int, int]]]:
    """
    Compare expansion d0 with the deletion simulator for every ``n`` in ``lo..hi``.

    Returns:
        Number of ``n`` checked and ``(n, expansion, simulation)`` per mismatch
    """
    if lo < 1 or hi < lo:
        raise DomainError(f"invalid range [{lo}, {hi}]")
    table = _series_table(hi)
    expansion = d0_series(lo, hi)

    mismatches: List[Tuple[int, int, int]] = []
    for a, b, primes in _prime_set_intervals(lo, hi, table):
        simulated = survivor_counts(b, tuple(deletion_residues(primes)))
        for n in range(a, b + 1):
            if expansion[n - lo] != simulated[n]:
                mismatches.append((n, int(expansion[n - lo]), int(simulated[n])))

    logger.info("Checked expansion identity", lo=lo, hi=hi, mismatches=len(mismatches))
    return hi - lo + 1, mismatches
