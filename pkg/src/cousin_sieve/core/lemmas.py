"""Instance checks and exhaustive sweeps for the floor-function properties and lemmas.

``P*`` ids are unconditional floor identities and bounds; a failure there is
a bug. ``L*`` ids are claims under test; their counterexamples are results.
Left-hand sides of the claims come from deletion simulation and right-hand
sides from closed forms.
"""

import time
from functools import lru_cache
from itertools import permutations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..config.settings import get_settings
from ..models.schemas import DeletionResidue, LemmaGrid, LemmaId, LemmaWitness, SweepReport
from ..worker import run_ordered
from .errors import DomainError
from .operators import y_count, y_tilde_count
from .primes import (
    _survivor_mask,
    deletion_residues,
    sieve_primes,
    simulate_deletion,
    survivor_counts,
)

logger = structlog.get_logger(__name__)

UNCONDITIONAL = (LemmaId.P1, LemmaId.P2, LemmaId.P3, LemmaId.P4, LemmaId.P5, LemmaId.P6)

DEFAULT_GRIDS: Dict[LemmaId, LemmaGrid] = {
    LemmaId.P1: LemmaGrid(m_max=500, p_max=7),
    LemmaId.P2: LemmaGrid(m_max=200, p_max=19),
    LemmaId.P3: LemmaGrid(m_max=500, p_max=13),
    LemmaId.P4: LemmaGrid(m_max=300, primes=[3, 5, 7, 11]),
    LemmaId.P5: LemmaGrid(m_max=100, p_max=13),
    LemmaId.P6: LemmaGrid(m_max=500, p_max=13),
    LemmaId.L1: LemmaGrid(m_max=5000, p_max=97),
    LemmaId.L3: LemmaGrid(p_max=31, factor=3),
    LemmaId.L32: LemmaGrid(p_max=31, factor=3),
    LemmaId.L4: LemmaGrid(m_max=100_000),
    LemmaId.L5: LemmaGrid(p_max=13, factor=2),
}


def _primes_upto(p_max: int) -> List[int]:
    if p_max < 2:
        return []
    return sieve_primes(p_max).primes_upto(p_max)


@lru_cache(maxsize=None)
def _residue(p: int) -> DeletionResidue:
    return deletion_residues([p])[0]


def _ceil_ratio(m: int, p: int) -> int:
    """ceil(m * (1 - 3/p)) in integers."""
    return -(-m * (p - 3) // p)


def _out_of_domain(lemma_id: LemmaId, params: Dict) -> LemmaWitness:
    return LemmaWitness(lemma_id=lemma_id, params=params, passed=False, in_domain=False)


def bracket_op(m: int, p: int) -> int:
    """Survivors in ``1..m`` after deleting ``k = 0`` and ``k = -4 (mod p)``."""
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    if p == 2:
        return m - y_count(2, m)
    return m - y_count(p, m) - y_tilde_count(p, m)


def _bracket_array(m: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return m - m // 2
    return m - m // p - (m + 4 % p) // p


def _block_survivors(length: int, p: int, offset: int) -> int:
    return int(np.count_nonzero(_survivor_mask(length, [_residue(p)], offset)))


def _sequential_count(n: int, residues: Sequence[DeletionResidue]) -> int:
    values = np.arange(1, n + 1, dtype=np.int64)
    for stage in residues:
        values = values[~np.isin(values % stage.modulus, stage.residues)]
    return int(values.size)


# Instance checks


def check_p1(n: int, residues: Sequence[DeletionResidue]) -> LemmaWitness:
    """Survivor count is the same for every ordering of the deletion stages."""
    counts = [_sequential_count(n, order) for order in permutations(residues)]
    return LemmaWitness(
        lemma_id=LemmaId.P1,
        params={"n": n, "moduli": [r.modulus for r in residues]},
        lhs=min(counts),
        rhs=max(counts),
        passed=min(counts) == max(counts),
    )


def _p2_values(m1: int, m2: int, p: int) -> Tuple[int, int]:
    lhs = (m1 + m2) // p
    rhs = m1 // p + m2 // p + (m1 % p + m2 % p) // p
    return lhs, rhs


def check_p2(m1: int, m2: int, p: int) -> LemmaWitness:
    """floor((m1+m2)/p) splits into the two floors plus the carry of the remainders."""
    lhs, rhs = _p2_values(m1, m2, p)
    return LemmaWitness(
        lemma_id=LemmaId.P2,
        params={"m1": m1, "m2": m2, "p": p},
        lhs=lhs,
        rhs=rhs,
        passed=lhs == rhs,
    )


def check_p3(m: int, p: int) -> LemmaWitness:
    """bracket(a*p + b) equals a*(p - 2) plus the survivors of the trailing block."""
    if p == 2:
        raise DomainError("check_p3 needs an odd prime")
    a, b = divmod(m, p)
    lhs = bracket_op(m, p)
    rhs = a * (p - 2) + _block_survivors(b, p, a * p)
    return LemmaWitness(
        lemma_id=LemmaId.P3,
        params={"m": m, "p": p, "a": a, "b": b},
        lhs=lhs,
        rhs=rhs,
        passed=lhs == rhs,
    )


def check_p4(m1: int, m2: int, p: int) -> LemmaWitness:
    """-2 <= bracket(m1+m2) - bracket(m1) - bracket(m2) <= 1."""
    if p == 2:
        raise DomainError("check_p4 needs an odd prime")
    lhs = bracket_op(m1 + m2, p)
    rhs = bracket_op(m1, p) + bracket_op(m2, p)
    delta = lhs - rhs
    return LemmaWitness(
        lemma_id=LemmaId.P4,
        params={"m1": m1, "m2": m2, "p": p, "delta": delta},
        lhs=lhs,
        rhs=rhs,
        passed=-2 <= delta <= 1,
    )


def check_p5(m1: int, m2: int, p: int) -> LemmaWitness:
    """bracket(m1+m2) equals bracket(m1) plus the survivors of the next m2 values."""
    lhs = bracket_op(m1 + m2, p)
    rhs = bracket_op(m1, p) + _block_survivors(m2, p, m1)
    return LemmaWitness(
        lemma_id=LemmaId.P5,
        params={"m1": m1, "m2": m2, "p": p},
        lhs=lhs,
        rhs=rhs,
        passed=lhs == rhs,
    )


def check_p6(m: int, m_prime: int, p: int) -> LemmaWitness:
    """bracket is monotone: bracket(m') >= bracket(m) for m' >= m."""
    params = {"m": m, "m_prime": m_prime, "p": p}
    if m_prime < m:
        return _out_of_domain(LemmaId.P6, params)
    lhs, rhs = bracket_op(m_prime, p), bracket_op(m, p)
    return LemmaWitness(lemma_id=LemmaId.P6, params=params, lhs=lhs, rhs=rhs, passed=lhs >= rhs)


def check_l1(m: int, p: int) -> LemmaWitness:
    """Simulated survivors of one odd prime against ceil(m(1 - 3/p))."""
    params = {"m": m, "p": p}
    if p == 2:
        raise DomainError("check_l1 needs an odd prime")
    if m < p:
        return _out_of_domain(LemmaId.L1, params)
    lhs = simulate_deletion(m, [_residue(p)], materialize_cap=0).count
    rhs = _ceil_ratio(m, p)
    return LemmaWitness(lemma_id=LemmaId.L1, params=params, lhs=lhs, rhs=rhs, passed=lhs >= rhs)


def check_l3(m: int, p_i: int, p_j: int) -> LemmaWitness:
    """Two-prime deletion against bracket(ceil(m(1 - 3/p_j)), p_i).

    ``p_i = 2`` is reported under ``L32``.
    """
    lemma_id = LemmaId.L32 if p_i == 2 else LemmaId.L3
    params = {"m": m, "p_i": p_i, "p_j": p_j}
    if p_j == 2 or p_j <= p_i or m < p_j * p_j:
        return _out_of_domain(lemma_id, params)
    lhs = simulate_deletion(m, deletion_residues([p_i, p_j]), materialize_cap=0).count
    rhs = bracket_op(_ceil_ratio(m, p_j), p_i)
    return LemmaWitness(lemma_id=lemma_id, params=params, lhs=lhs, rhs=rhs, passed=lhs >= rhs)


def check_l4(m: int) -> LemmaWitness:
    """Survivors of the 2 and 3 deletions (k = 1 mod 6) against floor(m/6)."""
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    lhs = simulate_deletion(m, deletion_residues([2, 3]), materialize_cap=0).count
    rhs = m // 6
    return LemmaWitness(lemma_id=LemmaId.L4, params={"m": m}, lhs=lhs, rhs=rhs, passed=lhs >= rhs)


def check_l5(m: int, small_primes: Sequence[int], p_j: int) -> LemmaWitness:
    """
    Deleting ``small_primes`` then ``p_j`` from ``[1, m]`` against deleting
    ``small_primes`` alone from the truncated prefix ``[1, ceil(m(1 - 3/p_j))]``.

    The survivor count of the position-reindexed pipeline is recorded under
    ``reindexed`` in the witness params.
    """
    small = list(small_primes)
    params: Dict = {"m": m, "small_primes": small, "p_j": p_j}
    in_domain = (
        p_j >= 5
        and bool(small)
        and small == sorted(set(small))
        and small[-1] < p_j
        and m >= p_j * p_j
    )
    if not in_domain:
        return _out_of_domain(LemmaId.L5, params)

    stages = deletion_residues(small + [p_j])
    lhs = simulate_deletion(m, stages, materialize_cap=0).count
    rhs = simulate_deletion(_ceil_ratio(m, p_j), deletion_residues(small), materialize_cap=0).count
    params["reindexed"] = simulate_deletion(m, stages, reindexed=True, materialize_cap=0).count
    return LemmaWitness(lemma_id=LemmaId.L5, params=params, lhs=lhs, rhs=rhs, passed=lhs >= rhs)


# Sweeps

SweepResult = Tuple[int, int, List[LemmaWitness], List[LemmaWitness], str]


def _tightest(
    margins: np.ndarray, build: Callable[[int], LemmaWitness]
) -> List[LemmaWitness]:
    if margins.size == 0:
        return []
    return [build(int(np.argmin(margins)))]


def _sweep_p1(grid: LemmaGrid) -> SweepResult:
    residues = deletion_residues(_primes_upto(grid.p_max))
    orders = list(permutations(residues))
    failures = []
    for n in range(grid.m_max + 1):
        canonical = _sequential_count(n, residues)
        if any(_sequential_count(n, order) != canonical for order in orders[1:]):
            failures.append(check_p1(n, residues))
    checked = (grid.m_max + 1) * len(orders)
    desc = f"n in [0, {grid.m_max}], all orders of moduli <= {grid.p_max}"
    return checked, 0, failures, [], desc


def _sweep_p2(grid: LemmaGrid) -> SweepResult:
    m1, m2 = np.meshgrid(np.arange(grid.m_max + 1), np.arange(grid.m_max + 1), indexing="ij")
    checked, failures = 0, []
    for p in _primes_upto(grid.p_max):
        lhs = (m1 + m2) // p
        rhs = m1 // p + m2 // p + (m1 % p + m2 % p) // p
        checked += lhs.size
        for i, j in np.argwhere(lhs != rhs).tolist():
            failures.append(check_p2(i, j, p))
    desc = f"m1, m2 in [0, {grid.m_max}], primes <= {grid.p_max}"
    return checked, 0, failures, [], desc


def _odd_primes(grid: LemmaGrid, floor: int = 3) -> List[int]:
    primes = grid.primes if grid.primes is not None else _primes_upto(grid.p_max)
    return [p for p in primes if p >= floor]


def _sweep_p3(grid: LemmaGrid) -> SweepResult:
    checked, failures = 0, []
    for p in _odd_primes(grid):
        for m in range(grid.m_max + 1):
            a, b = divmod(m, p)
            checked += 1
            if bracket_op(m, p) != a * (p - 2) + _block_survivors(b, p, a * p):
                failures.append(check_p3(m, p))
    desc = f"m in [0, {grid.m_max}], odd primes <= {grid.p_max}"
    return checked, 0, failures, [], desc


def _sweep_p4(grid: LemmaGrid) -> SweepResult:
    span = np.arange(grid.m_max + 1)
    m1, m2 = np.meshgrid(span, span, indexing="ij")
    checked, failures, extremes = 0, [], []
    for p in _odd_primes(grid):
        b = _bracket_array(np.arange(2 * grid.m_max + 1), p)
        delta = b[m1 + m2] - b[m1] - b[m2]
        checked += delta.size
        for i, j in np.argwhere((delta < -2) | (delta > 1)).tolist():
            failures.append(check_p4(i, j, p))
        for index in (int(np.argmin(delta)), int(np.argmax(delta))):
            i, j = divmod(index, grid.m_max + 1)
            extremes.append(check_p4(i, j, p))
    desc = f"m1, m2 in [0, {grid.m_max}], p in {_odd_primes(grid)}"
    return checked, 0, failures, extremes, desc


def _sweep_p5(grid: LemmaGrid) -> SweepResult:
    checked, failures = 0, []
    for p in _primes_upto(grid.p_max):
        b = _bracket_array(np.arange(2 * grid.m_max + 1), p)
        for m1 in range(grid.m_max + 1):
            for m2 in range(grid.m_max + 1):
                checked += 1
                if b[m1 + m2] != b[m1] + _block_survivors(m2, p, m1):
                    failures.append(check_p5(m1, m2, p))
    desc = f"m1, m2 in [0, {grid.m_max}], primes <= {grid.p_max}"
    return checked, 0, failures, [], desc


def _sweep_p6(grid: LemmaGrid) -> SweepResult:
    size = grid.m_max + 1
    upper = np.triu(np.ones((size, size), dtype=bool))
    checked, failures = 0, []
    for p in _odd_primes(grid):
        b = _bracket_array(np.arange(size), p)
        bad = upper & (b[None, :] < b[:, None])
        checked += int(np.count_nonzero(upper))
        for m, m_prime in np.argwhere(bad).tolist():
            failures.append(check_p6(m, m_prime, p))
    desc = f"0 <= m <= m' <= {grid.m_max}, odd primes <= {grid.p_max}"
    return checked, 0, failures, [], desc


def _sweep_l1(grid: LemmaGrid) -> SweepResult:
    checked, failures, extremes = 0, [], []
    for p in _odd_primes(grid):
        if p > grid.m_max:
            continue
        m = np.arange(p, grid.m_max + 1)
        lhs = survivor_counts(grid.m_max, (_residue(p),))[m]
        rhs = -((-m * (p - 3)) // p)
        checked += m.size
        for index in np.flatnonzero(lhs < rhs).tolist():
            failures.append(check_l1(int(m[index]), p))
        extremes += _tightest(lhs - rhs, lambda i: check_l1(int(m[i]), p))
    desc = f"odd p <= {grid.p_max}, p <= m <= {grid.m_max}"
    return checked, 0, failures, extremes, desc


def _sweep_l3_family(grid: LemmaGrid, two: bool) -> SweepResult:
    factor = grid.factor or 3
    checked, failures, extremes = 0, [], []
    for p_j in _odd_primes(grid):
        lowers = [2] if two else [p for p in _primes_upto(p_j - 1) if p >= 3]
        hi = factor * p_j * p_j
        m = np.arange(p_j * p_j, hi + 1)
        ceil = -((-m * (p_j - 3)) // p_j)
        for p_i in lowers:
            lhs = survivor_counts(hi, tuple(deletion_residues([p_i, p_j])))[m]
            rhs = _bracket_array(ceil, p_i)
            checked += m.size
            for index in np.flatnonzero(lhs < rhs).tolist():
                failures.append(check_l3(int(m[index]), p_i, p_j))
            extremes += _tightest(lhs - rhs, lambda i: check_l3(int(m[i]), p_i, p_j))
    lower = "p_i = 2" if two else "3 <= p_i < p_j"
    desc = f"odd p_j <= {grid.p_max}, {lower}, p_j^2 <= m <= {factor} p_j^2"
    return checked, 0, failures, extremes, desc


def _sweep_l4(grid: LemmaGrid) -> SweepResult:
    m = np.arange(grid.m_max + 1)
    lhs = survivor_counts(grid.m_max, tuple(deletion_residues([2, 3])))
    rhs = m // 6
    failures = [check_l4(int(i)) for i in np.flatnonzero(lhs < rhs).tolist()]
    extremes = _tightest(lhs - rhs, lambda i: check_l4(i))
    return m.size, 0, failures, extremes, f"m in [0, {grid.m_max}]"


def _sweep_l5(grid: LemmaGrid) -> SweepResult:
    factor = grid.factor or 2
    checked, failures, extremes = 0, [], []
    for p_j in _odd_primes(grid, floor=5):
        small = _primes_upto(p_j - 1)
        hi = factor * p_j * p_j
        m = np.arange(p_j * p_j, hi + 1)
        ceil = -((-m * (p_j - 3)) // p_j)
        lhs = survivor_counts(hi, tuple(deletion_residues(small + [p_j])))[m]
        rhs = survivor_counts(int(ceil[-1]), tuple(deletion_residues(small)))[ceil]
        checked += m.size
        for index in np.flatnonzero(lhs < rhs).tolist():
            failures.append(check_l5(int(m[index]), small, p_j))
        extremes += _tightest(lhs - rhs, lambda i: check_l5(int(m[i]), small, p_j))
    desc = f"5 <= p_j <= {grid.p_max}, all smaller primes, p_j^2 <= m <= {factor} p_j^2"
    return checked, 0, failures, extremes, desc


_SWEEPS: Dict[LemmaId, Callable[[LemmaGrid], SweepResult]] = {
    LemmaId.P1: _sweep_p1,
    LemmaId.P2: _sweep_p2,
    LemmaId.P3: _sweep_p3,
    LemmaId.P4: _sweep_p4,
    LemmaId.P5: _sweep_p5,
    LemmaId.P6: _sweep_p6,
    LemmaId.L1: _sweep_l1,
    LemmaId.L3: lambda grid: _sweep_l3_family(grid, two=False),
    LemmaId.L32: lambda grid: _sweep_l3_family(grid, two=True),
    LemmaId.L4: _sweep_l4,
    LemmaId.L5: _sweep_l5,
}


def resolve_grid(
    lemma_id: LemmaId, overrides: Optional[Dict[str, Dict[str, int]]] = None
) -> LemmaGrid:
    """Default grid for ``lemma_id`` with configured and explicit overrides applied."""
    update: Dict = {}
    update.update(get_settings().sweep_overrides.get(lemma_id.value, {}))
    update.update((overrides or {}).get(lemma_id.value, {}))
    if "p_max" in update and "primes" not in update:
        update["primes"] = None
    return LemmaGrid.model_validate({**DEFAULT_GRIDS[lemma_id].model_dump(), **update})


def run_sweep(lemma_id: LemmaId, grid: Optional[LemmaGrid] = None) -> SweepReport:
    """
    Evaluate one lemma over its whole grid.

    Args:
        lemma_id: Property or lemma to sweep
        grid: Parameter grid, default the resolved grid for ``lemma_id``

    Returns:
        SweepReport with failing witnesses in grid order
    """
    lemma_id = LemmaId(lemma_id)
    grid = grid or resolve_grid(lemma_id)
    start = time.perf_counter()
    checked, out_of_domain, failures, extremes, desc = _SWEEPS[lemma_id](grid)
    elapsed = time.perf_counter() - start

    report = SweepReport(
        lemma_id=lemma_id,
        range_description=desc,
        unconditional=lemma_id.unconditional,
        instances_checked=checked,
        out_of_domain=out_of_domain,
        failures=failures,
        extremes=extremes,
        elapsed=elapsed,
    )
    log = logger.info if report.ok else logger.warning
    log(
        "Sweep finished",
        lemma_id=lemma_id.value,
        checked=checked,
        failures=len(failures),
        elapsed=round(elapsed, 3),
    )
    return report


def _run_sweep_job(job: Tuple[str, Dict]) -> SweepReport:
    lemma_id, grid = job
    return run_sweep(LemmaId(lemma_id), LemmaGrid.model_validate(grid))


def run_suite(
    lemma_ids: Optional[Sequence[LemmaId]] = None,
    overrides: Optional[Dict[str, Dict[str, int]]] = None,
    max_workers: Optional[int] = None,
) -> List[SweepReport]:
    """Run the sweeps for ``lemma_ids`` (default all) in a fixed order."""
    ids = list(lemma_ids) if lemma_ids else list(LemmaId)
    jobs = [(lid.value, resolve_grid(lid, overrides).model_dump()) for lid in ids]
    workers = max_workers or get_settings().max_workers
    logger.info("Running lemma suite", lemmas=[lid.value for lid in ids], workers=workers)
    return run_ordered(_run_sweep_job, jobs, workers)


def unconditional_failures(reports: Sequence[SweepReport]) -> List[SweepReport]:
    """Reports of unconditional properties that found a failure."""
    return [r for r in reports if r.unconditional and not r.ok]
