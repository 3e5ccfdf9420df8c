"""Process pool for independent sweep jobs."""

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, TypeVar

import structlog

logger = structlog.get_logger(__name__)

T = TypeVar("T")


def run_ordered(fn: Callable[[Any], T], jobs: Sequence[Any], max_workers: int = 1) -> List[T]:
    """
    Run ``fn`` over ``jobs`` and return results in submission order.

    Args:
        fn: Picklable module-level function taking one job
        jobs: Picklable job arguments
        max_workers: Worker processes; 1 or less runs in this process

    Returns:
        One result per job, in the order of ``jobs``
    """
    if max_workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]

    workers = min(max_workers, len(jobs))
    logger.info("Starting worker pool", workers=workers, jobs=len(jobs))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(fn, jobs))
    logger.info("Worker pool finished", jobs=len(jobs))
    return results
