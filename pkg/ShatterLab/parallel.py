import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "SHATTERLAB_THREADS"


def worker_count() -> int:
    """Number of worker threads, capped by ``SHATTERLAB_THREADS`` when set."""
    available = os.cpu_count() or 1
    raw = os.getenv(THREADS_ENV)
    if raw is None or not raw.strip():
        return available
    try:
        requested = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r (not an integer); using 1 worker.", THREADS_ENV, raw)
        return 1
    if requested < 1:
        logger.warning("Ignoring %s=%r (must be >= 1); using 1 worker.", THREADS_ENV, raw)
        return 1
    return min(requested, available)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply ``fn`` to every item, returning results in input order.

    Results are keyed by position, so any reduction over the returned list is
    independent of the worker count and the schedule.
    """
    items = list(items)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
