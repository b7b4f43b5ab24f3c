"""
workers.py — Background Worker Threads

Thread-pool mapper used by scans and audits. Work items run concurrently;
results come back in input order, so output assembly stays single-threaded
and ordered by point index.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from config import MAX_THREADS
from utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class PoolMapper:
    """
    map-like callable backed by a ThreadPoolExecutor.

    With one worker (or a single item) it falls back to the built-in map,
    which keeps tracebacks simple when debugging.
    """

    def __init__(self, max_workers: int | None = None):
        """
        Initialize the mapper.

        Args:
            max_workers: Thread cap; defaults to MASLOV_THREADS / logical cores
        """
        self.max_workers = max(1, int(max_workers or MAX_THREADS))

    def __call__(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        items = list(items)
        workers = min(self.max_workers, len(items))
        if workers <= 1:
            return list(map(fn, items))
        logger.debug(f"Running {len(items)} work item(s) on {workers} thread(s)")
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="maslov") as pool:
            return list(pool.map(fn, items))
