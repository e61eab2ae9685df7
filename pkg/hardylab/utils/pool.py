# hardylab/utils/pool.py
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from hardylab import config

logger = logging.getLogger("hardylab.pool")

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Map fn over items with at most HF_THREADS workers; results keep input order
    so parallel and serial runs produce identical output.
    """
    items = list(items)
    threads = config.HF_THREADS if threads is None else max(1, threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(threads, len(items))
    logger.debug("ordered_map: %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() re-raises the first worker exception in order
        return list(pool.map(fn, items))
