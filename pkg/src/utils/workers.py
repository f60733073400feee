"""Worker pool sizing and order-preserving parallel map"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar('T')
R = TypeVar('R')


def worker_count() -> int:
    """Number of workers, capped by the ASMA_THREADS environment variable"""
    cores = os.cpu_count() or 1
    cap = os.environ.get('ASMA_THREADS')
    if cap:
        try:
            return max(1, min(cores, int(cap)))
        except ValueError:
            pass
    return cores


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply fn to every item in a worker pool; results keep input order"""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
