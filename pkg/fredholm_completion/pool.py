"""
Worker pool shared by grid scans and truncation batches.
"""

import os
from multiprocessing.pool import ThreadPool

from .header import THREADS_ENV, logger


def worker_count(requested=None):
    """Number of workers: ``requested``, else FREDHOLM_THREADS, else the CPU count."""
    if requested is not None:
        return max(1, int(requested))
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring %s=%r: not an integer", THREADS_ENV, raw)
    return max(1, os.cpu_count() or 1)


def ordered_map(func, items, workers=None):
    """``[func(x) for x in items]``, possibly computed concurrently, always in input order."""
    items = list(items)
    n_workers = min(worker_count(workers), max(1, len(items)))
    if n_workers <= 1:
        return [func(x) for x in items]
    logger.debug("mapping %d items over %d threads", len(items), n_workers)
    with ThreadPool(n_workers) as pool:
        return pool.map(func, items)
