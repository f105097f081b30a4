"""Bounded worker pool for trajectory-level units of work.

Results are always returned in input order, so any reduction performed on
them afterwards is independent of the number of workers.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    """Pool size from ``SCSF_THREADS`` (default: CPU count)."""
    raw = os.environ.get("SCSF_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def pmap(func, items, workers: int | None = None) -> list:
    items = list(items)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(func, items))
