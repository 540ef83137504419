"""Order-preserving parallel map, capped by PRODNLS_THREADS (default 1).

Numpy releases the GIL inside transforms and elementwise kernels, so a thread
pool helps on sample-parallel scans and per-snapshot diagnostics. Results are
collected by index, so outputs are independent of scheduling; with the
default of a single worker the map degenerates to a plain loop.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("PRODNLS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
