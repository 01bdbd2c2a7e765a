import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(threads=None) -> int:
    if threads is None:
        env = os.environ.get("RELIAB_THREADS", "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))`` on a thread pool; output order is input order."""
    items = list(items)
    n = min(worker_count(threads), len(items)) if items else 1
    if n <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
