"""Ordered thread-pool map with a worker cap from ``COMPLAB_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    raw = os.environ.get("COMPLAB_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = os.cpu_count() or 1
    return max(1, min(cap, os.cpu_count() or 1))


def pmap(fn, items):
    """``[fn(x) for x in items]``, possibly threaded; result order is fixed."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
