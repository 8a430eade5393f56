"""Optional thread fan-out, capped by the RIB_THREADS environment variable.

Work items are always reduced in submission order, so results are independent
of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("RIB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def thread_map(fn, items):
    """Apply ``fn`` to each item, preserving input order in the result list."""
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
