"""Worker-count control shared by FFTs and ensemble loops."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["worker_count", "ordered_map"]


def worker_count():
    """Worker cap from ``ZKLAB_THREADS`` (default: CPU count)."""
    raw = os.environ.get("ZKLAB_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"ZKLAB_THREADS must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"ZKLAB_THREADS must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def ordered_map(func, items):
    """``[func(x) for x in items]``, possibly threaded; output order is input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
