"""Optional thread parallelism with scheduling-independent results."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_ENV_VAR = "REGIMIX_THREADS"


def thread_cap() -> int:
    """Worker cap from the REGIMIX_THREADS environment variable (>= 1)."""
    raw = os.environ.get(_ENV_VAR, "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_ENV_VAR} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{_ENV_VAR} must be >= 1, got {cap}")
    return cap


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Apply ``fn`` to every item, preserving input order in the result.

    Each item must be an independent unit of work (no shared mutable
    state); results are identical for any worker count.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
