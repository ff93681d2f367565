"""Deterministic worker pool: results reduce in submission order.

Tasks may execute concurrently, but results are always consumed in the
order the tasks were submitted and chunk shapes never depend on the thread
count, so every float accumulation downstream sees the same operand order
regardless of parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "VICSEK_LAB_THREADS"


def default_threads() -> int:
    val = os.environ.get(ENV_THREADS)
    if val:
        try:
            return max(1, int(val))
        except ValueError:
            pass
    return 1


class OrderedPool:
    """map() preserving input order; threads=1 degenerates to a plain loop."""

    def __init__(self, threads: int | None = None):
        self.threads = threads if threads and threads > 0 else default_threads()

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
        if self.threads == 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            return list(ex.map(fn, items))
