"""Timing, allocation accounting and CSV emission for benchmark runs."""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass


class AllocationLedger:
    """Word counts of scratch the algorithms request, split by kind.

    heap_words: shared allocations (shadow blocks, flags, tables).
    scratch_words: task-local workspace (per-thread block merge buffers).
    """

    def __init__(self):
        self.heap_words = 0
        self.scratch_words = 0

    def add_heap(self, words: int) -> None:
        self.heap_words += int(words)

    def add_scratch(self, words: int) -> None:
        self.scratch_words += int(words)


@dataclass
class BenchRecord:
    algo: str
    size: int
    block: int
    threads: int
    seed: int
    us: int
    heap_peak: int
    scratch_peak: int
    verified: str

    CSV_HEADER = "algo,size,block,threads,seed,us,heap_peak,scratch_peak,verified"

    def csv_row(self) -> str:
        return (f"{self.algo},{self.size},{self.block},{self.threads},{self.seed},"
                f"{self.us},{self.heap_peak},{self.scratch_peak},{self.verified}")


def measure(fn, *, trace: bool = True):
    """Run fn() returning (result, elapsed_us, traced_peak_bytes).

    traced_peak_bytes covers every Python-visible allocation (numpy buffers
    included) made while fn runs; the compiled kernels allocate nothing on
    their own, so this is the run's true auxiliary heap.
    """
    peak = 0
    if trace:
        tracemalloc.start()
        tracemalloc.reset_peak()
        base = tracemalloc.get_traced_memory()[0]
    t0 = time.perf_counter()
    result = fn()
    elapsed = time.perf_counter() - t0
    if trace:
        peak = max(0, tracemalloc.get_traced_memory()[1] - base)
        tracemalloc.stop()
    return result, int(elapsed * 1e6) or 1, peak
