"""Uniform random permutation in place.

Three variants over uint64 storage:

- parallel: one reservation-based pass over all swap ids, with conflict
  resolution that executes swaps in an order consistent with the
  sequential swap-from-the-end algorithm;
- chunked: the same pass split into n/k sequential rounds of k ids each,
  reusing one reservation table of capacity O(k);
- buffered: two stages that keep the reservation table inside the input
  itself.  A restorable buffer in a suffix lends scratch while the prefix
  ids are processed; an adjustable buffer in the prefix then supports the
  remaining ids with simulated reads/writes for displaced values,
  bit-preserving writes plus double reservation for encoding cells, and a
  final uniformly random transposition of every encoding pair.

Swap targets are a pure function of (seed, id), so a run is replayable
across thread counts, backends and variants.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _rng
from ._backend import get_backend
from .buffers import RestorableBuffer
from .errors import ContractViolation

MASK64 = (1 << 64) - 1


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class EncoderSpec:
    """Disjoint index pairs, each transposed independently with probability 1/2."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for a, b in self.pairs:
            if a == b or a in seen or b in seen:
                raise ContractViolation("encoder pairs must be disjoint")
            seen.update((a, b))


def uniform_encoder_apply(arr: np.ndarray, spec: EncoderSpec, seed: int, salt: int = 0) -> None:
    for t, (a, b) in enumerate(spec.pairs):
        if _rng.coin(seed, _rng.TAG_ENCODER, t, salt):
            arr[a], arr[b] = arr[b].copy(), arr[a].copy()


def swap_targets(seed: int, n: int) -> list[int]:
    """H[i] for i in 0..n-1 (uniform over {0..i}); exposed for replay oracles."""
    return [_rng.shuffle_target(seed, i) for i in range(n)]


def apply_swaps(arr: np.ndarray, seed: int, order) -> None:
    """Apply the transpositions (i, H[i]) sequentially in the given id order."""
    for i in order:
        h = _rng.shuffle_target(seed, i)
        if h != i:
            arr[i], arr[h] = arr[h].copy(), arr[i].copy()


def _table_cap(k: int, staged: bool) -> int:
    want = 4 * k if staged else 2 * k
    cap = 1
    while cap < max(2, want):
        cap *= 2
    return cap


def _workspace_words(k: int, staged: bool) -> int:
    return 3 * _table_cap(k, staged) + k


def parallel_knuth_shuffle(arr: np.ndarray, seed: int = 0, r: int = 0, s: int | None = None,
                           aux: np.ndarray | None = None, threads: int | None = None,
                           backend: str | None = None, ledger=None) -> int:
    """Process swap ids [r, s] in reservation rounds; returns the round count."""
    n = len(arr)
    if s is None:
        s = n - 1
    if n <= 1 or s < r:
        return 0
    if not (0 <= r and s < n):
        raise ContractViolation("swap id range outside the array")
    k = s - r + 1
    cap = _table_cap(k, staged=False)
    if aux is None:
        aux = np.zeros(3 * cap + k, dtype=np.uint64)
        if ledger is not None:
            ledger.add_heap(len(aux))
    elif len(aux) < 3 * cap + k:
        raise ContractViolation("workspace too small for this id range")
    be = get_backend(backend)
    return be.knuth_chunk_rounds(arr, r, s, seed, aux, 0, 64, cap,
                                 threads or default_threads())


def chunked_shuffle(arr: np.ndarray, k: int, seed: int = 0, threads: int | None = None,
                    backend: str | None = None, ledger=None) -> None:
    """Shuffle in ceil(n/k) reservation passes of k swap ids each, high ids first."""
    n = len(arr)
    if k < 1:
        raise ContractViolation("chunk size must be at least 1")
    if n <= 1:
        return
    cap = _table_cap(min(k, n), staged=False)
    aux = np.zeros(3 * cap + min(k, n), dtype=np.uint64)
    if ledger is not None:
        ledger.add_heap(len(aux))
    be = get_backend(backend)
    threads = threads or default_threads()
    hi = n - 1
    while hi >= 0:
        lo = max(0, hi - k + 1)
        be.knuth_chunk_rounds(arr, lo, hi, seed, aux, 0, 64, cap, threads)
        hi = lo - 1


@dataclass
class BufferedParams:
    """Stage geometry for the buffered shuffle; tests shrink these."""

    s1: int
    w1: int
    k1: int
    s2: int
    w2: int
    k2: int
    heap_workspace: bool = False

    @property
    def suffix_cells(self) -> int:
        return self.s1 * (1 + 2 * self.w1)

    @property
    def prefix_cells(self) -> int:
        return self.s2 * (1 + 2 * self.w2)


def plan_buffered(n: int) -> BufferedParams | None:
    """Default stage sizing: suffix buffer at most a third of the array.

    Returns None when no viable geometry exists (the caller falls back to
    the plain parallel variant).
    """
    if n < 64:
        return None
    w = (n + 2).bit_length()
    per_slot = 1 + 2 * w
    s1_budget = (n // 3) // per_slot
    # a chunk of k needs 3 * cap + k <= 13k workspace slots (cap <= 4k)
    k1 = s1_budget // 13
    if k1 < 1:
        return None
    cap1 = _table_cap(k1, staged=False)
    s1 = 3 * cap1 + k1
    prefix = n - s1 * per_slot
    if prefix < 1:
        return None
    s2_budget = (prefix // 2) // per_slot
    k2 = s2_budget // 25  # staged tables are twice as large
    if k2 < 1:
        return None
    cap2 = _table_cap(k2, staged=True)
    s2 = 3 * cap2 + k2
    if s2 * per_slot > prefix:
        return None
    return BufferedParams(s1=s1, w1=w, k1=k1, s2=s2, w2=w, k2=k2)


def buffered_shuffle(arr: np.ndarray, seed: int = 0, params: BufferedParams | None = None,
                     threads: int | None = None, backend: str | None = None,
                     ledger=None) -> dict:
    """Two-stage in-place shuffle; falls back to the parallel variant when
    the array is too small to host the stage buffers."""
    n = len(arr)
    stats = {"fallback": False, "stage1_ids": 0, "stage2_ids": 0}
    if n <= 1:
        return stats
    if params is None:
        params = plan_buffered(n)
    if params is None or params.suffix_cells + 1 > n or params.prefix_cells > n - params.suffix_cells:
        stats["fallback"] = True
        parallel_knuth_shuffle(arr, seed, threads=threads, backend=backend, ledger=ledger)
        return stats

    be = get_backend(backend)
    threads = threads or default_threads()
    prefix = n - params.suffix_cells
    wbits = 64 if params.heap_workspace else min(params.w1, params.w2)
    if (1 << wbits) <= n + 2 and not params.heap_workspace:
        raise ContractViolation("buffer word size too narrow for reservation ids")

    # Stage 1: suffix buffer lends the reservation table; prefix ids processed.
    buf1 = RestorableBuffer(arr, aux_start=prefix, aux_len=params.s1,
                            word_bits=params.w1)
    buf1.init()
    cap1 = _table_cap(params.k1, staged=False)
    if params.heap_workspace:
        wk1 = np.zeros(3 * cap1 + params.k1, dtype=np.uint64)
        wk1_base = 0
        if ledger is not None:
            ledger.add_heap(len(wk1))
    else:
        if 3 * cap1 + params.k1 > params.s1:
            raise ContractViolation("stage-1 buffer cannot host its reservation table")
        wk1, wk1_base = arr, prefix
    hi = prefix - 1
    while hi >= 0:
        lo = max(0, hi - params.k1 + 1)
        be.knuth_chunk_rounds(arr, lo, hi, seed, wk1, wk1_base,
                              64 if params.heap_workspace else params.w1, cap1, threads)
        hi = lo - 1
    buf1.restore()
    stats["stage1_ids"] = prefix

    # Stage 2: adjustable buffer in the prefix; remaining ids processed with
    # simulated and bit-preserving accesses, then pairs randomized.
    buf2 = RestorableBuffer(arr, aux_start=0, aux_len=params.s2,
                            word_bits=params.w2, adjustable=True)
    buf2.init()
    cap2 = _table_cap(params.k2, staged=True)
    if params.heap_workspace:
        wk2 = np.zeros(3 * cap2 + params.k2, dtype=np.uint64)
        wk2_base = 0
        if ledger is not None:
            ledger.add_heap(len(wk2))
    else:
        if 3 * cap2 + params.k2 > params.s2:
            raise ContractViolation("stage-2 buffer cannot host its reservation table")
        wk2, wk2_base = arr, 0
    hi = n - 1
    while hi >= prefix:
        lo = max(prefix, hi - params.k2 + 1)
        be.knuth_chunk_rounds(arr, lo, hi, seed, wk2, wk2_base,
                              64 if params.heap_workspace else params.w2, cap2, threads,
                              aux_lo=0, s2=params.s2, w2=params.w2)
        hi = lo - 1
    buf2.restore()
    be.uniform_encoder(arr, params.s2, params.w2 * params.s2, seed, 1, threads)
    stats["stage2_ids"] = n - prefix
    return stats


def shuffle(arr: np.ndarray, variant: str = "parallel", seed: int = 0, chunk: int | None = None,
            threads: int | None = None, backend: str | None = None, ledger=None):
    """Entry point used by the CLI: variant in {parallel, chunked, buffered}."""
    if variant == "parallel":
        return parallel_knuth_shuffle(arr, seed, threads=threads, backend=backend, ledger=ledger)
    if variant == "chunked":
        k = chunk or max(1, len(arr) // max(1, (max(2, len(arr)).bit_length()) ** 2))
        return chunked_shuffle(arr, k, seed, threads=threads, backend=backend, ledger=ledger)
    if variant == "buffered":
        return buffered_shuffle(arr, seed, threads=threads, backend=backend, ledger=ledger)
    raise ContractViolation(f"unknown shuffle variant {variant!r}")
