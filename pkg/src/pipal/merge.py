"""Work-efficient parallel in-place merge of two adjacent sorted arrays.

The storage is cut into blocks of size b, each donating stolen bits for its
own bookkeeping.  The pipeline: per-block metadata (rank, end-sorted
position, inversion pointer) via concurrent binary searches, an end-merge
that moves blocks to endpoint order with randomized symmetry breaking, and
a divide-and-conquer sort phase that clears the at-most-one remaining
inversion per block.  Auxiliary heap stays O(b): two shadow blocks absorb
non-divisible input sizes via sentinel padding, and the sort phase merges
block pairs in task-local scratch.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import encoding
from ._backend import get_backend
from .config import verify_enabled
from .errors import ContractViolation

MASK64 = (1 << 64) - 1

# Optimization switches (off by default; benchmarks turn them on).
DEFAULT_OPTS = dict(precoined=False, round_cap=False, cache_targets=False)


def default_block_size(total: int) -> int:
    """Even block size with room for four index fields plus three flag bits."""
    return 8 * max(4, total.bit_length()) + 8


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


@dataclass
class MergeLayout:
    """Geometry of the blocked view: sizes, split point, field widths."""

    b: int
    s: int
    lbits: int
    coin_width: int
    raw_left: int
    n_blocks: int
    n_left_blocks: int
    pad_lo: int
    pad_hi: int

    @property
    def left_fields(self):
        fields = [("inv", self.lbits), ("rank", self.lbits), ("idx", self.lbits), ("swap", 1)]
        if self.raw_left:
            fields.append(("tbak", self.lbits))
        return tuple(fields)

    @property
    def right_fields(self):
        return (("tpos", self.lbits), ("coin", self.coin_width), ("done", 1))


def plan_layout(n: int, m: int, b: int, precoined: bool, cache_targets: bool) -> MergeLayout:
    """Derive and validate the block geometry for sides of size n and m."""
    if b % 2 or b < 8:
        raise ContractViolation("block size must be even and at least 8")
    p = (b - n % b) % b
    q = (b - m % b) % b
    total = p + n + m + q
    nb = total // b
    na = (p + n) // b
    lbits = max(1, (nb - 1).bit_length())
    cw = 32 if precoined else 1
    rawl = 1 if cache_targets else 0
    s = b - (2 * (lbits + cw + 1) + 1)
    layout = MergeLayout(b, s, lbits, cw, rawl, nb, na, p, q)
    if s < 2:
        raise ContractViolation(f"block size {b} cannot host the right-side fields")
    # Budget validation: the named fields must fit each side, with the final
    # block cell excluded from encoding.
    encoding.BlockLayout(block_size=s, raw_cells=rawl, fields=layout.left_fields)
    encoding.BlockLayout(block_size=b - s - 1, raw_cells=0, fields=layout.right_fields)
    return layout


@dataclass
class MergePlan:
    """A prepared in-place merge: storage, shadows, geometry, scratch."""

    arr: np.ndarray
    split: int
    layout: MergeLayout
    seed: int
    threads: int
    opts: dict
    sh_lo: np.ndarray = field(default=None, repr=False)
    sh_hi: np.ndarray = field(default=None, repr=False)
    flag: np.ndarray = field(default=None, repr=False)
    scratch: np.ndarray = field(default=None, repr=False)
    backend: object = None
    heap_words: int = 0
    scratch_words: int = 0

    def _kargs(self):
        lay = self.layout
        return (self.arr, self.sh_lo, self.sh_hi, lay.pad_lo, lay.pad_hi, lay.b,
                lay.s, lay.lbits, lay.coin_width, lay.raw_left, lay.n_blocks,
                lay.n_left_blocks)

    # -- storage resolution for tests and field inspection ----------------

    def block_storage(self, i: int):
        lay = self.layout
        if i == 0 and lay.pad_lo:
            return self.sh_lo, 0
        if i == lay.n_blocks - 1 and lay.pad_hi:
            return self.sh_hi, 0
        return self.arr, i * lay.b - lay.pad_lo

    def block_copy(self, i: int) -> np.ndarray:
        buf, base = self.block_storage(i)
        return buf[base : base + self.layout.b].copy()

    def endpoint(self, i: int) -> int:
        buf, base = self.block_storage(i)
        return int(buf[base + self.layout.b - 1])

    def read_field(self, i: int, name: str) -> int:
        lay = self.layout
        buf, base = self.block_storage(i)
        region = encoding.EncodedRegion(buf, base, lay.b)
        if name in ("inv", "rank", "idx", "swap", "tbak"):
            bl = encoding.BlockLayout(lay.s, lay.raw_left, lay.left_fields)
            return encoding.read_field(region, bl, 0, name)
        bl = encoding.BlockLayout(lay.b - lay.s - 1, 0, lay.right_fields)
        lo, hi = bl.cell_range(name)
        return encoding.read_block(region, lay.s + lo, lay.s + hi)


def sentinel_ranges(b: int) -> tuple[int, int]:
    """Keys below b or in the top b values are reserved for padding sentinels."""
    return b, (1 << 64) - b


def plan_merge(arr: np.ndarray, split: int, block_size: int | None = None,
               seed: int = 0, threads: int | None = None, backend: str | None = None,
               **opts) -> MergePlan:
    """Prepare an in-place merge of arr[:split] and arr[split:]."""
    if arr.dtype != np.uint64 or arr.ndim != 1:
        raise ContractViolation("merge operates on 1-D uint64 storage")
    if not 0 <= split <= len(arr):
        raise ContractViolation("split outside the array")
    options = dict(DEFAULT_OPTS)
    options.update(opts)
    n, m = split, len(arr) - split
    b = block_size or default_block_size(n + m)
    layout = plan_layout(n, m, b, options["precoined"], bool(options["cache_targets"]))
    plan = MergePlan(arr, split, layout, seed, threads or default_threads(),
                     options, backend=get_backend(backend))

    if verify_enabled():
        if layout.pad_lo or layout.pad_hi:
            lo_res, hi_res = sentinel_ranges(b)
            if int(arr.min()) < lo_res or int(arr.max()) >= hi_res:
                raise ContractViolation("keys collide with reserved sentinel ranges")
        if len(arr) and len(np.unique(arr)) != len(arr):
            raise ContractViolation("merge requires pairwise distinct keys")
        if np.any(arr[: split][1:] <= arr[: split][:-1]) or np.any(arr[split:][1:] <= arr[split:][:-1]):
            raise ContractViolation("both sides must be strictly increasing")

    p, q = layout.pad_lo, layout.pad_hi
    if p:
        plan.sh_lo = np.empty(b, dtype=np.uint64)
        plan.sh_lo[:p] = np.arange(p, dtype=np.uint64)
        plan.sh_lo[p:] = arr[: b - p]
        plan.heap_words += b
    else:
        plan.sh_lo = np.empty(0, dtype=np.uint64)
    if q:
        plan.sh_hi = np.empty(b, dtype=np.uint64)
        plan.sh_hi[: b - q] = arr[len(arr) - (b - q) :]
        plan.sh_hi[b - q :] = np.uint64((1 << 64) - q) + np.arange(q, dtype=np.uint64)
        plan.heap_words += b
    else:
        plan.sh_hi = np.empty(0, dtype=np.uint64)
    plan.flag = np.zeros(1, dtype=np.uint64)
    plan.heap_words += 1
    plan.scratch = np.empty(plan.threads * 2 * b, dtype=np.uint64)
    plan.scratch_words += plan.threads * 2 * b
    return plan


def finish_plan(plan: MergePlan) -> None:
    """Copy the shadow blocks' real cells back into the array."""
    lay = plan.layout
    b, p, q = lay.b, lay.pad_lo, lay.pad_hi
    if p:
        plan.arr[: b - p] = plan.sh_lo[p:]
    if q:
        plan.arr[len(plan.arr) - (b - q) :] = plan.sh_hi[: b - q]


# -- spec-level operations ----------------------------------------------


def compute_block_metadata(plan: MergePlan) -> None:
    plan.backend.merge_meta(*plan._kargs(), plan.threads)


def end_merge(plan: MergePlan) -> int:
    lay = plan.layout
    cap = 3 * max(1, (lay.n_blocks - 1).bit_length()) if plan.opts["round_cap"] else 0
    return plan.backend.end_merge(*plan._kargs(), plan.seed, plan.threads, plan.flag,
                                  1 if plan.opts["precoined"] else 0, cap,
                                  1 if plan.opts["cache_targets"] else 0)


def done(plan: MergePlan) -> bool:
    return bool(plan.backend.done_check(*plan._kargs(), plan.flag))


def separate(plan: MergePlan, lo: int, hi: int) -> None:
    if hi - lo < 2:
        raise ContractViolation("separate needs a slice of at least two blocks")
    plan.backend.separate_slice(*plan._kargs(), lo, hi, plan.scratch[: 2 * plan.layout.b])


def seq_sort(plan: MergePlan, lo: int, hi: int) -> None:
    """Recursive sort phase over block slice [lo, hi) (drives the kernel's
    separate; the merge driver uses the flat kernel variant instead)."""
    k = hi - lo
    if k <= 0:
        return
    if k == 1:
        reset_block(plan, lo)
        return
    separate(plan, lo, hi)
    seq_sort(plan, lo, lo + k // 2)
    seq_sort(plan, lo + k // 2, hi)


def reset_block(plan: MergePlan, i: int) -> None:
    buf, base = plan.block_storage(i)
    lay = plan.layout
    region = encoding.EncodedRegion(buf, base, lay.b)
    lp_hi = lay.s - ((lay.s - lay.raw_left) & 1)
    encoding.reset_pairs(region, lay.raw_left, lp_hi)
    rp_hi = lay.b - 1 - ((lay.b - 1 - lay.s) & 1)
    encoding.reset_pairs(region, lay.s, rp_hi)


def merge(arr: np.ndarray, split: int, block_size: int | None = None, seed: int = 0,
          threads: int | None = None, backend: str | None = None, ledger=None,
          **opts) -> dict:
    """Sort arr in place given that arr[:split] and arr[split:] are sorted.

    Returns run statistics (rounds, block size, pad sizes).  Auxiliary heap
    is bounded by the two shadow blocks plus one flag word; the sort phase
    uses threads * 2b words of task-local scratch.
    """
    n, m = split, len(arr) - split
    stats = {"rounds": 0, "block": 0, "pad_lo": 0, "pad_hi": 0, "small_path": False}
    if n == 0 or m == 0:
        return stats
    b = block_size or default_block_size(n + m)
    if n + m <= 4 * b:
        # The whole input fits the O(b) allocation budget: sort it in scratch.
        if ledger is not None:
            ledger.add_heap(n + m)
        arr[...] = np.sort(arr)
        stats["small_path"] = True
        if verify_enabled() and np.any(arr[1:] <= arr[:-1]):
            raise ContractViolation("duplicate keys detected during merge")
        return stats
    plan = plan_merge(arr, split, b, seed, threads, backend, **opts)
    if ledger is not None:
        ledger.add_heap(plan.heap_words)
        ledger.add_scratch(plan.scratch_words)
    compute_block_metadata(plan)
    stats["rounds"] = end_merge(plan)
    plan.backend.seq_sort_all(*plan._kargs(), plan.threads, plan.scratch)
    finish_plan(plan)
    stats.update(block=b, pad_lo=plan.layout.pad_lo, pad_hi=plan.layout.pad_hi)
    if verify_enabled() and np.any(arr[1:] <= arr[:-1]):
        raise ContractViolation("merge postcondition violated (duplicates in input?)")
    return stats
