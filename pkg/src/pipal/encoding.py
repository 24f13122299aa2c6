"""Inversion-encoding primitives.

A region of pairwise-distinct 64-bit keys stores one stolen bit per
consecutive pair: the pair (x, y) encodes 0 when x < y and 1 otherwise.
Reading never modifies the region; writing only transposes elements within
a pair, so the element multiset is preserved by every operation.

On top of the raw pair codec this module provides named field layouts over
fixed-size blocks, and a permutation-rank codec that stores values in
{0, ..., k!-1} in the ordering of a k-element unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import verify_enabled
from .errors import ContractViolation


@dataclass
class EncodedRegion:
    """View over a flat uint64 array whose pair order carries stolen bits."""

    arr: np.ndarray
    base: int = 0
    length: int = -1

    def __post_init__(self):
        if self.length < 0:
            self.length = len(self.arr) - self.base
        if self.base < 0 or self.base + self.length > len(self.arr):
            raise ContractViolation("region exceeds the backing array")
        if self.arr.dtype != np.uint64:
            raise ContractViolation("regions require uint64 keys")
        if verify_enabled():
            window = self.arr[self.base : self.base + self.length]
            if len(np.unique(window)) != self.length:
                raise ContractViolation("region elements must be pairwise distinct")

    def view(self) -> np.ndarray:
        return self.arr[self.base : self.base + self.length]


def _check_range(region: EncodedRegion, i: int, j: int) -> None:
    if j <= i or (j - i) % 2 != 0:
        raise ContractViolation(f"pair range [{i}, {j}) must be nonempty and even")
    if i < 0 or j > region.length:
        raise ContractViolation("pair range outside region")


def read_block(region: EncodedRegion, i: int, j: int) -> int:
    """Decode the (j-i)/2 bits carried by pairs region[i:j]; bit t is pair t."""
    _check_range(region, i, j)
    a = region.arr[region.base + i : region.base + j : 2]
    b = region.arr[region.base + i + 1 : region.base + j : 2]
    bits = a > b
    v = 0
    for lo in range(0, len(bits), 64):
        chunk = bits[lo : lo + 64]
        shifts = np.arange(len(chunk), dtype=np.uint64)
        word = int(np.bitwise_or.reduce(chunk.astype(np.uint64) << shifts, initial=np.uint64(0)))
        v |= word << lo
    return v


def write_block(region: EncodedRegion, i: int, j: int, v: int) -> None:
    """Order pair t of region[i:j] descending iff bit t of v is set."""
    _check_range(region, i, j)
    width = (j - i) // 2
    if v < 0 or v >> width:
        raise ContractViolation(f"value {v} does not fit in {width} stolen bits")
    bits = np.empty(width, dtype=bool)
    for lo in range(0, width, 64):
        hi = min(lo + 64, width)
        word = np.uint64((v >> lo) & ((1 << (hi - lo)) - 1))
        bits[lo:hi] = (word >> np.arange(hi - lo, dtype=np.uint64)) & np.uint64(1)
    a = region.arr[region.base + i : region.base + j : 2]
    b = region.arr[region.base + i + 1 : region.base + j : 2]
    lo_vals = np.minimum(a, b)
    hi_vals = np.maximum(a, b)
    a[...] = np.where(bits, hi_vals, lo_vals)
    b[...] = np.where(bits, lo_vals, hi_vals)


def reset_pairs(region: EncodedRegion, i: int, j: int) -> None:
    """Sort every pair of region[i:j] ascending (encode all-zero bits)."""
    write_block(region, i, j, 0)


@dataclass(frozen=True)
class BlockLayout:
    """Maps named fields to consecutive pair ranges inside fixed-size blocks.

    The first `raw_cells` cells of each block are excluded from pair
    encoding (they may be overwritten with plain values); fields then claim
    2*bit_width cells each, in declaration order.
    """

    block_size: int
    raw_cells: int
    fields: tuple[tuple[str, int], ...]
    _offsets: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        offsets = {}
        pair_off = 0
        for name, width in self.fields:
            if width <= 0:
                raise ContractViolation(f"field {name!r} must have positive width")
            if name in offsets:
                raise ContractViolation(f"duplicate field {name!r}")
            offsets[name] = (pair_off, width)
            pair_off += width
        if self.raw_cells < 0 or self.raw_cells + 2 * pair_off > self.block_size:
            raise ContractViolation(
                f"layout needs {self.raw_cells} raw cells + {2 * pair_off} encoded cells"
                f" but blocks have only {self.block_size}"
            )
        object.__setattr__(self, "_offsets", offsets)

    def cell_range(self, name: str) -> tuple[int, int]:
        """Cell range of a field relative to its block start."""
        if name not in self._offsets:
            raise ContractViolation(f"unknown field {name!r}")
        off, width = self._offsets[name]
        start = self.raw_cells + 2 * off
        return start, start + 2 * width

    def width(self, name: str) -> int:
        return self._offsets[name][1]

    @property
    def encoded_cells(self) -> int:
        return 2 * sum(w for _, w in self.fields)


def read_field(region: EncodedRegion, layout: BlockLayout, block_index: int, name: str) -> int:
    lo, hi = layout.cell_range(name)
    base = block_index * layout.block_size
    return read_block(region, base + lo, base + hi)


def write_field(region: EncodedRegion, layout: BlockLayout, block_index: int, name: str, v: int) -> None:
    lo, hi = layout.cell_range(name)
    if v >> layout.width(name):
        raise ContractViolation(f"value {v} overflows field {name!r}")
    base = block_index * layout.block_size
    write_block(region, base + lo, base + hi, v)


# --- permutation-rank codec -------------------------------------------------

MAX_UNIT = 20  # 20! still fits in an unsigned 64-bit word


@dataclass(frozen=True)
class PermUnit:
    """Unit size k with its factorial table (k! must fit a machine word)."""

    k: int
    factorial_table: tuple[int, ...] = ()

    def __post_init__(self):
        if not 2 <= self.k <= MAX_UNIT:
            raise ContractViolation(f"unit size must be in [2, {MAX_UNIT}]")
        table = tuple(math.factorial(i) for i in range(self.k + 1))
        object.__setattr__(self, "factorial_table", table)


def _check_perm(pi) -> list[int]:
    pi = list(int(x) for x in pi)
    k = len(pi)
    if k < 1 or sorted(pi) != list(range(1, k + 1)):
        raise ContractViolation("input is not a permutation of 1..k")
    return pi


def perm_rank(pi) -> int:
    """Rank of a permutation of 1..k, evaluated by the defining recurrence.

    r([p1, rest]) = (p1 - 1) * (k-1)! + r(rest'), where rest' relabels the
    remaining values onto 1..k-1.  Quadratic on purpose: the loop mirrors
    the recurrence step by step.
    """
    work = _check_perm(pi)
    k = len(work)
    fact = [math.factorial(i) for i in range(k)]
    r = 0
    for step in range(k - 1):
        first = work[0]
        r += (first - 1) * fact[k - 1 - step]
        work = [x - 1 if x > first else x for x in work[1:]]
    return r


def perm_unrank(r: int, k: int) -> list[int]:
    """Inverse of perm_rank: the permutation of 1..k with rank r."""
    if k < 1 or k > MAX_UNIT:
        raise ContractViolation(f"unit size must be in [1, {MAX_UNIT}]")
    if r < 0 or r >= math.factorial(k):
        raise ContractViolation(f"rank {r} out of range for k={k}")
    if k == 1:
        return [1]
    fact = math.factorial(k - 1)
    first = r // fact + 1
    rest = perm_unrank(r % fact, k - 1)
    return [first] + [x + 1 if x >= first else x for x in rest]


def _check_unit(unit: np.ndarray) -> int:
    k = len(unit)
    if not 2 <= k <= MAX_UNIT:
        raise ContractViolation(f"unit size must be in [2, {MAX_UNIT}]")
    if len(np.unique(unit)) != k:
        raise ContractViolation("unit elements must be distinct")
    return k


def unit_read(unit: np.ndarray) -> int:
    """Recover the value stored in a unit's ordering.

    Simulates a sort: element i's 1-based rank among the unit's elements is
    the permutation listing, whose rank is the stored value.
    """
    k = _check_unit(unit)
    order = np.argsort(unit, kind="stable")
    listing = np.empty(k, dtype=np.int64)
    listing[order] = np.arange(1, k + 1)
    return perm_rank(listing.tolist())


def unit_write(unit: np.ndarray, v: int) -> None:
    """Store v in {0, ..., k!-1} by rearranging the unit's k distinct elements."""
    k = _check_unit(unit)
    pi = perm_unrank(v, k)
    s = np.sort(unit)
    unit[...] = s[np.asarray(pi) - 1]
