"""Restorable and adjustable buffers.

A buffer converts a region of the input into constant-access scratch: the
low `word_bits` bits of each auxiliary element are backed up into pair
encodings further right, after which the auxiliary slots may serve as a
w-bit scratch word each.  Restoration puts the original low bits back.

Storage picture for B(s, w, l):

    [ aux: s cells | enc: 2*w*s cells ]
      ^ l            ^ l + s

Pair 2*(w*t + p) of the encoding part holds bit p of the element that
occupied aux slot t at init time.  Each aux slot splits into a low w-bit
lane (scratch, or the displaced element's low bits) and a high lane that
keeps the displaced element's remaining bits; scratch accessors never touch
the high lane, which is what makes restoration exact.

Adjustable buffers additionally support simulated access to the displaced
elements and order-preserving writes to encoding elements.  Simulated
operations and encoding-element writes must not overlap in time, and the
two members of a pair must never be written concurrently; both are caller
obligations (the shuffle enforces them with reservations and phase
barriers).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import verify_enabled
from .errors import ContractViolation, InvariantError

MASK64 = (1 << 64) - 1


@dataclass
class RestorableBuffer:
    arr: np.ndarray
    aux_start: int
    aux_len: int
    word_bits: int = 64
    adjustable: bool = False
    enc_start: int = field(init=False)
    enc_len: int = field(init=False)

    def __post_init__(self):
        s, w = self.aux_len, self.word_bits
        if s < 1 or not 1 <= w <= 64:
            raise ContractViolation("need aux_len >= 1 and 1 <= word_bits <= 64")
        self.enc_start = self.aux_start + s
        self.enc_len = 2 * w * s
        if self.aux_start < 0 or self.enc_start + self.enc_len > len(self.arr):
            raise ContractViolation("buffer layout exceeds the backing array")
        self._mask = MASK64 if w == 64 else (1 << w) - 1
        self._inv_mask = MASK64 ^ self._mask
        self._initialized = False
        self._busy = False

    @property
    def total_cells(self) -> int:
        """Input cells consumed: s + 2*w*s."""
        return self.aux_len + self.enc_len

    # -- region views ---------------------------------------------------

    def _aux(self) -> np.ndarray:
        return self.arr[self.aux_start : self.aux_start + self.aux_len]

    def _enc_pair_halves(self) -> tuple[np.ndarray, np.ndarray]:
        enc = self.arr[self.enc_start : self.enc_start + self.enc_len]
        return enc[0::2], enc[1::2]

    def _bit_matrix(self, values: np.ndarray) -> np.ndarray:
        shifts = np.arange(self.word_bits, dtype=np.uint64)
        return ((values[:, None] >> shifts) & np.uint64(1)).astype(bool)

    # -- lifecycle --------------------------------------------------------

    def init(self) -> None:
        """Back up the low w bits of every aux element into the encoding pairs."""
        if verify_enabled():
            enc = self.arr[self.enc_start : self.enc_start + self.enc_len]
            if len(np.unique(enc)) != self.enc_len:
                raise ContractViolation("encoding elements must be distinct")
        bits = self._bit_matrix(self._aux() & np.uint64(self._mask)).ravel()
        a, b = self._enc_pair_halves()
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        a[...] = np.where(bits, hi, lo)
        b[...] = np.where(bits, lo, hi)
        self._initialized = True

    def restore(self) -> None:
        """Decode the backup into each aux element's low w bits; re-sort pairs.

        Exact only if aux high bits were left alone since init, which the
        scratch accessors guarantee.  Pairs come back sorted ascending so
        the post-state is canonical, and a second restore without an
        intervening init is a no-op (idempotence).
        """
        if not self._initialized:
            return
        self._initialized = False
        a, b = self._enc_pair_halves()
        bits = (a > b).reshape(self.aux_len, self.word_bits)
        weights = np.uint64(1) << np.arange(self.word_bits, dtype=np.uint64)
        lows = np.bitwise_or.reduce(bits * weights, axis=1)
        aux = self._aux()
        aux[...] = (aux & np.uint64(self._inv_mask)) | lows
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        a[...] = lo
        b[...] = hi

    # -- scratch lane (the "auxiliary space" the buffer grants) -----------

    def scratch_read(self, t: int) -> int:
        return int(self._aux()[t] & np.uint64(self._mask))

    def scratch_write(self, t: int, v: int) -> None:
        if v >> self.word_bits:
            raise ContractViolation(f"scratch value {v} exceeds {self.word_bits} bits")
        aux = self._aux()
        aux[t] = (aux[t] & np.uint64(self._inv_mask)) | np.uint64(v)

    # -- simulated access to the displaced elements (adjustable only) -----

    def _require_adjustable(self):
        if not self.adjustable:
            raise ContractViolation("operation requires an adjustable buffer")

    def _enter(self):
        if self._busy:
            raise InvariantError("overlapping buffer operations detected")
        self._busy = True

    def _exit(self):
        self._busy = False

    def _slot_pairs(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        base = self.enc_start + 2 * self.word_bits * t
        pairs = self.arr[base : base + 2 * self.word_bits]
        return pairs[0::2], pairs[1::2]

    def sim_read(self, t: int) -> int:
        """The element that occupied aux slot t, as if it never moved."""
        self._require_adjustable()
        a, b = self._slot_pairs(t)
        shifts = np.arange(self.word_bits, dtype=np.uint64)
        low = int(np.bitwise_or.reduce(((a > b).astype(np.uint64) << shifts)))
        high = int(self._aux()[t]) & self._inv_mask
        return high | low

    def sim_write(self, t: int, v: int) -> None:
        """Overwrite the displaced element: low bits to pairs, high bits to the slot."""
        self._require_adjustable()
        self._enter()
        try:
            aux = self._aux()
            aux[t] = (aux[t] & np.uint64(self._mask)) | (np.uint64(v) & np.uint64(self._inv_mask))
            bits = self._bit_matrix(np.array([v & self._mask], dtype=np.uint64)).ravel()
            a, b = self._slot_pairs(t)
            lo = np.minimum(a, b)
            hi = np.maximum(a, b)
            a[...] = np.where(bits, hi, lo)
            b[...] = np.where(bits, lo, hi)
        finally:
            self._exit()

    def encoding_write(self, t: int, v: int) -> None:
        """Write v into encoding slot t, re-swapping its pair to keep the bit."""
        self._require_adjustable()
        if t < 0 or t >= self.enc_len:
            raise ContractViolation("encoding slot out of range")
        self._enter()
        try:
            c0 = self.enc_start + (t & ~1)
            partner = self.arr[c0 + 1] if t % 2 == 0 else self.arr[c0]
            if int(partner) == v:
                raise ContractViolation("write would duplicate the pair partner")
            bit_before = self.arr[c0] > self.arr[c0 + 1]
            self.arr[self.enc_start + t] = np.uint64(v)
            if (self.arr[c0] > self.arr[c0 + 1]) != bit_before:
                self.arr[c0], self.arr[c0 + 1] = self.arr[c0 + 1].copy(), self.arr[c0].copy()
        finally:
            self._exit()


# Spec-facing aliases.
def buffer_init(buf: RestorableBuffer) -> None:
    buf.init()


def buffer_restore(buf: RestorableBuffer) -> None:
    buf.restore()


def simulated_read(buf: RestorableBuffer, t: int) -> int:
    return buf.sim_read(t)


def simulated_write(buf: RestorableBuffer, t: int, v: int) -> None:
    buf.sim_write(t, v)


def encoding_write(buf: RestorableBuffer, t: int, v: int) -> None:
    buf.encoding_write(t, v)
