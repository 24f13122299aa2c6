"""Pure-Python kernel backend.

Implements the same kernel surface as the compiled extension (pipal._core):
the merge block pipeline, the shuffle reservation rounds, and the graph
oracle build/search loops.  Loops here run sequentially; the algorithms'
phase structure makes sequential execution produce the same state as the
parallel schedule, so this backend is the semantic twin used for
cross-checking and as the import-time fallback.

Layout conventions shared with the compiled core
------------------------------------------------
Merge blocks of size b split at cell s into a left side [0, s) and a right
side [s, b).  With L the field bit width, cw the coin field width and rawl
the count of leading raw cells (1 when target caching is on):

    left pairs:   inv @ rawl, rank @ rawl+2L, idx @ rawl+4L, swapflag @ rawl+6L
                  tbak @ rawl+6L+2 (target-cache backup, cache mode only)
    right pairs:  tpos @ s, coin @ s+2L, done @ s+2L+2cw
    the final cell of each block is never encoded.

Virtual blocks: the caller splices sentinel padding into two shadow blocks;
block 0 lives in `sh_lo` when p > 0, block N-1 in `sh_hi` when q > 0, and
every other block i occupies arr[i*b - p : (i+1)*b - p].
"""

from __future__ import annotations

import numpy as np

from ._rng import (
    TAG_ENCODER,
    TAG_GRAPH_CENTER,
    TAG_GRAPH_COIN,
    TAG_MERGE_COIN,
    TAG_MERGE_PRECOIN,
    coin,
    mix64,
    shuffle_target,
)
from .errors import InvariantError

NAME = "python"


# --------------------------------------------------------------------------
# shared helpers (block storage resolution and pair-encoded field access)
# --------------------------------------------------------------------------


def _blk(arr, sh_lo, sh_hi, p, q, b, nb, i):
    """Storage (buffer, base) of virtual block i."""
    if i == 0 and p:
        return sh_lo, 0
    if i == nb - 1 and q:
        return sh_hi, 0
    return arr, i * b - p


def _rd(buf, base, off, width):
    v = 0
    for t in range(width):
        if buf[base + off + 2 * t] > buf[base + off + 2 * t + 1]:
            v |= 1 << t
    return v


def _wr(buf, base, off, width, v):
    for t in range(width):
        c0 = base + off + 2 * t
        x, y = buf[c0], buf[c0 + 1]
        if (v >> t) & 1:
            buf[c0], buf[c0 + 1] = max(x, y), min(x, y)
        else:
            buf[c0], buf[c0 + 1] = min(x, y), max(x, y)


def _sort_pairs(buf, base, lo, hi):
    """Sort every pair in cells [lo, hi) ascending ((hi - lo) even)."""
    for c0 in range(base + lo, base + hi, 2):
        if buf[c0] > buf[c0 + 1]:
            buf[c0], buf[c0 + 1] = buf[c0 + 1], buf[c0]


class _MergeCtx:
    """Unpacked merge-kernel geometry; mirrors the compiled core's scalars."""

    __slots__ = (
        "arr", "sh_lo", "sh_hi", "p", "q", "b", "s", "L", "cw",
        "rawl", "nb", "na", "off_inv", "off_r", "off_i", "off_e",
        "off_tbak", "off_t", "off_c", "off_d",
    )

    def __init__(self, arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na):
        self.arr, self.sh_lo, self.sh_hi = arr, sh_lo, sh_hi
        self.p, self.q, self.b, self.s, self.L, self.cw = p, q, b, s, L, cw
        self.rawl, self.nb, self.na = rawl, nb, na
        self.off_inv = rawl
        self.off_r = rawl + 2 * L
        self.off_i = rawl + 4 * L
        self.off_e = rawl + 6 * L
        self.off_tbak = rawl + 6 * L + 2
        self.off_t = s
        self.off_c = s + 2 * L
        self.off_d = s + 2 * L + 2 * cw

    def blk(self, i):
        return _blk(self.arr, self.sh_lo, self.sh_hi, self.p, self.q, self.b, self.nb, i)

    def endpoint(self, i):
        buf, base = self.blk(i)
        return int(buf[base + self.b - 1])

    def rd(self, i, off, width):
        buf, base = self.blk(i)
        return _rd(buf, base, off, width)

    def wr(self, i, off, width, v):
        buf, base = self.blk(i)
        _wr(buf, base, off, width, v)


def _coin_bit(ctx, i, rnd, seed, precoined):
    if precoined:
        buf, base = ctx.blk(i)
        c0 = base + ctx.off_c + 2 * (rnd & 31)
        return 1 if buf[c0] > buf[c0 + 1] else 0
    return ctx.rd(i, ctx.off_c, 1)


def _read_tpos(ctx, i, cache_targets):
    if cache_targets:
        buf, base = ctx.blk(i)
        return int(buf[base]) & ((1 << ctx.L) - 1)
    return ctx.rd(i, ctx.off_t, ctx.L)


# --------------------------------------------------------------------------
# merge kernels
# --------------------------------------------------------------------------


def merge_meta(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na, threads):
    """Compute and encode rank, end-sorted position and inversion pointer."""
    ctx = _MergeCtx(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na)
    n_opp = [nb - na, na]  # opposite-sequence block counts for A-side, B-side

    def opp_endpoint(side_a, j):
        return ctx.endpoint(na + j) if side_a else ctx.endpoint(j)

    for i in range(nb):
        side_a = i < na
        local = i if side_a else i - na
        e = ctx.endpoint(i)
        # rank: number of opposite endpoints smaller than ours
        lo, hi = 0, n_opp[0] if side_a else n_opp[1]
        while lo < hi:
            mid = (lo + hi) // 2
            if opp_endpoint(side_a, mid) < e:
                lo = mid + 1
            else:
                hi = mid
        r = lo
        tpos = local + r
        if r == (n_opp[0] if side_a else n_opp[1]):
            inv = nb - 1  # no later opposite block; clamp-neutral
        else:
            e2 = opp_endpoint(side_a, r)
            # position of that opposite block = its local index + its own rank
            lo2, hi2 = 0, na if side_a else nb - na
            while lo2 < hi2:
                mid = (lo2 + hi2) // 2
                own_e = ctx.endpoint(mid) if side_a else ctx.endpoint(na + mid)
                if own_e < e2:
                    lo2 = mid + 1
                else:
                    hi2 = mid
            inv = r + lo2
        ctx.wr(i, ctx.off_r, L, r)
        ctx.wr(i, ctx.off_t, L, tpos)
        ctx.wr(i, ctx.off_inv, L, inv)


def _swap_cells(ctx, i, j, lo, hi):
    bi, basei = ctx.blk(i)
    bj, basej = ctx.blk(j)
    vi = bi[basei + lo : basei + hi]
    vj = bj[basej + lo : basej + hi]
    tmp = vi.copy()
    vi[...] = vj
    vj[...] = tmp


def done_check(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na, flag):
    ctx = _MergeCtx(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na)
    flag[0] = 1
    for i in range(nb):
        if ctx.rd(i, ctx.off_d, 1) == 0:
            flag[0] = 0
    return int(flag[0])


def _cycle_leader_finish(ctx, cache_targets):
    """Place all still-active blocks by sequential cycle rotations.

    Pass one marks every active block that sees a smaller index on its
    cycle; pass two lets each cycle's minimum-index block rotate the whole
    cycle with a single block-sized buffer.
    """
    b = ctx.b
    for i in range(ctx.nb):
        if ctx.rd(i, ctx.off_d, 1):
            continue
        j = _read_tpos(ctx, i, cache_targets)
        while j != i:
            if j < i:
                ctx.wr(i, ctx.off_e, 1, 1)
                break
            j = _read_tpos(ctx, j, cache_targets)
    buf = np.empty(b, dtype=np.uint64)
    for i in range(ctx.nb):
        if ctx.rd(i, ctx.off_d, 1) or ctx.rd(i, ctx.off_e, 1):
            continue
        bi, basei = ctx.blk(i)
        buf[...] = bi[basei : basei + b]
        cur = _rd(buf, 0, ctx.off_t, ctx.L) if not cache_targets else int(buf[0]) & ((1 << ctx.L) - 1)
        while cur != i:
            bc, basec = ctx.blk(cur)
            view = bc[basec : basec + b]
            tmp = view.copy()
            view[...] = buf
            buf[...] = tmp
            ctx.wr(cur, ctx.off_d, 1, 1)
            ctx.wr(cur, ctx.off_e, 1, 0)
            cur = _rd(buf, 0, ctx.off_t, ctx.L) if not cache_targets else int(buf[0]) & ((1 << ctx.L) - 1)
        bi[basei : basei + b] = buf
        ctx.wr(i, ctx.off_d, 1, 1)
        ctx.wr(i, ctx.off_e, 1, 0)


def end_merge(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na, seed, threads,
              flag, precoined, round_cap, cache_targets):
    """Move every block to its end-sorted position; returns coin rounds used."""
    ctx = _MergeCtx(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na)
    mask_l = (1 << L) - 1

    for i in range(nb):
        ctx.wr(i, ctx.off_e, 1, 0)
        tpos = ctx.rd(i, ctx.off_t, L)
        ctx.wr(i, ctx.off_d, 1, 1 if tpos == i else 0)
        if precoined:
            ctx.wr(i, ctx.off_c, cw, mix64(seed, TAG_MERGE_PRECOIN, i) & ((1 << cw) - 1))
        if cache_targets:
            buf, base = ctx.blk(i)
            _wr(buf, base, ctx.off_tbak, L, int(buf[base]) & mask_l)
            buf[base] = (int(buf[base]) & ~mask_l & 0xFFFFFFFFFFFFFFFF) | tpos

    rounds = 0
    while not done_check(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na, flag):
        if round_cap and rounds >= round_cap:
            _cycle_leader_finish(ctx, cache_targets)
            break
        # coin flips
        if not precoined:
            for i in range(nb):
                if ctx.rd(i, ctx.off_d, 1) == 0:
                    ctx.wr(i, ctx.off_c, 1, coin(seed, TAG_MERGE_COIN, i, rounds))
        # left swaps: read right sides, write left sides (plus own done flag)
        for i in range(nb):
            if ctx.rd(i, ctx.off_d, 1):
                continue
            if _coin_bit(ctx, i, rounds, seed, precoined) != 1:
                continue
            tpos = _read_tpos(ctx, i, cache_targets)
            if _coin_bit(ctx, tpos, rounds, seed, precoined) != 0:
                continue
            ctx.wr(i, ctx.off_d, 1, 1)
            ctx.wr(i, ctx.off_e, 1, 1)
            ctx.wr(i, ctx.off_i, L, i)
            _swap_cells(ctx, i, tpos, 0, s)
        # right swaps: read left sides, complete the block exchange
        for j in range(nb):
            if ctx.rd(j, ctx.off_e, 1) == 0:
                continue
            i0 = ctx.rd(j, ctx.off_i, L)
            ctx.wr(j, ctx.off_e, 1, 0)
            if ctx.rd(j, ctx.off_t, L) == i0:
                # two-cycle: the right side moving to i0 belongs to a block
                # that just landed in its end-sorted position
                ctx.wr(j, ctx.off_d, 1, 1)
            _swap_cells(ctx, i0, j, s, b)
        rounds += 1

    if cache_targets:
        for i in range(nb):
            buf, base = ctx.blk(i)
            low = _rd(buf, base, ctx.off_tbak, L)
            buf[base] = (int(buf[base]) & ~mask_l & 0xFFFFFFFFFFFFFFFF) | low
            _sort_pairs(buf, base, ctx.off_tbak, ctx.off_tbak + 2 * L)
    return rounds


def _left_pairs_end(ctx):
    return ctx.off_tbak + 2 * ctx.L if ctx.rawl else ctx.off_e + 2


def _reset_block(ctx, i):
    buf, base = ctx.blk(i)
    lp_hi = ctx.s - ((ctx.s - ctx.rawl) & 1)
    _sort_pairs(buf, base, ctx.rawl, lp_hi)
    rp_hi = ctx.b - 1 - ((ctx.b - 1 - ctx.s) & 1)
    _sort_pairs(buf, base, ctx.s, rp_hi)


def separate_slice(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na, lo, hi, scratch):
    """Eliminate the potential inversion across the midpoint of [lo, hi)."""
    ctx = _MergeCtx(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na)
    k = hi - lo
    i = lo + k // 2 - 1
    inv_i = ctx.rd(i, ctx.off_inv, L)
    j = min(hi - 1, inv_i)
    if j <= i:
        return
    inv_j = ctx.rd(j, ctx.off_inv, L)
    bi, basei = ctx.blk(i)
    bj, basej = ctx.blk(j)
    scratch[0:b] = bi[basei : basei + b]
    scratch[b : 2 * b] = bj[basej : basej + b]
    for base in (0, b):
        lp_hi = s - ((s - rawl) & 1)
        _sort_pairs(scratch, base, rawl, lp_hi)
        rp_hi = b - 1 - ((b - 1 - s) & 1)
        _sort_pairs(scratch, base, s, rp_hi)
    # two-finger merge of the two sorted copies back into the blocks
    ia, ib_ = 0, b
    for out in range(2 * b):
        if ia < b and (ib_ == 2 * b or scratch[ia] < scratch[ib_]):
            v = scratch[ia]
            ia += 1
        else:
            v = scratch[ib_]
            ib_ += 1
        if out < b:
            bi[basei + out] = v
        else:
            bj[basej + out - b] = v
    ctx.wr(i, ctx.off_inv, L, inv_i)
    ctx.wr(j, ctx.off_inv, L, inv_j)


# --------------------------------------------------------------------------
# shuffle kernels
# --------------------------------------------------------------------------
#
# Reservation workspace layout (slot units, masked to wk_bits):
#   keys    [0, cap)      array index + 1, 0 = empty; persist within a chunk
#   vals    [cap, 2*cap)  highest reserving swap id + 1; zeroed per round by
#                         an explicit cleanup pass over the round's swaps
#   pending [2*cap, 2*cap+k)
# cap is a power of two.  The workspace may alias the input array (buffer
# scratch lanes); all slot access masks to the low wk_bits.


class _Workspace:
    def __init__(self, arr, base, bits, cap):
        self.arr, self.base, self.cap = arr, base, cap
        self.mask = (1 << bits) - 1 if bits < 64 else (1 << 64) - 1
        self.inv = ((1 << 64) - 1) ^ self.mask

    def rd(self, t):
        return int(self.arr[self.base + t]) & self.mask

    def wr(self, t, v):
        a = self.arr
        a[self.base + t] = (int(a[self.base + t]) & self.inv) | v

    def clear_table(self):
        for t in range(2 * self.cap):
            self.wr(t, 0)

    def slot_of(self, key):
        h = (key + 1) * 0x9E3779B97F4A7C15 & 0xFFFFFFFFFFFFFFFF
        i = (h ^ (h >> 29)) & (self.cap - 1)
        while True:
            k0 = self.rd(i)
            if k0 == key + 1:
                return i
            if k0 == 0:
                self.wr(i, key + 1)
                return i
            i = (i + 1) & (self.cap - 1)

    def reserve(self, key, sid):
        i = self.slot_of(key)
        if self.rd(self.cap + i) < sid + 1:
            self.wr(self.cap + i, sid + 1)

    def holder(self, key):
        return self.rd(self.cap + self.slot_of(key)) - 1

    def release(self, key):
        self.wr(self.cap + self.slot_of(key), 0)


def _sim_read(arr, aux_lo, enc_lo, w2, mask2, t):
    base = enc_lo + 2 * w2 * t
    low = 0
    for pbit in range(w2):
        if arr[base + 2 * pbit] > arr[base + 2 * pbit + 1]:
            low |= 1 << pbit
    return (int(arr[aux_lo + t]) & ~mask2 & 0xFFFFFFFFFFFFFFFF) | low


def _sim_write(arr, aux_lo, enc_lo, w2, mask2, t, v):
    arr[aux_lo + t] = (int(arr[aux_lo + t]) & mask2) | (v & ~mask2 & 0xFFFFFFFFFFFFFFFF)
    base = enc_lo + 2 * w2 * t
    for pbit in range(w2):
        c0 = base + 2 * pbit
        x, y = arr[c0], arr[c0 + 1]
        if (v >> pbit) & 1:
            arr[c0], arr[c0 + 1] = max(x, y), min(x, y)
        else:
            arr[c0], arr[c0 + 1] = min(x, y), max(x, y)


def _enc_write_keep_bit(arr, enc_lo, cell, v):
    c0 = enc_lo + ((cell - enc_lo) & ~1)
    bit = arr[c0] > arr[c0 + 1]
    arr[cell] = v
    if (arr[c0] > arr[c0 + 1]) != bit:
        arr[c0], arr[c0 + 1] = arr[c0 + 1].copy(), arr[c0].copy()


def knuth_chunk_rounds(arr, r, hi, seed, wk_arr, wk_base, wk_bits, cap, threads,
                       aux_lo=-1, s2=0, w2=0):
    """Reservation rounds for swap ids [r, hi].  Returns the round count.

    With aux_lo >= 0 the staged variant runs: targets inside the adjustable
    buffer at aux_lo use simulated accesses (aux portion) or bit-preserving
    writes plus double reservation (encoding portion), and each round
    executes aux-portion swaps strictly before the others.
    """
    wk = _Workspace(wk_arr, wk_base, wk_bits, cap)
    wk.clear_table()
    k = hi - r + 1
    pend_off = 3 * cap
    for idx in range(k):
        wk.wr(pend_off + idx, hi - idx + 1)
    pcount = k
    mask2 = (1 << w2) - 1 if w2 else 0
    enc_lo = aux_lo + s2
    enc_hi = enc_lo + 2 * w2 * s2
    staged = aux_lo >= 0
    rounds = 0
    while pcount:
        for idx in range(pcount):
            sid = wk.rd(pend_off + idx) - 1
            h = shuffle_target(seed, sid)
            wk.reserve(sid, sid, rounds)
            if staged and enc_lo <= h < enc_hi:
                c0 = enc_lo + ((h - enc_lo) & ~1)
                wk.reserve(c0, sid, rounds)
                wk.reserve(c0 + 1, sid, rounds)
            else:
                wk.reserve(h, sid, rounds)

        def wins(sid, h):
            if wk.holder(sid, rounds) != sid:
                return False
            if staged and enc_lo <= h < enc_hi:
                c0 = enc_lo + ((h - enc_lo) & ~1)
                return wk.holder(c0, rounds) == sid and wk.holder(c0 + 1, rounds) == sid
            return wk.holder(h, rounds) == sid

        phases = ((True, False) if staged else (False,))
        for aux_phase in phases:
            for idx in range(pcount):
                v = wk.rd(pend_off + idx)
                if v == 0:
                    continue
                sid = v - 1
                h = shuffle_target(seed, sid)
                in_aux = staged and aux_lo <= h < enc_lo
                if staged and in_aux != aux_phase:
                    continue
                if not wins(sid, h):
                    continue
                if in_aux:
                    t = h - aux_lo
                    disp = _sim_read(arr, aux_lo, enc_lo, w2, mask2, t)
                    _sim_write(arr, aux_lo, enc_lo, w2, mask2, t, int(arr[sid]))
                    arr[sid] = disp
                elif staged and enc_lo <= h < enc_hi:
                    tmp = int(arr[h])
                    _enc_write_keep_bit(arr, enc_lo, h, arr[sid])
                    arr[sid] = tmp
                elif h != sid:
                    arr[sid], arr[h] = arr[h].copy(), arr[sid].copy()
                wk.wr(pend_off + idx, 0)
        out = 0
        for idx in range(pcount):
            v = wk.rd(pend_off + idx)
            if v:
                wk.wr(pend_off + out, v)
                out += 1
        pcount = out
        rounds += 1
    return rounds


def uniform_encoder(arr, enc_lo, npairs, seed, salt, threads):
    """Independently transpose each encoding pair with probability 1/2."""
    for t in range(npairs):
        if coin(seed, TAG_ENCODER, t, salt):
            c0 = enc_lo + 2 * t
            arr[c0], arr[c0 + 1] = arr[c0 + 1].copy(), arr[c0].copy()


def seq_sort_all(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na, threads, scratch):
    """Level-synchronous divide and conquer: all separations at one depth are
    independent, then every block's encoding is reset once at the end."""
    ctx = _MergeCtx(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl, nb, na)
    if nb >= 2:
        levels = (nb - 1).bit_length()
        for d in range(levels):
            for t in range(1 << d):
                lo, hi = 0, nb
                ok = True
                for bit in range(d - 1, -1, -1):
                    k = hi - lo
                    if k <= 1:
                        ok = False
                        break
                    mid = lo + k // 2
                    if (t >> bit) & 1:
                        lo = mid
                    else:
                        hi = mid
                if ok and hi - lo >= 2:
                    separate_slice(arr, sh_lo, sh_hi, p, q, b, s, L, cw, rawl,
                                   nb, na, lo, hi, scratch)
    for i in range(nb):
        _reset_block(ctx, i)


# --------------------------------------------------------------------------
# graph oracle kernels
# --------------------------------------------------------------------------
#
# CSR storage I of n + 4m + 1 words: I[0] = n, then one offset per vertex
# (the global 0-based entry index of its last neighbor entry), then 2m
# interleaved (neighbor, weight) entries, two words each.  Vertex labels
# are 1..n; entry g occupies words I[n+1+2g], I[n+2+2g].
#
# Codec block layout over the offset region (mode 2, block size b):
#   raw cells [0, 4): lock, edge source, edge target, edge weight
#   pairs:  center @0 (lv), parent @lv (lv), root flag @2lv, coin @2lv+1,
#           backups of the four raw offsets @2lv+2+r*loff (loff each)
# mode 1 (single block): no raw cells, center @0 (lv) only.
# mode 0: no codec at all (tiny graphs run centerless).

GSENT = (1 << 64) - 1


def _gdeg_bounds(I, n, j):
    """(first, last) global entry indices of vertex j+1, via offset_read."""
    last = goffset_read_raw(I, n, j)
    first = goffset_read_raw(I, n, j - 1) + 1 if j > 0 else 0
    return first, last


_GMETA = None  # (b, nb, lv, loff, mode) used by goffset_read_raw


def _gctx(b, nb, lv, loff, mode):
    global _GMETA
    _GMETA = (b, nb, lv, loff, mode)


def goffset_read_raw(I, n, j):
    """Original offset of A-cell j (0-based), whatever the codec did to it."""
    b, nb, lv, loff, mode = _GMETA
    if mode == 0:
        return int(I[1 + j])
    if mode == 1:
        if j < 2 * lv:
            c0 = 1 + (j & ~1)
            return int(min(I[c0], I[c0 + 1])) if j % 2 == 0 else int(max(I[c0], I[c0 + 1]))
        return int(I[1 + j])
    k = min(j // b, nb - 1)
    c = j - k * b
    if c < 4:
        off = 2 * lv + 2 + c * loff
        base = 1 + k * b + 4 + 2 * off
        v = 0
        for t in range(loff):
            if I[base + 2 * t] > I[base + 2 * t + 1]:
                v |= 1 << t
        return v
    npairs = 2 * lv + 2 + 4 * loff
    if c - 4 < 2 * npairs:
        c0 = 1 + k * b + 4 + ((c - 4) & ~1)
        return int(min(I[c0], I[c0 + 1])) if (c - 4) % 2 == 0 else int(max(I[c0], I[c0 + 1]))
    return int(I[1 + j])


def _grd(I, k, b, off, width):
    base = 1 + k * b + 4 + 2 * off
    v = 0
    for t in range(width):
        if I[base + 2 * t] > I[base + 2 * t + 1]:
            v |= 1 << t
    return v


def _gwr(I, k, b, off, width, v):
    base = 1 + k * b + 4 + 2 * off
    for t in range(width):
        c0 = base + 2 * t
        x, y = I[c0], I[c0 + 1]
        if (v >> t) & 1:
            I[c0], I[c0 + 1] = max(x, y), min(x, y)
        else:
            I[c0], I[c0 + 1] = min(x, y), max(x, y)


def _gblock(j, b, nb):
    return min(j // b, nb - 1)


def _gcenter(I, k, b, nb, lv, mode):
    if mode == 1:
        v = 0
        for t in range(lv):
            if I[1 + 2 * t] > I[1 + 2 * t + 1]:
                v |= 1 << t
        return v
    return _grd(I, k, b, 0, lv)


def gcodec_init(I, n, m, b, nb, lv, loff, mode, threads):
    """Back up the raw cells' offsets, then set edge slots to the sentinel
    and every block to a fresh root."""
    _gctx(b, nb, lv, loff, mode)
    if mode != 2:
        return
    for k in range(nb):
        for r in range(4):
            _gwr(I, k, b, 2 * lv + 2 + r * loff, loff, int(I[1 + k * b + r]))
        I[1 + k * b + 0] = 0
        I[1 + k * b + 1] = GSENT
        I[1 + k * b + 2] = GSENT
        I[1 + k * b + 3] = GSENT
        _gwr(I, k, b, 2 * lv, 1, 1)   # root flag
        _gwr(I, k, b, 2 * lv + 1, 1, 0)  # coin


def gchoose_centers(I, n, m, b, nb, lv, loff, mode, seed, threads):
    _gctx(b, nb, lv, loff, mode)
    if mode == 0:
        return
    if mode == 1:
        c = 1 + mix64(seed, TAG_GRAPH_CENTER, 0) % n
        for t in range(lv):
            c0 = 1 + 2 * t
            x, y = I[c0], I[c0 + 1]
            if (c >> t) & 1:
                I[c0], I[c0 + 1] = max(x, y), min(x, y)
            else:
                I[c0], I[c0 + 1] = min(x, y), max(x, y)
        return
    for k in range(nb):
        lo = k * b + 1
        hi = (k + 1) * b if k < nb - 1 else n
        c = lo + mix64(seed, TAG_GRAPH_CENTER, k) % (hi - lo + 1)
        _gwr(I, k, b, 0, lv, c)


def gsort_adjacency(I, n, m, b, nb, lv, loff, mode, threads):
    """Insertion-sort each vertex's entries by (weight, neighbor)."""
    _gctx(b, nb, lv, loff, mode)
    base = n + 1
    for j in range(n):
        first, last = _gdeg_bounds(I, n, j)
        for g in range(first + 1, last + 1):
            qv, qw = int(I[base + 2 * g]), int(I[base + 2 * g + 1])
            h = g
            while h > first:
                pv, pw = int(I[base + 2 * (h - 1)]), int(I[base + 2 * (h - 1) + 1])
                if (pw, pv) <= (qw, qv):
                    break
                I[base + 2 * h], I[base + 2 * h + 1] = pv, pw
                h -= 1
            I[base + 2 * h], I[base + 2 * h + 1] = qv, qw


def _edge_key3(w, a, b):
    return (w, a, b) if a < b else (w, b, a)


def gcenter_search(I, n, m, b, nb, lv, loff, mode, u, L, record_tree):
    """Bounded cheapest-edge-first search from u.

    The frontier keeps one entry per vertex (its best connecting edge);
    pops and evictions order entries by the connecting edge's full key
    (weight, min endpoint, max endpoint), which keeps the search tree
    inside the unique spanning forest even with duplicate weights.

    Returns (center, visited, exhausted, min_label, tree) with center = 0
    when none was reached; tree is a list of (parent, child, weight) in pop
    order when record_tree is set.
    """
    _gctx(b, nb, lv, loff, mode)
    base = n + 1
    t_evict = GSENT
    visited = set()
    frontier = {u: (0, 0)}  # vertex -> (weight, parent)
    min_label = u
    tree = []
    while frontier and len(visited) <= L:
        p = min(frontier, key=lambda v: _edge_key3(frontier[v][0], frontier[v][1], v))
        w, par = frontier.pop(p)
        visited.add(p)
        if p < min_label:
            min_label = p
        if record_tree and par:
            tree.append((par, p, w))
        if mode != 0 and _gcenter(I, _gblock(p - 1, b, nb), b, nb, lv, mode) == p:
            return p, len(visited), 0, min_label, tree
        first, last = _gdeg_bounds(I, n, p - 1)
        fanout = min(last - first + 1, L)
        for g in range(first, first + fanout):
            q = int(I[base + 2 * g])
            wq = int(I[base + 2 * g + 1])
            if q in visited or wq >= t_evict:
                continue
            cur = frontier.get(q)
            if cur is None or _edge_key3(wq, p, q) < _edge_key3(cur[0], cur[1], q):
                frontier[q] = (wq, p)
        while len(frontier) > L:
            worst = max(frontier, key=lambda v: _edge_key3(frontier[v][0], frontier[v][1], v))
            ww, _ = frontier.pop(worst)
            if ww < t_evict:
                t_evict = ww
    exhausted = 1 if (not frontier and t_evict == GSENT) else 0
    return 0, len(visited), exhausted, min_label, tree


def goffset_read(I, n, m, b, nb, lv, loff, mode, j):
    _gctx(b, nb, lv, loff, mode)
    return goffset_read_raw(I, n, j)


def gsearch_until(I, n, m, b, nb, lv, loff, mode, u, c_prime, record_tree):
    """Center search with capacity doubling; returns the final attempt's
    result plus the number of iterations used."""
    lg = max(1, (n - 1).bit_length()) if n >= 2 else 1
    base_l = c_prime * lg * lg
    k = 0
    while True:
        L = (1 << k) * base_l
        center, vis, exhausted, ml, tree = gcenter_search(
            I, n, m, b, nb, lv, loff, mode, u, L, record_tree)
        if center or exhausted:
            return center, vis, exhausted, ml, tree, k + 1
        k += 1
        if (1 << k) * base_l > 4 * n + 4:
            # cannot happen: a search with L > n either finds or exhausts
            raise InvariantError("center search failed to converge")


def gfind_root(I, n, m, b, nb, lv, loff, mode, s):
    _gctx(b, nb, lv, loff, mode)
    if mode == 1:
        return _gcenter(I, 0, b, nb, lv, mode)
    t = s
    for _ in range(nb + 1):
        k = _gblock(t - 1, b, nb)
        if _grd(I, k, b, 2 * lv, 1):
            return t
        t = _grd(I, k, b, lv, lv)
    return -1  # cycle: caller raises


def _gslot_read(I, k, b):
    return int(I[1 + k * b + 1]), int(I[1 + k * b + 2]), int(I[1 + k * b + 3])


def _gslot_update_min(I, k, b, near, far, w):
    """Lower block k's edge slot to min by (weight, min label, max label)."""
    src, tgt, old_w = _gslot_read(I, k, b)
    new_key = (w, min(near, far), max(near, far))
    old_key = (old_w, min(src, tgt), max(src, tgt)) if old_w != GSENT else None
    if old_key is None or new_key < old_key:
        I[1 + k * b + 1] = near
        I[1 + k * b + 2] = far
        I[1 + k * b + 3] = w
        return True
    return False


def gboruvka_round(I, n, m, b, nb, lv, loff, mode, seed, rno, c_prime, threads):
    """One round: reset root slots, then lower both endpoint roots' slots to
    the minimum cut edge for every cross-cluster edge.  Returns 1 when any
    slot changed."""
    _gctx(b, nb, lv, loff, mode)
    if mode != 2:
        return 0
    for k in range(nb):
        if _grd(I, k, b, 2 * lv, 1):
            I[1 + k * b + 0] = 0
            I[1 + k * b + 1] = GSENT
            I[1 + k * b + 2] = GSENT
            I[1 + k * b + 3] = GSENT
    progress = 0
    base = n + 1
    for p in range(1, n + 1):
        s1, _, exh, _, _, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, p, c_prime, 0)
        if not s1:
            continue  # centerless component: none of its edges join the cluster graph
        first, last = _gdeg_bounds(I, n, p - 1)
        for g in range(first, last + 1):
            q = int(I[base + 2 * g])
            w = int(I[base + 2 * g + 1])
            s2, _, _, _, _, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, q, c_prime, 0)
            if not s2 or s1 == s2:
                continue
            r1 = gfind_root(I, n, m, b, nb, lv, loff, mode, s1)
            r2 = gfind_root(I, n, m, b, nb, lv, loff, mode, s2)
            if r1 == r2 or r1 < 0 or r2 < 0:
                continue
            k1 = _gblock(r1 - 1, b, nb)
            k2 = _gblock(r2 - 1, b, nb)
            if _gslot_update_min(I, k1, b, p, q, w):
                progress = 1
            if _gslot_update_min(I, k2, b, q, p, w):
                progress = 1
    return progress


def gcontraction_round(I, n, m, b, nb, lv, loff, mode, seed, rno, c_prime, threads):
    """Coin-flip star contraction: a tails root links under its stored
    edge's heads far-root."""
    _gctx(b, nb, lv, loff, mode)
    if mode != 2:
        return 0
    for k in range(nb):
        if _grd(I, k, b, 2 * lv, 1):
            _gwr(I, k, b, 2 * lv + 1, 1, coin(seed, TAG_GRAPH_COIN, k, rno))
    linked = 0
    for k in range(nb):
        if not _grd(I, k, b, 2 * lv, 1):
            continue
        src, tgt, w = _gslot_read(I, k, b)
        if w == GSENT:
            continue
        far_center, _, _, _, _, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, tgt, c_prime, 0)
        if not far_center:
            continue
        rp = gfind_root(I, n, m, b, nb, lv, loff, mode, far_center)
        if rp < 0 or _gblock(rp - 1, b, nb) == k:
            continue
        if _grd(I, k, b, 2 * lv + 1, 1) == 0 and _grd(I, _gblock(rp - 1, b, nb), b, 2 * lv + 1, 1) == 1:
            _gwr(I, k, b, lv, lv, rp)
            _gwr(I, k, b, 2 * lv, 1, 0)
            linked += 1
    return linked


def gcontraction_pending(I, n, m, b, nb, lv, loff, mode, c_prime):
    """True while some root's stored edge still points at another root."""
    _gctx(b, nb, lv, loff, mode)
    if mode != 2:
        return 0
    for k in range(nb):
        if not _grd(I, k, b, 2 * lv, 1):
            continue
        src, tgt, w = _gslot_read(I, k, b)
        if w == GSENT:
            continue
        far_center, _, _, _, _, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, tgt, c_prime, 0)
        if not far_center:
            continue
        rp = gfind_root(I, n, m, b, nb, lv, loff, mode, far_center)
        if rp >= 0 and _gblock(rp - 1, b, nb) != k:
            return 1
    return 0


def _gedge_weight(I, n, u, v):
    first, last = _gdeg_bounds(I, n, u - 1)
    base = n + 1
    for g in range(first, last + 1):
        if int(I[base + 2 * g]) == v:
            return int(I[base + 2 * g + 1])
    return -1


def gmsf_query(I, n, m, b, nb, lv, loff, mode, u, v, c_prime):
    """1 if edge (u, v) is in the unique spanning forest, else 0; -1 when
    (u, v) is not an edge."""
    _gctx(b, nb, lv, loff, mode)
    w = _gedge_weight(I, n, u, v)
    if w < 0:
        return -1
    key = (min(u, v), max(u, v))
    su, _, _, _, tree_u, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, u, c_prime, 1)
    for par, ch, _ in tree_u:
        if (min(par, ch), max(par, ch)) == key:
            return 1
    if not su:
        return 0  # centerless component fully swept above
    sv, _, _, _, tree_v, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, v, c_prime, 1)
    for par, ch, _ in tree_v:
        if (min(par, ch), max(par, ch)) == key:
            return 1
    if not sv or su == sv:
        return 0
    for s in (su, sv):
        k = _gblock(s - 1, b, nb)
        for _ in range(nb + 1):
            if mode == 2:
                src, tgt, sw = _gslot_read(I, k, b)
                if sw != GSENT and (min(src, tgt), max(src, tgt)) == key and sw == w:
                    return 1
                if _grd(I, k, b, 2 * lv, 1):
                    break
                parent = _grd(I, k, b, lv, lv)
                k = _gblock(parent - 1, b, nb)
            else:
                break
    return 0


def gconn_query(I, n, m, b, nb, lv, loff, mode, v, c_prime):
    """Component label: the root block's center for centered components,
    the minimum label seen for centerless ones."""
    _gctx(b, nb, lv, loff, mode)
    s, _, exhausted, min_label, _, _ = gsearch_until(I, n, m, b, nb, lv, loff, mode, v, c_prime, 0)
    if s:
        r = gfind_root(I, n, m, b, nb, lv, loff, mode, s)
        if r < 0:
            raise InvariantError("parent links form a cycle")
        return r
    return min_label
