# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend (OpenMP).

Twin of pipal._purecore: same functions, same field layouts, same
counter-based randomness, with the parallel loops the pure backend runs
sequentially.  See _purecore's module docstring for the layout contract.
"""

from cython.parallel cimport prange, parallel
cimport openmp
from libc.stdlib cimport malloc, free
from libc.string cimport memset, memcpy

ctypedef unsigned long long u64
ctypedef long long i64

NAME = "compiled"

cdef extern from *:
    """
    static inline unsigned long long pipal_atomic_load(unsigned long long *p) {
        return __atomic_load_n(p, __ATOMIC_SEQ_CST);
    }
    static inline void pipal_atomic_store(unsigned long long *p, unsigned long long v) {
        __atomic_store_n(p, v, __ATOMIC_SEQ_CST);
    }
    static inline int pipal_atomic_cas(unsigned long long *p, unsigned long long expect,
                                       unsigned long long v) {
        return __atomic_compare_exchange_n(p, &expect, v, 0, __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST);
    }
    static inline void pipal_atomic_max(unsigned long long *p, unsigned long long v) {
        unsigned long long old = __atomic_load_n(p, __ATOMIC_SEQ_CST);
        while (old < v && !__atomic_compare_exchange_n(p, &old, v, 0, __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST)) {}
    }
    /* read-modify-write of a masked lane inside one word */
    static inline void pipal_atomic_lane(unsigned long long *p, unsigned long long keep_mask,
                                         unsigned long long v) {
        unsigned long long old = __atomic_load_n(p, __ATOMIC_SEQ_CST);
        while (!__atomic_compare_exchange_n(p, &old, (old & keep_mask) | v, 0,
                                            __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST)) {}
    }
    """
    u64 pipal_atomic_load(u64 *p) nogil
    void pipal_atomic_store(u64 *p, u64 v) nogil
    int pipal_atomic_cas(u64 *p, u64 expect, u64 v) nogil
    void pipal_atomic_max(u64 *p, u64 v) nogil
    void pipal_atomic_lane(u64 *p, u64 keep_mask, u64 v) nogil

cdef u64 SENT = <u64>0xFFFFFFFFFFFFFFFFULL
cdef u64 GOLD1 = <u64>0x9E3779B97F4A7C15ULL
cdef u64 GOLD2 = <u64>0xBF58476D1CE4E5B9ULL
cdef u64 GOLD3 = <u64>0x94D049BB133111EBULL

cdef enum:
    TAG_SHUFFLE_H = 1
    TAG_MERGE_COIN = 2
    TAG_MERGE_PRECOIN = 3
    TAG_GRAPH_CENTER = 4
    TAG_GRAPH_COIN = 5
    TAG_ENCODER = 6


cdef inline u64 mix64(u64 seed, u64 tag, u64 a, u64 b) nogil:
    cdef u64 z = seed ^ (tag * GOLD3) ^ (a * GOLD1) ^ (b * GOLD2)
    z = z + GOLD1
    z = (z ^ (z >> 30)) * GOLD2
    z = (z ^ (z >> 27)) * GOLD3
    return z ^ (z >> 31)


cdef inline u64 c_coin(u64 seed, u64 tag, u64 a, u64 b) nogil:
    return mix64(seed, tag, a, b) & 1


# ---------------------------------------------------------------------------
# pair-encoded field access
# ---------------------------------------------------------------------------

cdef inline u64 fld_rd(u64* blk, long off, int width) nogil:
    cdef u64 v = 0
    cdef int t
    for t in range(width):
        if blk[off + 2 * t] > blk[off + 2 * t + 1]:
            v |= (<u64>1) << t
    return v


cdef inline void fld_wr(u64* blk, long off, int width, u64 v) nogil:
    cdef int t
    cdef u64 x, y
    for t in range(width):
        x = blk[off + 2 * t]
        y = blk[off + 2 * t + 1]
        if (v >> t) & 1:
            blk[off + 2 * t] = x if x > y else y
            blk[off + 2 * t + 1] = y if x > y else x
        else:
            blk[off + 2 * t] = x if x < y else y
            blk[off + 2 * t + 1] = y if x < y else x


cdef inline void sort_pairs(u64* blk, long lo, long hi) nogil:
    cdef long c
    cdef u64 t
    for c in range(lo, hi, 2):
        if blk[c] > blk[c + 1]:
            t = blk[c]
            blk[c] = blk[c + 1]
            blk[c + 1] = t


# ---------------------------------------------------------------------------
# merge kernels
# ---------------------------------------------------------------------------

cdef struct MCtx:
    u64* arr
    u64* shlo
    u64* shhi
    long p, q, b, s, L, cw, rawl, nb, na
    long off_inv, off_r, off_i, off_e, off_tbak, off_t, off_c, off_d


cdef inline MCtx mk_ctx(u64* arr, u64* shlo, u64* shhi, long p, long q, long b,
                        long s, long L, long cw, long rawl, long nb, long na) nogil:
    cdef MCtx c
    c.arr = arr; c.shlo = shlo; c.shhi = shhi
    c.p = p; c.q = q; c.b = b; c.s = s; c.L = L; c.cw = cw
    c.rawl = rawl; c.nb = nb; c.na = na
    c.off_inv = rawl
    c.off_r = rawl + 2 * L
    c.off_i = rawl + 4 * L
    c.off_e = rawl + 6 * L
    c.off_tbak = rawl + 6 * L + 2
    c.off_t = s
    c.off_c = s + 2 * L
    c.off_d = s + 2 * L + 2 * cw
    return c


cdef inline u64* blk_ptr(MCtx* c, long i) nogil:
    if i == 0 and c.p:
        return c.shlo
    if i == c.nb - 1 and c.q:
        return c.shhi
    return c.arr + i * c.b - c.p


cdef inline u64 endpoint(MCtx* c, long i) nogil:
    return blk_ptr(c, i)[c.b - 1]


cdef inline u64 read_tpos(MCtx* c, long i, int cache) nogil:
    if cache:
        return blk_ptr(c, i)[0] & (((<u64>1) << c.L) - 1)
    return fld_rd(blk_ptr(c, i), c.off_t, <int>c.L)


cdef inline u64 coin_bit(MCtx* c, long i, long rnd, u64 seed, int precoined) nogil:
    cdef u64* blk = blk_ptr(c, i)
    cdef long c0
    if precoined:
        c0 = c.off_c + 2 * (rnd & 31)
        return 1 if blk[c0] > blk[c0 + 1] else 0
    return fld_rd(blk, c.off_c, 1)


cdef inline void swap_cells(MCtx* c, long i, long j, long lo, long hi) nogil:
    cdef u64* bi = blk_ptr(c, i)
    cdef u64* bj = blk_ptr(c, j)
    cdef long k
    cdef u64 t
    for k in range(lo, hi):
        t = bi[k]
        bi[k] = bj[k]
        bj[k] = t


def merge_meta(u64[::1] arr, u64[::1] sh_lo, u64[::1] sh_hi, long p, long q,
               long b, long s, long L, long cw, long rawl, long nb, long na,
               int threads):
    cdef u64* parr = NULL
    cdef u64* plo = NULL
    cdef u64* phi = NULL
    if arr.shape[0]:
        parr = &arr[0]
    if sh_lo.shape[0]:
        plo = &sh_lo[0]
    if sh_hi.shape[0]:
        phi = &sh_hi[0]
    cdef MCtx c = mk_ctx(parr, plo, phi, p, q, b, s, L, cw, rawl, nb, na)
    cdef long i, lo, hi, mid, r, inv, local, lo2, hi2
    cdef long n_b = nb - na
    cdef u64 e, e2
    cdef int side_a
    with nogil:
        for i in prange(nb, num_threads=threads, schedule='static'):
            side_a = 1 if i < na else 0
            local = i if side_a else i - na
            e = endpoint(&c, i)
            lo = 0
            hi = n_b if side_a else na
            while lo < hi:
                mid = (lo + hi) // 2
                if (endpoint(&c, na + mid) if side_a else endpoint(&c, mid)) < e:
                    lo = mid + 1
                else:
                    hi = mid
            r = lo
            if r == (n_b if side_a else na):
                inv = nb - 1
            else:
                e2 = endpoint(&c, na + r) if side_a else endpoint(&c, r)
                lo2 = 0
                hi2 = na if side_a else n_b
                while lo2 < hi2:
                    mid = (lo2 + hi2) // 2
                    if (endpoint(&c, mid) if side_a else endpoint(&c, na + mid)) < e2:
                        lo2 = mid + 1
                    else:
                        hi2 = mid
                inv = r + lo2
            fld_wr(blk_ptr(&c, i), c.off_r, <int>L, <u64>r)
            fld_wr(blk_ptr(&c, i), c.off_t, <int>L, <u64>(local + r))
            fld_wr(blk_ptr(&c, i), c.off_inv, <int>L, <u64>inv)


def done_check(u64[::1] arr, u64[::1] sh_lo, u64[::1] sh_hi, long p, long q,
               long b, long s, long L, long cw, long rawl, long nb, long na,
               u64[::1] flag):
    cdef u64* parr = NULL
    cdef u64* plo = NULL
    cdef u64* phi = NULL
    if arr.shape[0]:
        parr = &arr[0]
    if sh_lo.shape[0]:
        plo = &sh_lo[0]
    if sh_hi.shape[0]:
        phi = &sh_hi[0]
    cdef MCtx c = mk_ctx(parr, plo, phi, p, q, b, s, L, cw, rawl, nb, na)
    cdef u64* pflag = &flag[0]
    cdef long i
    with nogil:
        pipal_atomic_store(pflag, 1)
        for i in prange(nb, num_threads=1, schedule='static'):
            if fld_rd(blk_ptr(&c, i), c.off_d, 1) == 0:
                pipal_atomic_store(pflag, 0)
    return int(flag[0])


cdef void cycle_leader(MCtx* c, int cache, u64* buf, int threads) nogil:
    cdef long i, j, cur, k
    cdef u64 t
    for i in prange(c.nb, num_threads=threads, schedule='dynamic'):
        if fld_rd(blk_ptr(c, i), c.off_d, 1):
            continue
        j = <long>read_tpos(c, i, cache)
        while j != i:
            if j < i:
                fld_wr(blk_ptr(c, i), c.off_e, 1, 1)
                break
            j = <long>read_tpos(c, j, cache)
    for i in prange(c.nb, num_threads=threads, schedule='dynamic'):
        if fld_rd(blk_ptr(c, i), c.off_d, 1) or fld_rd(blk_ptr(c, i), c.off_e, 1):
            continue
        cycle_rotate(c, i, cache, buf + openmp.omp_get_thread_num() * c.b)


cdef void cycle_rotate(MCtx* c, long i, int cache, u64* buf) nogil:
    cdef u64* bi = blk_ptr(c, i)
    cdef long cur, k
    cdef u64 t
    cdef u64* bc
    memcpy(buf, bi, c.b * sizeof(u64))
    if cache:
        cur = <long>(buf[0] & (((<u64>1) << c.L) - 1))
    else:
        cur = <long>fld_rd(buf, c.off_t, <int>c.L)
    while cur != i:
        bc = blk_ptr(c, cur)
        for k in range(c.b):
            t = buf[k]
            buf[k] = bc[k]
            bc[k] = t
        fld_wr(bc, c.off_d, 1, 1)
        fld_wr(bc, c.off_e, 1, 0)
        if cache:
            cur = <long>(buf[0] & (((<u64>1) << c.L) - 1))
        else:
            cur = <long>fld_rd(buf, c.off_t, <int>c.L)
    memcpy(bi, buf, c.b * sizeof(u64))
    fld_wr(bi, c.off_d, 1, 1)
    fld_wr(bi, c.off_e, 1, 0)


def end_merge(u64[::1] arr, u64[::1] sh_lo, u64[::1] sh_hi, long p, long q,
              long b, long s, long L, long cw, long rawl, long nb, long na,
              u64 seed, int threads, u64[::1] flag, int precoined,
              long round_cap, int cache_targets):
    cdef u64* parr = NULL
    cdef u64* plo = NULL
    cdef u64* phi = NULL
    if arr.shape[0]:
        parr = &arr[0]
    if sh_lo.shape[0]:
        plo = &sh_lo[0]
    if sh_hi.shape[0]:
        phi = &sh_hi[0]
    cdef MCtx c = mk_ctx(parr, plo, phi, p, q, b, s, L, cw, rawl, nb, na)
    cdef u64* pflag = &flag[0]
    cdef u64 mask_l = ((<u64>1) << L) - 1
    cdef long i, j, tpos, i0, rounds
    cdef u64* blk
    cdef u64* rot_buf
    cdef long not_done

    with nogil:
        for i in prange(nb, num_threads=threads, schedule='static'):
            blk = blk_ptr(&c, i)
            fld_wr(blk, c.off_e, 1, 0)
            tpos = <long>fld_rd(blk, c.off_t, <int>L)
            fld_wr(blk, c.off_d, 1, 1 if tpos == i else 0)
            if precoined:
                fld_wr(blk, c.off_c, <int>cw, mix64(seed, TAG_MERGE_PRECOIN, <u64>i, 0)
                       & ((((<u64>1) << cw) - 1) if cw < 64 else SENT))
            if cache_targets:
                fld_wr(blk, c.off_tbak, <int>L, blk[0] & mask_l)
                blk[0] = (blk[0] & (~mask_l)) | <u64>tpos

    rounds = 0
    while True:
        with nogil:
            pipal_atomic_store(pflag, 1)
            for i in prange(nb, num_threads=threads, schedule='static'):
                if fld_rd(blk_ptr(&c, i), c.off_d, 1) == 0:
                    pipal_atomic_store(pflag, 0)
        if flag[0]:
            break
        if round_cap >= 0 and rounds >= round_cap and round_cap != 0:
            rot_buf = <u64*>malloc(threads * b * sizeof(u64))
            with nogil:
                cycle_leader(&c, cache_targets, rot_buf, threads)
            free(rot_buf)
            break
        if round_cap == -1 and rounds >= 0:
            # degenerate cap used by tests: straight to cycle leading
            rot_buf = <u64*>malloc(threads * b * sizeof(u64))
            with nogil:
                cycle_leader(&c, cache_targets, rot_buf, threads)
            free(rot_buf)
            break
        with nogil:
            if not precoined:
                for i in prange(nb, num_threads=threads, schedule='static'):
                    if fld_rd(blk_ptr(&c, i), c.off_d, 1) == 0:
                        fld_wr(blk_ptr(&c, i), c.off_c, 1,
                               c_coin(seed, TAG_MERGE_COIN, <u64>i, <u64>rounds))
            for i in prange(nb, num_threads=threads, schedule='static'):
                if fld_rd(blk_ptr(&c, i), c.off_d, 1):
                    continue
                if coin_bit(&c, i, rounds, seed, precoined) != 1:
                    continue
                tpos = <long>read_tpos(&c, i, cache_targets)
                if coin_bit(&c, tpos, rounds, seed, precoined) != 0:
                    continue
                fld_wr(blk_ptr(&c, i), c.off_d, 1, 1)
                fld_wr(blk_ptr(&c, i), c.off_e, 1, 1)
                fld_wr(blk_ptr(&c, i), c.off_i, <int>L, <u64>i)
                swap_cells(&c, i, tpos, 0, s)
            for j in prange(nb, num_threads=threads, schedule='static'):
                if fld_rd(blk_ptr(&c, j), c.off_e, 1) == 0:
                    continue
                i0 = <long>fld_rd(blk_ptr(&c, j), c.off_i, <int>L)
                fld_wr(blk_ptr(&c, j), c.off_e, 1, 0)
                if <long>fld_rd(blk_ptr(&c, j), c.off_t, <int>L) == i0:
                    fld_wr(blk_ptr(&c, j), c.off_d, 1, 1)
                swap_cells(&c, i0, j, s, b)
        rounds += 1

    if cache_targets:
        with nogil:
            for i in prange(nb, num_threads=threads, schedule='static'):
                blk = blk_ptr(&c, i)
                blk[0] = (blk[0] & (~mask_l)) | fld_rd(blk, c.off_tbak, <int>L)
                sort_pairs(blk, c.off_tbak, c.off_tbak + 2 * L)
    return rounds


cdef void do_separate(MCtx* c, long lo, long hi, u64* scr) nogil:
    cdef long k = hi - lo
    cdef long i = lo + k // 2 - 1
    cdef long j, ia, ib, out, lp_hi, rp_hi, base
    cdef u64 inv_i, inv_j, v
    cdef u64* bi
    cdef u64* bj
    inv_i = fld_rd(blk_ptr(c, i), c.off_inv, <int>c.L)
    j = <long>inv_i
    if hi - 1 < j:
        j = hi - 1
    if j <= i:
        return
    inv_j = fld_rd(blk_ptr(c, j), c.off_inv, <int>c.L)
    bi = blk_ptr(c, i)
    bj = blk_ptr(c, j)
    memcpy(scr, bi, c.b * sizeof(u64))
    memcpy(scr + c.b, bj, c.b * sizeof(u64))
    lp_hi = c.s - ((c.s - c.rawl) & 1)
    rp_hi = c.b - 1 - ((c.b - 1 - c.s) & 1)
    for base in range(2):
        sort_pairs(scr + base * c.b, c.rawl, lp_hi)
        sort_pairs(scr + base * c.b, c.s, rp_hi)
    ia = 0
    ib = c.b
    for out in range(2 * c.b):
        if ia < c.b and (ib == 2 * c.b or scr[ia] < scr[ib]):
            v = scr[ia]
            ia = ia + 1
        else:
            v = scr[ib]
            ib = ib + 1
        if out < c.b:
            bi[out] = v
        else:
            bj[out - c.b] = v
    fld_wr(bi, c.off_inv, <int>c.L, inv_i)
    fld_wr(bj, c.off_inv, <int>c.L, inv_j)


def separate_slice(u64[::1] arr, u64[::1] sh_lo, u64[::1] sh_hi, long p, long q,
                   long b, long s, long L, long cw, long rawl, long nb, long na,
                   long lo, long hi, u64[::1] scratch):
    cdef u64* parr = NULL
    cdef u64* plo = NULL
    cdef u64* phi = NULL
    if arr.shape[0]:
        parr = &arr[0]
    if sh_lo.shape[0]:
        plo = &sh_lo[0]
    if sh_hi.shape[0]:
        phi = &sh_hi[0]
    cdef MCtx c = mk_ctx(parr, plo, phi, p, q, b, s, L, cw, rawl, nb, na)
    with nogil:
        do_separate(&c, lo, hi, &scratch[0])


def seq_sort_all(u64[::1] arr, u64[::1] sh_lo, u64[::1] sh_hi, long p, long q,
                 long b, long s, long L, long cw, long rawl, long nb, long na,
                 int threads, u64[::1] scratch):
    cdef u64* parr = NULL
    cdef u64* plo = NULL
    cdef u64* phi = NULL
    if arr.shape[0]:
        parr = &arr[0]
    if sh_lo.shape[0]:
        plo = &sh_lo[0]
    if sh_hi.shape[0]:
        phi = &sh_hi[0]
    cdef MCtx c = mk_ctx(parr, plo, phi, p, q, b, s, L, cw, rawl, nb, na)
    cdef u64* pscr = &scratch[0]
    cdef long d, t, levels, lo, hi, mid, k, bit
    cdef int ok
    cdef long lp_hi, rp_hi
    cdef u64* blk
    if nb >= 2:
        levels = 0
        while (1 << levels) < nb:
            levels += 1
        for d in range(levels):
            with nogil:
                for t in prange(1 << d, num_threads=threads, schedule='dynamic'):
                    lo = 0
                    hi = nb
                    ok = 1
                    for bit in range(d - 1, -1, -1):
                        k = hi - lo
                        if k <= 1:
                            ok = 0
                            break
                        mid = lo + k // 2
                        if (t >> bit) & 1:
                            lo = mid
                        else:
                            hi = mid
                    if ok and hi - lo >= 2:
                        do_separate(&c, lo, hi,
                                    pscr + openmp.omp_get_thread_num() * 2 * b)
    lp_hi = s - ((s - rawl) & 1)
    rp_hi = b - 1 - ((b - 1 - s) & 1)
    with nogil:
        for t in prange(nb, num_threads=threads, schedule='static'):
            blk = blk_ptr(&c, t)
            sort_pairs(blk, rawl, lp_hi)
            sort_pairs(blk, s, rp_hi)


# ---------------------------------------------------------------------------
# shuffle kernels
# ---------------------------------------------------------------------------

cdef struct WkCtx:
    u64* arr
    long base, cap
    u64 mask, inv


cdef inline u64 wk_rd(WkCtx* w, long t) nogil:
    return pipal_atomic_load(w.arr + w.base + t) & w.mask


cdef inline void wk_wr(WkCtx* w, long t, u64 v) nogil:
    pipal_atomic_lane(w.arr + w.base + t, w.inv, v)


cdef inline long wk_slot(WkCtx* w, u64 key) nogil:
    cdef u64 h = (key + 1) * GOLD1
    cdef long i = <long>((h ^ (h >> 29)) & <u64>(w.cap - 1))
    cdef u64 k0
    cdef u64* cell
    while True:
        cell = w.arr + w.base + i
        k0 = pipal_atomic_load(cell) & w.mask
        if k0 == key + 1:
            return i
        if k0 == 0:
            # claim the slot; on a lost race re-examine the same cell
            if pipal_atomic_cas(cell, (pipal_atomic_load(cell) & w.inv),
                                (pipal_atomic_load(cell) & w.inv) | (key + 1)):
                return i
            continue
        i = (i + 1) & (w.cap - 1)


cdef inline void wk_reserve(WkCtx* w, u64 key, u64 sid, u64 rnd) nogil:
    cdef long i = wk_slot(w, key)
    cdef u64* tag = w.arr + w.base + w.cap + i
    cdef u64* val = w.arr + w.base + 2 * w.cap + i
    cdef u64 cur_tag = pipal_atomic_load(tag) & w.mask
    if cur_tag != rnd + 1:
        # stale round: publish the new tag, then race value by max
        pipal_atomic_lane(val, w.inv, 0)
        pipal_atomic_lane(tag, w.inv, rnd + 1)
    # value lane max: CAS loop on the masked lane
    cdef u64 old = pipal_atomic_load(val)
    while (old & w.mask) < sid + 1:
        if pipal_atomic_cas(val, old, (old & w.inv) | (sid + 1)):
            break
        old = pipal_atomic_load(val)


cdef inline i64 wk_holder(WkCtx* w, u64 key, u64 rnd) nogil:
    cdef long i = wk_slot(w, key)
    if (pipal_atomic_load(w.arr + w.base + w.cap + i) & w.mask) != rnd + 1:
        return -1
    return <i64>(pipal_atomic_load(w.arr + w.base + 2 * w.cap + i) & w.mask) - 1


cdef inline u64 shuffle_target_c(u64 seed, u64 i) nogil:
    return mix64(seed, TAG_SHUFFLE_H, i, 0) % (i + 1)


cdef inline u64 sim_read_c(u64* arr, long aux_lo, long enc_lo, int w2, u64 mask2, long t) nogil:
    cdef long base = enc_lo + 2 * w2 * t
    cdef u64 low = 0
    cdef int pbit
    for pbit in range(w2):
        if arr[base + 2 * pbit] > arr[base + 2 * pbit + 1]:
            low |= (<u64>1) << pbit
    return (pipal_atomic_load(arr + aux_lo + t) & (~mask2)) | low


cdef inline void sim_write_c(u64* arr, long aux_lo, long enc_lo, int w2, u64 mask2,
                             long t, u64 v) nogil:
    pipal_atomic_lane(arr + aux_lo + t, mask2, v & (~mask2))
    cdef long base = enc_lo + 2 * w2 * t
    cdef int pbit
    cdef u64 x, y
    for pbit in range(w2):
        x = arr[base + 2 * pbit]
        y = arr[base + 2 * pbit + 1]
        if (v >> pbit) & 1:
            arr[base + 2 * pbit] = x if x > y else y
            arr[base + 2 * pbit + 1] = y if x > y else x
        else:
            arr[base + 2 * pbit] = x if x < y else y
            arr[base + 2 * pbit + 1] = y if x < y else x


def knuth_chunk_rounds(u64[::1] arr, long r, long hi, u64 seed, u64[::1] wk_arr,
                       long wk_base, int wk_bits, long cap, int threads,
                       long aux_lo=-1, long s2=0, int w2=0):
    cdef WkCtx w
    w.arr = &wk_arr[0]
    w.base = wk_base
    w.cap = cap
    w.mask = SENT if wk_bits >= 64 else (((<u64>1) << wk_bits) - 1)
    w.inv = ~w.mask
    cdef u64* parr = &arr[0]
    cdef long k = hi - r + 1
    cdef long pend = 3 * cap
    cdef long idx, out, pcount
    cdef i64 sid
    cdef u64 h, v, tmp, disp
    cdef long c0, t
    cdef int staged = 1 if aux_lo >= 0 else 0
    cdef long enc_lo = aux_lo + s2
    cdef long enc_hi = enc_lo + 2 * <long>w2 * s2
    cdef u64 mask2 = (((<u64>1) << w2) - 1) if 0 < w2 < 64 else SENT
    cdef long rounds = 0
    cdef int phase, in_aux, win

    with nogil:
        for idx in prange(2 * cap, num_threads=threads, schedule='static'):
            wk_wr(&w, idx, 0)
        for idx in prange(k, num_threads=threads, schedule='static'):
            wk_wr(&w, pend + idx, <u64>(hi - idx) + 1)
    pcount = k
    while pcount:
        with nogil:
            for idx in prange(pcount, num_threads=threads, schedule='static'):
                sid = <i64>wk_rd(&w, pend + idx) - 1
                h = shuffle_target_c(seed, <u64>sid)
                wk_reserve(&w, <u64>sid, <u64>sid, <u64>rounds)
                if staged and enc_lo <= <long>h < enc_hi:
                    c0 = enc_lo + ((<long>h - enc_lo) & ~1)
                    wk_reserve(&w, <u64>c0, <u64>sid, <u64>rounds)
                    wk_reserve(&w, <u64>(c0 + 1), <u64>sid, <u64>rounds)
                else:
                    wk_reserve(&w, h, <u64>sid, <u64>rounds)
            for phase in range(2 if staged else 1):
                for idx in prange(pcount, num_threads=threads, schedule='static'):
                    v = wk_rd(&w, pend + idx)
                    if v == 0:
                        continue
                    sid = <i64>v - 1
                    h = shuffle_target_c(seed, <u64>sid)
                    in_aux = 1 if (staged and aux_lo <= <long>h < enc_lo) else 0
                    if staged and in_aux != (1 if phase == 0 else 0):
                        continue
                    win = 1
                    if wk_holder(&w, <u64>sid, <u64>rounds) != sid:
                        win = 0
                    elif staged and enc_lo <= <long>h < enc_hi:
                        c0 = enc_lo + ((<long>h - enc_lo) & ~1)
                        if wk_holder(&w, <u64>c0, <u64>rounds) != sid or \
                           wk_holder(&w, <u64>(c0 + 1), <u64>rounds) != sid:
                            win = 0
                    elif wk_holder(&w, h, <u64>rounds) != sid:
                        win = 0
                    if not win:
                        continue
                    if in_aux:
                        t = <long>h - aux_lo
                        disp = sim_read_c(parr, aux_lo, enc_lo, w2, mask2, t)
                        sim_write_c(parr, aux_lo, enc_lo, w2, mask2, t, parr[sid])
                        parr[sid] = disp
                    elif staged and enc_lo <= <long>h < enc_hi:
                        c0 = enc_lo + ((<long>h - enc_lo) & ~1)
                        tmp = parr[h]
                        win = 1 if parr[c0] > parr[c0 + 1] else 0
                        parr[h] = parr[sid]
                        if (1 if parr[c0] > parr[c0 + 1] else 0) != win:
                            tmp2_swap(parr, c0)
                        parr[sid] = tmp
                    elif <long>h != sid:
                        tmp = parr[sid]
                        parr[sid] = parr[h]
                        parr[h] = tmp
                    wk_wr(&w, pend + idx, 0)
        out = 0
        for idx in range(pcount):
            v = wk_rd(&w, pend + idx)
            if v:
                wk_wr(&w, pend + out, v)
                out += 1
        pcount = out
        rounds += 1
    return rounds


cdef inline void tmp2_swap(u64* arr, long c0) nogil:
    cdef u64 t = arr[c0]
    arr[c0] = arr[c0 + 1]
    arr[c0 + 1] = t


def uniform_encoder(u64[::1] arr, long enc_lo, long npairs, u64 seed, u64 salt,
                    int threads):
    cdef u64* parr = &arr[0]
    cdef long t
    cdef u64 tv
    with nogil:
        for t in prange(npairs, num_threads=threads, schedule='static'):
            if c_coin(seed, TAG_ENCODER, <u64>t, salt):
                tv = parr[enc_lo + 2 * t]
                parr[enc_lo + 2 * t] = parr[enc_lo + 2 * t + 1]
                parr[enc_lo + 2 * t + 1] = tv


# ---------------------------------------------------------------------------
# graph kernels
# ---------------------------------------------------------------------------

cdef struct GCtx:
    u64* I
    long n, m, b, nb, lv, loff
    int mode


cdef inline long gblock(GCtx* g, long j) nogil:
    cdef long k = j // g.b
    return k if k < g.nb - 1 else g.nb - 1


cdef inline u64 g_rd(GCtx* g, long k, long off, int width) nogil:
    return fld_rd(g.I + 1 + k * g.b + 4, off * 2, width)


cdef inline void g_wr(GCtx* g, long k, long off, int width, u64 v) nogil:
    fld_wr(g.I + 1 + k * g.b + 4, off * 2, width, v)


cdef inline u64 g_center(GCtx* g, long k) nogil:
    if g.mode == 1:
        return fld_rd(g.I + 1, 0, <int>g.lv)
    return g_rd(g, k, 0, <int>g.lv)


cdef inline u64 g_offset(GCtx* g, long j) nogil:
    cdef long k, c, c0, npairs
    if g.mode == 0:
        return g.I[1 + j]
    if g.mode == 1:
        if j < 2 * g.lv:
            c0 = 1 + (j & ~1)
            if j % 2 == 0:
                return g.I[c0] if g.I[c0] < g.I[c0 + 1] else g.I[c0 + 1]
            return g.I[c0] if g.I[c0] > g.I[c0 + 1] else g.I[c0 + 1]
        return g.I[1 + j]
    k = gblock(g, j)
    c = j - k * g.b
    if c < 4:
        return g_rd(g, k, 2 * g.lv + 2 + c * g.loff, <int>g.loff)
    npairs = 2 * g.lv + 2 + 4 * g.loff
    if c - 4 < 2 * npairs:
        c0 = 1 + k * g.b + 4 + ((c - 4) & ~1)
        if (c - 4) % 2 == 0:
            return g.I[c0] if g.I[c0] < g.I[c0 + 1] else g.I[c0 + 1]
        return g.I[c0] if g.I[c0] > g.I[c0 + 1] else g.I[c0 + 1]
    return g.I[1 + j]


cdef inline void g_bounds(GCtx* g, long j, long* first, long* last) nogil:
    last[0] = <long>g_offset(g, j)
    first[0] = (<long>g_offset(g, j - 1) + 1) if j > 0 else 0


def gcodec_init(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                int mode, int threads):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long k, r
    if mode != 2:
        return
    with nogil:
        for k in prange(nb, num_threads=threads, schedule='static'):
            for r in range(4):
                g_wr(&g, k, 2 * lv + 2 + r * loff, <int>loff, g.I[1 + k * b + r])
            g.I[1 + k * b + 0] = 0
            g.I[1 + k * b + 1] = SENT
            g.I[1 + k * b + 2] = SENT
            g.I[1 + k * b + 3] = SENT
            g_wr(&g, k, 2 * lv, 1, 1)
            g_wr(&g, k, 2 * lv + 1, 1, 0)


def gchoose_centers(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                    int mode, u64 seed, int threads):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long k, lo, hi
    cdef u64 c
    if mode == 0:
        return
    if mode == 1:
        c = 1 + mix64(seed, TAG_GRAPH_CENTER, 0, 0) % <u64>n
        with nogil:
            fld_wr(g.I + 1, 0, <int>lv, c)
        return
    with nogil:
        for k in prange(nb, num_threads=threads, schedule='static'):
            lo = k * b + 1
            hi = (k + 1) * b if k < nb - 1 else n
            g_wr(&g, k, 0, <int>lv,
                 <u64>lo + mix64(seed, TAG_GRAPH_CENTER, <u64>k, 0) % <u64>(hi - lo + 1))


def gsort_adjacency(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                    int mode, int threads):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long j, first, last, gge, h, base
    cdef u64 qv, qw, pv, pw
    base = n + 1
    with nogil:
        for j in prange(n, num_threads=threads, schedule='dynamic'):
            g_bounds(&g, j, &first, &last)
            for gge in range(first + 1, last + 1):
                qv = g.I[base + 2 * gge]
                qw = g.I[base + 2 * gge + 1]
                h = gge
                while h > first:
                    pv = g.I[base + 2 * (h - 1)]
                    pw = g.I[base + 2 * (h - 1) + 1]
                    if pw < qw or (pw == qw and pv <= qv):
                        break
                    g.I[base + 2 * h] = pv
                    g.I[base + 2 * h + 1] = pw
                    h = h - 1
                g.I[base + 2 * h] = qv
                g.I[base + 2 * h + 1] = qw


def goffset_read(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                 int mode, long j):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    return int(g_offset(&g, j))


# -- bounded cheapest-first search ------------------------------------------
#
# Scratch layout (u64 words), cap = L + 2, mapcap = pow2 >= 4 * cap:
#   slot_w, slot_a, slot_b, slot_v, slot_par, slot_minpos, slot_maxpos  7*cap
#   minheap, maxheap                                                    2*cap
#   map_key, map_state (0 empty/evicted, SENT visited, else slot+1)     2*mapcap

cdef struct Front:
    u64* w
    u64* a
    u64* b
    u64* v
    u64* par
    u64* minpos
    u64* maxpos
    u64* minheap
    u64* maxheap
    u64* mkey
    u64* mstate
    long cap, mapcap, hn, nslots


cdef inline long scratch_words(long L) nogil:
    cdef long cap = L + 2
    cdef long mapcap = 1
    while mapcap < 4 * cap:
        mapcap *= 2
    return 9 * cap + 2 * mapcap


def search_scratch_words(L):
    return int(scratch_words(<long>L))


cdef void front_init(Front* f, u64* scr, long L) nogil:
    cdef long cap = L + 2
    cdef long mapcap = 1
    while mapcap < 4 * cap:
        mapcap *= 2
    f.cap = cap
    f.mapcap = mapcap
    f.w = scr
    f.a = scr + cap
    f.b = scr + 2 * cap
    f.v = scr + 3 * cap
    f.par = scr + 4 * cap
    f.minpos = scr + 5 * cap
    f.maxpos = scr + 6 * cap
    f.minheap = scr + 7 * cap
    f.maxheap = scr + 8 * cap
    f.mkey = scr + 9 * cap
    f.mstate = scr + 9 * cap + mapcap
    f.hn = 0
    f.nslots = 0
    memset(f.mkey, 0, mapcap * sizeof(u64))
    memset(f.mstate, 0, mapcap * sizeof(u64))


cdef inline int key_less(Front* f, u64 s1, u64 s2) nogil:
    if f.w[s1] != f.w[s2]:
        return f.w[s1] < f.w[s2]
    if f.a[s1] != f.a[s2]:
        return f.a[s1] < f.a[s2]
    return f.b[s1] < f.b[s2]


cdef inline long map_probe(Front* f, u64 vertex) nogil:
    cdef u64 h = vertex * GOLD1
    cdef long i = <long>((h ^ (h >> 29)) & <u64>(f.mapcap - 1))
    while True:
        if f.mkey[i] == vertex or f.mkey[i] == 0:
            return i
        i = (i + 1) & (f.mapcap - 1)


cdef inline void min_sift_up(Front* f, long pos) nogil:
    cdef long par
    cdef u64 s
    while pos > 0:
        par = (pos - 1) // 2
        if key_less(f, f.minheap[pos], f.minheap[par]):
            s = f.minheap[pos]; f.minheap[pos] = f.minheap[par]; f.minheap[par] = s
            f.minpos[f.minheap[pos]] = pos
            f.minpos[f.minheap[par]] = par
            pos = par
        else:
            break


cdef inline void min_sift_down(Front* f, long pos) nogil:
    cdef long ch
    cdef u64 s
    while True:
        ch = 2 * pos + 1
        if ch >= f.hn:
            break
        if ch + 1 < f.hn and key_less(f, f.minheap[ch + 1], f.minheap[ch]):
            ch += 1
        if key_less(f, f.minheap[ch], f.minheap[pos]):
            s = f.minheap[pos]; f.minheap[pos] = f.minheap[ch]; f.minheap[ch] = s
            f.minpos[f.minheap[pos]] = pos
            f.minpos[f.minheap[ch]] = ch
            pos = ch
        else:
            break


cdef inline void max_sift_up(Front* f, long pos) nogil:
    cdef long par
    cdef u64 s
    while pos > 0:
        par = (pos - 1) // 2
        if key_less(f, f.maxheap[par], f.maxheap[pos]):
            s = f.maxheap[pos]; f.maxheap[pos] = f.maxheap[par]; f.maxheap[par] = s
            f.maxpos[f.maxheap[pos]] = pos
            f.maxpos[f.maxheap[par]] = par
            pos = par
        else:
            break


cdef inline void max_sift_down(Front* f, long pos) nogil:
    cdef long ch
    cdef u64 s
    while True:
        ch = 2 * pos + 1
        if ch >= f.hn:
            break
        if ch + 1 < f.hn and key_less(f, f.maxheap[ch], f.maxheap[ch + 1]):
            ch += 1
        if key_less(f, f.maxheap[pos], f.maxheap[ch]):
            s = f.maxheap[pos]; f.maxheap[pos] = f.maxheap[ch]; f.maxheap[ch] = s
            f.maxpos[f.maxheap[pos]] = pos
            f.maxpos[f.maxheap[ch]] = ch
            pos = ch
        else:
            break


cdef inline void heap_remove(Front* f, u64 slot) nogil:
    # remove slot from both heaps; slot storage itself is reused by caller
    cdef long pos = <long>f.minpos[slot]
    cdef u64 last = f.minheap[f.hn - 1]
    f.minheap[pos] = last
    f.minpos[last] = pos
    cdef long pos2 = <long>f.maxpos[slot]
    cdef u64 last2 = f.maxheap[f.hn - 1]
    f.maxheap[pos2] = last2
    f.maxpos[last2] = pos2
    f.hn -= 1
    if pos < f.hn:
        min_sift_down(f, pos)
        min_sift_up(f, pos)
    if pos2 < f.hn:
        max_sift_down(f, pos2)
        max_sift_up(f, pos2)


cdef inline void front_insert(Front* f, u64 vertex, u64 wq, u64 ka, u64 kb, u64 parent) nogil:
    cdef long mi = map_probe(f, vertex)
    cdef u64 slot
    if f.mkey[mi] == vertex and f.mstate[mi] != 0 and f.mstate[mi] != SENT:
        slot = f.mstate[mi] - 1
        # improve only if the new connecting edge key is smaller
        if wq < f.w[slot] or (wq == f.w[slot] and (ka < f.a[slot] or
                              (ka == f.a[slot] and kb < f.b[slot]))):
            f.w[slot] = wq; f.a[slot] = ka; f.b[slot] = kb; f.par[slot] = parent
            min_sift_up(f, <long>f.minpos[slot])
            max_sift_down(f, <long>f.maxpos[slot])
        return
    if f.mkey[mi] == vertex and f.mstate[mi] == SENT:
        return  # visited
    slot = <u64>f.hn  # slots are dense: reuse the index the heaps will use
    # find a free slot id: slots in [0, cap) not currently in heaps; since
    # every live slot is referenced by exactly one heap position, slot ids
    # can be recycled via a stack embedded in minheap's tail region.
    slot = f.minheap[f.hn] if f.nslots > f.hn else <u64>f.nslots
    if f.nslots <= f.hn:
        f.nslots += 1
    f.w[slot] = wq; f.a[slot] = ka; f.b[slot] = kb
    f.v[slot] = vertex; f.par[slot] = parent
    f.minheap[f.hn] = slot
    f.maxheap[f.hn] = slot
    f.minpos[slot] = f.hn
    f.maxpos[slot] = f.hn
    f.hn += 1
    min_sift_up(f, f.hn - 1)
    max_sift_up(f, f.hn - 1)
    f.mkey[mi] = vertex
    f.mstate[mi] = slot + 1


cdef inline u64 front_pop_min(Front* f) nogil:
    cdef u64 slot = f.minheap[0]
    heap_remove(f, slot)
    f.minheap[f.hn] = slot  # recycle stack for front_insert
    cdef long mi = map_probe(f, f.v[slot])
    f.mstate[mi] = SENT  # visited
    return slot


cdef inline u64 front_pop_max(Front* f) nogil:
    cdef u64 slot = f.maxheap[0]
    heap_remove(f, slot)
    f.minheap[f.hn] = slot
    cdef long mi = map_probe(f, f.v[slot])
    f.mstate[mi] = 0  # evicted: may re-enter later
    return slot


cdef struct SearchOut:
    u64 center
    long visited
    int exhausted
    u64 min_label
    long tree_count


cdef SearchOut c_search(GCtx* g, long u, long L, u64* scr, u64* tree, long tree_cap) nogil:
    """Core bounded search; tree (3 * tree_cap words: par, child, w triples
    interleaved) may be NULL."""
    cdef SearchOut out
    cdef Front f
    front_init(&f, scr, L)
    cdef u64 t_evict = SENT
    cdef long visited = 0
    cdef u64 min_label = <u64>u
    cdef u64 slot, p, wq, q
    cdef long first, last, fanout, gg, base = g.n + 1
    out.center = 0
    out.tree_count = 0
    front_insert(&f, <u64>u, 0, 0, 0, 0)
    while f.hn > 0 and visited <= L:
        slot = front_pop_min(&f)
        p = f.v[slot]
        visited += 1
        if p < min_label:
            min_label = p
        if tree != NULL and f.par[slot] and out.tree_count < tree_cap:
            tree[3 * out.tree_count] = f.par[slot]
            tree[3 * out.tree_count + 1] = p
            tree[3 * out.tree_count + 2] = f.w[slot]
            out.tree_count += 1
        if g.mode != 0 and g_center(g, gblock(g, <long>p - 1)) == p:
            out.center = p
            out.visited = visited
            out.exhausted = 0
            out.min_label = min_label
            return out
        g_bounds(g, <long>p - 1, &first, &last)
        fanout = last - first + 1
        if fanout > L:
            fanout = L
        for gg in range(first, first + fanout):
            q = g.I[base + 2 * gg]
            wq = g.I[base + 2 * gg + 1]
            if wq >= t_evict:
                continue
            front_insert(&f, q, wq, p if p < q else q, q if p < q else p, p)
        while f.hn > L:
            slot = front_pop_max(&f)
            if f.w[slot] < t_evict:
                t_evict = f.w[slot]
    out.visited = visited
    out.exhausted = 1 if (f.hn == 0 and t_evict == SENT) else 0
    out.min_label = min_label
    return out


cdef inline long search_levels(GCtx* g, long c_prime, long* base_l) nogil:
    cdef long lg = 1
    if g.n >= 2:
        lg = 1
        while (<long>1 << lg) < g.n:
            lg += 1
    base_l[0] = c_prime * lg * lg
    cdef long k = 0
    while ((<long>1 << k) * base_l[0]) < g.n + 2:
        k += 1
    return k  # levels 0..k suffice (last always finds or exhausts)


cdef SearchOut c_search_until(GCtx* g, long u, long c_prime, long l_cap,
                              u64* scr, u64* tree, long tree_cap, int* over) nogil:
    """Doubling search bounded by l_cap; sets over=1 when l_cap was too small."""
    cdef long base_l
    cdef long kmax = search_levels(g, c_prime, &base_l)
    cdef long k = 0
    cdef long L
    cdef SearchOut out
    over[0] = 0
    while True:
        L = (<long>1 << k) * base_l
        if L > l_cap:
            over[0] = 1
            out.center = 0
            out.visited = 0
            out.exhausted = 0
            out.min_label = <u64>u
            out.tree_count = 0
            return out
        out = c_search(g, u, L, scr, tree, tree_cap)
        if out.center or out.exhausted:
            return out
        k += 1


def gcenter_search(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                   int mode, long u, long L, int record_tree):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef u64* scr = <u64*>malloc(scratch_words(L) * sizeof(u64))
    cdef u64* tree = NULL
    if record_tree:
        tree = <u64*>malloc(3 * (L + 2) * sizeof(u64))
    cdef SearchOut out
    with nogil:
        out = c_search(&g, u, L, scr, tree, L + 2)
    result = []
    cdef long t
    if record_tree:
        for t in range(out.tree_count):
            result.append((int(tree[3 * t]), int(tree[3 * t + 1]), int(tree[3 * t + 2])))
        free(tree)
    free(scr)
    return (int(out.center), int(out.visited), int(out.exhausted),
            int(out.min_label), result)


def gsearch_until(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                  int mode, long u, long c_prime, int record_tree):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef u64* scr = <u64*>malloc(scratch_words(l_cap) * sizeof(u64))
    cdef u64* tree = NULL
    if record_tree:
        tree = <u64*>malloc(3 * (l_cap + 2) * sizeof(u64))
    cdef SearchOut out
    cdef int over = 0
    cdef long iters = 1
    with nogil:
        out = c_search_until(&g, u, c_prime, l_cap, scr, tree, l_cap + 2, &over)
    result = []
    cdef long t
    if record_tree:
        for t in range(out.tree_count):
            result.append((int(tree[3 * t]), int(tree[3 * t + 1]), int(tree[3 * t + 2])))
        free(tree)
    free(scr)
    # iteration count: recompute which level succeeded
    cdef long k = 0
    while ((<long>1 << k) * base_l) < out.visited - 1:
        k += 1
    return (int(out.center), int(out.visited), int(out.exhausted),
            int(out.min_label), result, int(k + 1))


cdef i64 c_find_root(GCtx* g, u64 s) nogil:
    cdef u64 t = s
    cdef long k, steps = 0
    if g.mode == 1:
        return <i64>g_center(g, 0)
    while steps <= g.nb:
        k = gblock(g, <long>t - 1)
        if g_rd(g, k, 2 * g.lv, 1):
            return <i64>t
        t = g_rd(g, k, g.lv, <int>g.lv)
        steps += 1
    return -1


def gfind_root(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
               int mode, long s):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef i64 r
    with nogil:
        r = c_find_root(&g, <u64>s)
    return int(r)


cdef int c_slot_update_min(GCtx* g, long k, u64 near, u64 far, u64 w) nogil:
    """Lock block k's slot cell and lower it to the minimum edge key."""
    cdef u64* lock = g.I + 1 + k * g.b
    cdef u64 src, tgt, oldw, nmn, nmx, omn, omx
    cdef int changed = 0
    while not pipal_atomic_cas(lock, 0, 1):
        pass
    src = lock[1]; tgt = lock[2]; oldw = lock[3]
    nmn = near if near < far else far
    nmx = far if near < far else near
    if oldw == SENT:
        changed = 1
    else:
        omn = src if src < tgt else tgt
        omx = tgt if src < tgt else src
        if w < oldw or (w == oldw and (nmn < omn or (nmn == omn and nmx < omx))):
            changed = 1
    if changed:
        lock[1] = near
        lock[2] = far
        lock[3] = w
    pipal_atomic_store(lock, 0)
    return changed


def gboruvka_round(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                   int mode, u64 seed, long rno, long c_prime, int threads):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    if mode != 2:
        return 0
    cdef long k, j, first, last, gg, base = n + 1
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef long words = scratch_words(l_cap)
    cdef u64* pool = <u64*>malloc(<size_t>threads * words * sizeof(u64))
    cdef u64 progress = 0
    cdef u64 q, w
    cdef SearchOut s1, s2
    cdef int over = 0
    cdef i64 r1, r2
    cdef u64* scr
    with nogil:
        for k in prange(nb, num_threads=threads, schedule='static'):
            if g_rd(&g, k, 2 * lv, 1):
                g.I[1 + k * b + 0] = 0
                g.I[1 + k * b + 1] = SENT
                g.I[1 + k * b + 2] = SENT
                g.I[1 + k * b + 3] = SENT
        for j in prange(n, num_threads=threads, schedule='dynamic'):
            scr = pool + openmp.omp_get_thread_num() * words
            s1 = c_search_until(&g, j + 1, c_prime, l_cap, scr, NULL, 0, &over)
            if s1.center == 0:
                continue
            g_bounds(&g, j, &first, &last)
            for gg in range(first, last + 1):
                q = g.I[base + 2 * gg]
                w = g.I[base + 2 * gg + 1]
                s2 = c_search_until(&g, <long>q, c_prime, l_cap, scr, NULL, 0, &over)
                if s2.center == 0 or s2.center == s1.center:
                    continue
                r1 = c_find_root(&g, s1.center)
                r2 = c_find_root(&g, s2.center)
                if r1 < 0 or r2 < 0 or r1 == r2:
                    continue
                if c_slot_update_min(&g, gblock(&g, <long>r1 - 1), <u64>(j + 1), q, w):
                    pipal_atomic_store(&progress, 1)
                if c_slot_update_min(&g, gblock(&g, <long>r2 - 1), q, <u64>(j + 1), w):
                    pipal_atomic_store(&progress, 1)
    free(pool)
    return int(progress)


def gcontraction_round(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                       int mode, u64 seed, long rno, long c_prime, int threads):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    if mode != 2:
        return 0
    cdef long k
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef long words = scratch_words(l_cap)
    cdef u64* pool = <u64*>malloc(<size_t>threads * words * sizeof(u64))
    cdef u64 linked = 0
    cdef u64 tgt, w
    cdef SearchOut sf
    cdef int over = 0
    cdef i64 rp
    cdef u64* scr
    with nogil:
        for k in prange(nb, num_threads=threads, schedule='static'):
            if g_rd(&g, k, 2 * lv, 1):
                g_wr(&g, k, 2 * lv + 1, 1, c_coin(seed, TAG_GRAPH_COIN, <u64>k, <u64>rno))
        for k in prange(nb, num_threads=threads, schedule='dynamic'):
            if not g_rd(&g, k, 2 * lv, 1):
                continue
            w = g.I[1 + k * b + 3]
            if w == SENT:
                continue
            tgt = g.I[1 + k * b + 2]
            scr = pool + openmp.omp_get_thread_num() * words
            sf = c_search_until(&g, <long>tgt, c_prime, l_cap, scr, NULL, 0, &over)
            if sf.center == 0:
                continue
            rp = c_find_root(&g, sf.center)
            if rp < 0 or gblock(&g, <long>rp - 1) == k:
                continue
            if g_rd(&g, k, 2 * lv + 1, 1) == 0 and \
               g_rd(&g, gblock(&g, <long>rp - 1), 2 * lv + 1, 1) == 1:
                g_wr(&g, k, lv, <int>lv, <u64>rp)
                g_wr(&g, k, 2 * lv, 1, 0)
                linked += 1
    free(pool)
    return int(linked)


def gcontraction_pending(u64[::1] I, long n, long m, long b, long nb, long lv,
                         long loff, int mode, long c_prime):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    if mode != 2:
        return 0
    cdef long k
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef u64* scr = <u64*>malloc(scratch_words(l_cap) * sizeof(u64))
    cdef u64 tgt, w
    cdef SearchOut sf
    cdef int over = 0
    cdef i64 rp
    cdef int pending = 0
    with nogil:
        for k in range(nb):
            if not g_rd(&g, k, 2 * lv, 1):
                continue
            w = g.I[1 + k * b + 3]
            if w == SENT:
                continue
            tgt = g.I[1 + k * b + 2]
            sf = c_search_until(&g, <long>tgt, c_prime, l_cap, scr, NULL, 0, &over)
            if sf.center == 0:
                continue
            rp = c_find_root(&g, sf.center)
            if rp >= 0 and gblock(&g, <long>rp - 1) != k:
                pending = 1
                break
    free(scr)
    return int(pending)


cdef i64 c_edge_weight(GCtx* g, u64 u, u64 v) nogil:
    cdef long first, last, gg, base = g.n + 1
    g_bounds(g, <long>u - 1, &first, &last)
    for gg in range(first, last + 1):
        if g.I[base + 2 * gg] == v:
            return <i64>g.I[base + 2 * gg + 1]
    return -1


cdef int c_tree_has_edge(u64* tree, long count, u64 mn, u64 mx) nogil:
    cdef long t
    cdef u64 a, bb
    for t in range(count):
        a = tree[3 * t]
        bb = tree[3 * t + 1]
        if (a if a < bb else bb) == mn and (bb if a < bb else a) == mx:
            return 1
    return 0


cdef int c_msf_query(GCtx* g, u64 u, u64 v, long c_prime, long l_cap,
                     u64* scr, u64* tree, int* over) nogil:
    cdef i64 wq = c_edge_weight(g, u, v)
    if wq < 0:
        return -1
    cdef u64 mn = u if u < v else v
    cdef u64 mx = v if u < v else u
    cdef SearchOut su, sv
    cdef u64 s
    cdef long k, steps
    cdef u64 src, tgt, sw
    su = c_search_until(g, <long>u, c_prime, l_cap, scr, tree, l_cap + 2, over)
    if over[0]:
        return -2
    if c_tree_has_edge(tree, su.tree_count, mn, mx):
        return 1
    if su.center == 0:
        return 0
    sv = c_search_until(g, <long>v, c_prime, l_cap, scr, tree, l_cap + 2, over)
    if over[0]:
        return -2
    if c_tree_has_edge(tree, sv.tree_count, mn, mx):
        return 1
    if sv.center == 0 or su.center == sv.center:
        return 0
    cdef u64 centers[2]
    centers[0] = su.center
    centers[1] = sv.center
    cdef int ci
    for ci in range(2):
        s = centers[ci]
        k = gblock(g, <long>s - 1)
        steps = 0
        while steps <= g.nb:
            if g.mode == 2:
                sw = g.I[1 + k * g.b + 3]
                if sw == <u64>wq:
                    src = g.I[1 + k * g.b + 1]
                    tgt = g.I[1 + k * g.b + 2]
                    if (src if src < tgt else tgt) == mn and (tgt if src < tgt else src) == mx:
                        return 1
                if g_rd(g, k, 2 * g.lv, 1):
                    break
                k = gblock(g, <long>g_rd(g, k, g.lv, <int>g.lv) - 1)
                steps += 1
            else:
                break
    return 0


def gmsf_query(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
               int mode, long u, long v, long c_prime):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef u64* scr = <u64*>malloc(scratch_words(l_cap) * sizeof(u64))
    cdef u64* tree = <u64*>malloc(3 * (l_cap + 2) * sizeof(u64))
    cdef int over = 0
    cdef int got
    with nogil:
        got = c_msf_query(&g, <u64>u, <u64>v, c_prime, l_cap, scr, tree, &over)
    free(scr)
    free(tree)
    return int(got)


def gconn_query(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                int mode, long v, long c_prime):
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef u64* scr = <u64*>malloc(scratch_words(l_cap) * sizeof(u64))
    cdef SearchOut out
    cdef int over = 0
    cdef i64 r
    with nogil:
        out = c_search_until(&g, v, c_prime, l_cap, scr, NULL, 0, &over)
    free(scr)
    if out.center:
        r = gfind_root_helper(&g)
        with nogil:
            r = c_find_root(&g, out.center)
        if r < 0:
            raise_invariant()
        return int(r)
    return int(out.min_label)


cdef i64 gfind_root_helper(GCtx* g):
    return 0


def raise_invariant():
    from .errors import InvariantError
    raise InvariantError("parent links form a cycle")


def gmsf_query_batch(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                     int mode, u64[::1] us, u64[::1] vs, long c_prime,
                     long[::1] out, int threads):
    """Batched queries for the verification harness; out[i] in {-2,-1,0,1}."""
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef long words = scratch_words(l_cap)
    cdef long twords = 3 * (l_cap + 2)
    cdef u64* pool = <u64*>malloc(<size_t>threads * (words + twords) * sizeof(u64))
    cdef long i
    cdef int over
    cdef u64* scr
    with nogil:
        for i in prange(us.shape[0], num_threads=threads, schedule='dynamic'):
            over = 0
            scr = pool + openmp.omp_get_thread_num() * (words + twords)
            out[i] = c_msf_query(&g, us[i], vs[i], c_prime, l_cap, scr, scr + words, &over)
    free(pool)


def gconn_query_batch(u64[::1] I, long n, long m, long b, long nb, long lv, long loff,
                      int mode, long c_prime, u64[::1] out, int threads):
    """Component label of every vertex 1..n."""
    cdef GCtx g
    g.I = &I[0]
    g.n = n; g.m = m; g.b = b; g.nb = nb; g.lv = lv; g.loff = loff; g.mode = mode
    cdef long base_l
    cdef long kmax = search_levels(&g, c_prime, &base_l)
    cdef long l_cap = (<long>1 << kmax) * base_l
    cdef long words = scratch_words(l_cap)
    cdef u64* pool = <u64*>malloc(<size_t>threads * words * sizeof(u64))
    cdef long j
    cdef int over
    cdef SearchOut so
    cdef i64 r
    cdef u64* scr
    with nogil:
        for j in prange(n, num_threads=threads, schedule='dynamic'):
            over = 0
            scr = pool + openmp.omp_get_thread_num() * words
            so = c_search_until(&g, j + 1, c_prime, l_cap, scr, NULL, 0, &over)
            if so.center:
                r = c_find_root(&g, so.center)
                out[j] = <u64>r if r >= 0 else SENT
            else:
                out[j] = so.min_label
    free(pool)
