import numpy as np
import pytest

from conftest import distinct_sorted, merge_instance
from pipal import merge as mg
from pipal import reference as ref
from pipal.errors import ContractViolation


def make_plan(rng, n_blocks_a, n_blocks_b, b=None, backend="python", seed=0, **opts):
    """Instance whose sides are exact multiples of a smallish block size."""
    if b is None:
        b = 8 * max(1, (n_blocks_a + n_blocks_b - 1).bit_length()) + 8
    arr, split = merge_instance(np.random.default_rng(rng), n_blocks_a * b, n_blocks_b * b)
    plan = mg.plan_merge(arr, split, block_size=b, seed=seed, backend=backend, **opts)
    return plan, arr, split


def endpoint_order_oracle(plan):
    """Stable sort of original blocks by endpoint = expected end-sorted order."""
    eps = [plan.endpoint(i) for i in range(plan.layout.n_blocks)]
    return sorted(range(len(eps)), key=lambda i: eps[i])


class TestLayout:
    def test_default_block_size_even_and_fits(self):
        for total in [10, 1000, 10**6]:
            b = mg.default_block_size(total)
            assert b % 2 == 0
            mg.plan_layout(total // 2, total - total // 2, b, False, False)

    def test_rejects_odd_block(self):
        with pytest.raises(ContractViolation):
            mg.plan_layout(100, 100, 41, False, False)

    def test_rejects_block_too_small_for_field_budget(self):
        # 2**7 blocks of size 16 need 7-bit fields: 16 < 8*7+8
        with pytest.raises(ContractViolation):
            mg.plan_layout(1024, 1024, 16, False, False)

    def test_split_leaves_room_both_sides(self):
        lay = mg.plan_layout(2048, 2048, 64, False, False)
        L = lay.lbits
        assert lay.s == 64 - (2 * (L + 2) + 1)
        assert lay.s >= 2 * (3 * L + 1)

    def test_padding_arithmetic(self):
        lay = mg.plan_layout(100, 70, 64, False, False)
        assert (lay.pad_lo + 100) % 64 == 0
        assert (lay.pad_hi + 70) % 64 == 0
        assert lay.n_blocks == (lay.pad_lo + 170 + lay.pad_hi) // 64


class TestMetadata:
    def test_disjoint_ranges_trivial(self):
        # all left endpoints below all right endpoints: T[i] = i
        b = 32
        left = np.arange(1000, 1000 + 2 * b, dtype=np.uint64)
        right = np.arange(5000, 5000 + 2 * b, dtype=np.uint64)
        arr = np.concatenate([left, right])
        plan = mg.plan_merge(arr, 2 * b, block_size=b, backend="python")
        mg.compute_block_metadata(plan)
        for i in range(plan.layout.n_blocks):
            assert plan.read_field(i, "tpos") == i
            assert plan.read_field(i, "rank") == (0 if i < 2 else 2)

    @pytest.mark.parametrize("seed", range(6))
    def test_tpos_matches_endpoint_sort(self, seed, backend_name):
        plan, _, _ = make_plan(seed, 8, 8, backend=backend_name)
        mg.compute_block_metadata(plan)
        order = endpoint_order_oracle(plan)
        for pos, i in enumerate(order):
            assert plan.read_field(i, "tpos") == pos

    @pytest.mark.parametrize("seed", range(4))
    def test_inv_points_at_next_larger_opposite(self, seed):
        plan, _, _ = make_plan(100 + seed, 5, 7)
        mg.compute_block_metadata(plan)
        lay = plan.layout
        order = endpoint_order_oracle(plan)
        pos_of = {i: p for p, i in enumerate(order)}
        for i in range(lay.n_blocks):
            e = plan.endpoint(i)
            opp = range(lay.n_left_blocks, lay.n_blocks) if i < lay.n_left_blocks \
                else range(lay.n_left_blocks)
            larger = [j for j in opp if plan.endpoint(j) > e]
            want = pos_of[min(larger, key=plan.endpoint)] if larger else lay.n_blocks - 1
            assert plan.read_field(i, "inv") == want


class TestEndMerge:
    def test_already_end_sorted_zero_rounds(self):
        b = 32
        left = np.arange(1000, 1000 + 2 * b, dtype=np.uint64)
        right = np.arange(5000, 5000 + 2 * b, dtype=np.uint64)
        arr = np.concatenate([left, right])
        plan = mg.plan_merge(arr, 2 * b, block_size=b, backend="python")
        mg.compute_block_metadata(plan)
        assert mg.end_merge(plan) == 0
        assert mg.done(plan)

    @pytest.mark.parametrize("seed", range(8))
    def test_end_sorted_and_multiset_preserved(self, seed, backend_name):
        plan, arr, _ = make_plan(seed, 6, 6, backend=backend_name, seed=seed)
        before_blocks = sorted(tuple(sorted(plan.block_copy(i).tolist()))
                               for i in range(plan.layout.n_blocks))
        before_all = np.sort(arr.copy())
        mg.compute_block_metadata(plan)
        mg.end_merge(plan)
        eps = [plan.endpoint(i) for i in range(plan.layout.n_blocks)]
        assert eps == sorted(eps)
        after_blocks = sorted(tuple(sorted(plan.block_copy(i).tolist()))
                              for i in range(plan.layout.n_blocks))
        assert after_blocks == before_blocks
        assert np.array_equal(np.sort(arr), before_all)
        assert mg.done(plan)

    @pytest.mark.parametrize("opts", [
        {"precoined": True},
        {"round_cap": True},
        {"cache_targets": True},
        {"precoined": True, "round_cap": True, "cache_targets": True},
    ])
    def test_optimization_flags_still_end_sort(self, opts, backend_name):
        for seed in range(4):
            plan, arr, split = make_plan(seed, 5, 6, b=200, backend=backend_name,
                                         seed=seed, **opts)
            snapshot = np.sort(arr.copy())
            mg.compute_block_metadata(plan)
            mg.end_merge(plan)
            eps = [plan.endpoint(i) for i in range(plan.layout.n_blocks)]
            assert eps == sorted(eps)
            assert np.array_equal(np.sort(arr), snapshot)

    def test_round_cap_forces_cycle_leader(self):
        # cap of zero rounds: everything is placed by the cycle-leader pass
        plan, arr, _ = make_plan(3, 6, 6, seed=5)
        mg.compute_block_metadata(plan)
        plan.opts["round_cap"] = True
        rounds = plan.backend.end_merge(*plan._kargs(), plan.seed, plan.threads,
                                        plan.flag, 0, -1, 0)
        eps = [plan.endpoint(i) for i in range(plan.layout.n_blocks)]
        assert eps == sorted(eps)

    def test_done_flag_semantics(self):
        plan, _, _ = make_plan(1, 3, 3)
        mg.compute_block_metadata(plan)
        assert not mg.done(plan)  # random instance: some block is misplaced
        mg.end_merge(plan)
        assert mg.done(plan)


class TestSortPhase:
    def test_separate_hand_case(self):
        # two blocks [1,4] / [2,3] conceptually: build with real block size
        b = 32
        rng = np.random.default_rng(0)
        lo = np.sort(rng.choice(np.arange(10**6, 2 * 10**6), b, replace=False)).astype(np.uint64)
        hi = np.sort(rng.choice(np.arange(3 * 10**6, 4 * 10**6), b, replace=False)).astype(np.uint64)
        # interleave so each block holds a mix: left block gets evens, right odds
        both = np.sort(np.concatenate([lo, hi]))
        left, right = both[0::2], both[1::2]
        arr = np.concatenate([left, right])
        plan = mg.plan_merge(arr, b, block_size=b, backend="python")
        mg.compute_block_metadata(plan)
        mg.end_merge(plan)
        mg.separate(plan, 0, 2)
        assert max(plan.block_copy(0)) <= min(plan.block_copy(1))

    @pytest.mark.parametrize("seed", range(5))
    def test_separate_splits_value_ranges(self, seed, backend_name):
        plan, _, _ = make_plan(seed + 40, 4, 4, backend=backend_name, seed=seed)
        mg.compute_block_metadata(plan)
        mg.end_merge(plan)
        nb = plan.layout.n_blocks
        mg.separate(plan, 0, nb)
        left_max = max(max(plan.block_copy(i)) for i in range(nb // 2))
        right_min = min(min(plan.block_copy(i)) for i in range(nb // 2, nb))
        assert left_max <= right_min

    @pytest.mark.parametrize("seed", range(5))
    def test_recursive_seq_sort_sorts(self, seed, backend_name):
        plan, arr, _ = make_plan(seed + 60, 4, 5, backend=backend_name, seed=seed)
        want = np.sort(arr.copy())
        mg.compute_block_metadata(plan)
        mg.end_merge(plan)
        mg.seq_sort(plan, 0, plan.layout.n_blocks)
        mg.finish_plan(plan)
        assert np.array_equal(arr, want)

    def test_single_block_reset(self):
        plan, _, _ = make_plan(2, 2, 2)
        mg.compute_block_metadata(plan)
        mg.end_merge(plan)
        blk0 = plan.block_copy(0)
        mg.seq_sort(plan, 0, 1)
        assert np.array_equal(plan.block_copy(0), np.sort(blk0))


class TestFullMerge:
    def test_trivial_interleave(self):
        arr = np.array([1, 3, 5, 2, 4, 6], dtype=np.uint64) * 10**6
        mg.merge(arr, 3, backend="python")
        assert np.all(arr[1:] > arr[:-1])

    def test_empty_side_is_noop(self):
        arr = distinct_sorted(np.random.default_rng(0), 50)
        before = arr.copy()
        mg.merge(arr, 0, backend="python")
        assert np.array_equal(arr, before)
        mg.merge(arr, len(arr), backend="python")
        assert np.array_equal(arr, before)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_reference_block_path(self, seed, backend_name):
        rng = np.random.default_rng(seed)
        b = 72
        n = int(rng.integers(1, 20)) * b + int(rng.integers(0, b))
        m = int(rng.integers(1, 20)) * b + int(rng.integers(0, b))
        arr, split = merge_instance(rng, n, m)
        want = ref.ref_merge(np.sort(arr[:split]), np.sort(arr[split:]))
        stats = mg.merge(arr, split, block_size=b, seed=seed, backend=backend_name)
        assert not stats["small_path"]
        assert np.array_equal(arr, want)

    @pytest.mark.parametrize("sizes", [(1, 1), (7, 3), (100, 1), (1, 100), (65, 64)])
    def test_small_path(self, sizes):
        rng = np.random.default_rng(sum(sizes))
        arr, split = merge_instance(rng, *sizes)
        want = ref.ref_merge(arr[:split].copy(), np.sort(arr[split:]))
        mg.merge(arr, split, backend="python")
        assert np.array_equal(arr, want)

    @pytest.mark.parametrize("opts", [
        {"precoined": True},
        {"round_cap": True},
        {"cache_targets": True},
        {"precoined": True, "round_cap": True, "cache_targets": True},
    ])
    def test_optimizations_preserve_result(self, opts, backend_name):
        rng = np.random.default_rng(13)
        arr, split = merge_instance(rng, 1000, 1100)
        want = ref.ref_merge(np.sort(arr[:split]), np.sort(arr[split:]))
        mg.merge(arr, split, block_size=200, seed=3, backend=backend_name, **opts)
        assert np.array_equal(arr, want)

    def test_non_divisible_sizes_use_sentinel_padding(self, backend_name):
        rng = np.random.default_rng(5)
        b = 72
        arr, split = merge_instance(rng, b + 3, b + 1)
        want = ref.ref_merge(np.sort(arr[:split]), np.sort(arr[split:]))
        stats = mg.merge(arr, split, block_size=b, backend=backend_name)
        assert np.array_equal(arr, want)
        if not stats["small_path"]:
            assert stats["pad_lo"] or stats["pad_hi"]

    def test_sentinel_collision_rejected_in_verify_mode(self):
        import pipal

        rng = np.random.default_rng(6)
        b = 72
        arr, split = merge_instance(rng, b + 3, 4 * b)
        arr[0] = 3  # inside the reserved low range
        arr[:split] = np.sort(arr[:split])
        pipal.set_verify(True)
        try:
            with pytest.raises(ContractViolation):
                mg.merge(arr, split, block_size=b, backend="python")
        finally:
            pipal.set_verify(False)

    def test_seeded_runs_reproducible(self, backend_name):
        rng = np.random.default_rng(8)
        arr, split = merge_instance(rng, 500, 700)
        arr2 = arr.copy()
        s1 = mg.merge(arr, split, block_size=72, seed=42, backend=backend_name)
        s2 = mg.merge(arr2, split, block_size=72, seed=42, backend=backend_name)
        assert s1["rounds"] == s2["rounds"]
        assert np.array_equal(arr, arr2)


class TestInversionDiscipline:
    @staticmethod
    def block_minmax(plan):
        nb = plan.layout.n_blocks
        mins = np.empty(nb, dtype=np.uint64)
        maxs = np.empty(nb, dtype=np.uint64)
        for i in range(nb):
            blk = plan.block_copy(i)
            mins[i], maxs[i] = blk.min(), blk.max()
        return mins, maxs

    @pytest.mark.parametrize("seed", range(25))
    def test_out_of_order_pairs_match_clamped_inv(self, seed):
        rng = np.random.default_rng(900 + seed)
        na, nb_ = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        plan, _, _ = make_plan(300 + seed, na, nb_, seed=seed)
        mg.compute_block_metadata(plan)
        mg.end_merge(plan)
        nb = plan.layout.n_blocks
        mins, maxs = self.block_minmax(plan)
        inv = [plan.read_field(i, "inv") for i in range(nb)]
        for i in range(nb):
            for j in range(i + 1, nb):
                if maxs[i] > mins[j]:
                    assert j == min(nb - 1, inv[i]), (i, j, inv[i])


class TestAllocationLedger:
    def test_block_path_heap_bound(self):
        from pipal.bench import AllocationLedger

        rng = np.random.default_rng(77)
        b = 72
        arr, split = merge_instance(rng, 6 * b + 5, 7 * b + 9)
        ledger = AllocationLedger()
        mg.merge(arr, split, block_size=b, backend="python", threads=1, ledger=ledger)
        assert ledger.heap_words <= 4 * b + 16
        assert ledger.scratch_words <= 2 * b
