import numpy as np
import pytest

from pipal import graph as gr
from pipal import reference as ref
from pipal.errors import ContractViolation, InvariantError


def random_graph(rng, n, extra_edges, wmax=8):
    """Connected-ish simple graph with duplicate weights, no isolated vertex."""
    edges = {}
    perm = rng.permutation(n) + 1
    for i in range(1, n):  # random spanning tree keeps degrees positive
        u = int(perm[i])
        v = int(perm[rng.integers(0, i)])
        edges[(min(u, v), max(u, v))] = int(rng.integers(1, wmax))
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 20 * (extra_edges + 1):
        tries += 1
        u, v = rng.integers(1, n + 1, size=2)
        if u != v and (min(u, v), max(u, v)) not in edges:
            edges[(min(int(u), int(v)), max(int(u), int(v)))] = int(rng.integers(1, wmax))
    return [(u, v, w) for (u, v), w in edges.items()]


def multi_component_graph(rng, sizes, extra=1, wmax=8):
    """Disjoint random components with the given vertex counts."""
    edges = []
    start = 1
    for sz in sizes:
        sub = random_graph(rng, sz, extra, wmax)
        edges.extend((u + start - 1, v + start - 1, w) for u, v, w in sub)
        start += sz
    return sum(sizes), edges


def build(edges, n, seed=0, c_prime=gr.DEFAULT_C_PRIME, backend="python", hook=None):
    g = gr.CsrGraph.from_edges(n, edges)
    oracle = gr.build_oracle(g, seed=seed, c_prime=c_prime, backend=backend, hook=hook)
    return g, oracle


class TestCsrGraph:
    def test_layout_and_degrees(self):
        g = gr.CsrGraph.from_edges(3, [(1, 2, 5), (2, 3, 7)])
        assert g.n == 3 and g.m == 2
        assert [g.degree(p) for p in (1, 2, 3)] == [1, 2, 1]
        assert len(g.words) == 3 + 4 * 2 + 1
        g.validate()

    def test_path_graph_offsets(self):
        g = gr.CsrGraph.from_edges(3, [(1, 2, 1), (2, 3, 1)])
        assert g.words[1:4].tolist() == [0, 2, 3]

    def test_rejects_isolated_vertex(self):
        with pytest.raises(ContractViolation):
            gr.CsrGraph.from_edges(3, [(1, 2, 1)])

    def test_rejects_parallel_and_self_edges(self):
        with pytest.raises(ContractViolation):
            gr.CsrGraph.from_edges(2, [(1, 2, 1), (2, 1, 3)])
        with pytest.raises(ContractViolation):
            gr.CsrGraph.from_edges(2, [(1, 1, 1), (1, 2, 1)])

    def test_rejects_huge_weight(self):
        with pytest.raises(ContractViolation):
            gr.CsrGraph.from_edges(2, [(1, 2, 2**40)])

    def test_roundtrip_edges(self):
        rng = np.random.default_rng(0)
        edges = random_graph(rng, 30, 40)
        g = gr.CsrGraph.from_edges(30, edges)
        g.validate()
        assert sorted((u, v, w) for u, v, w in g.edge_triples()) == sorted(
            (min(u, v), max(u, v), w) for u, v, w in edges)


class TestModes:
    def test_mode_selection(self):
        rng = np.random.default_rng(1)
        tiny = gr.CsrGraph.from_edges(4, [(1, 2, 1), (3, 4, 2), (2, 3, 3)])
        assert gr.plan_oracle(tiny).mode == 0
        medium = gr.CsrGraph.from_edges(60, random_graph(rng, 60, 30))
        assert gr.plan_oracle(medium).mode == 1
        big = gr.CsrGraph.from_edges(300, random_graph(rng, 300, 20))
        assert gr.plan_oracle(big).mode == 2
        assert gr.plan_oracle(big).nb >= 2

    def test_codec_floor(self):
        b, lv, loff = gr.codec_block_size(256, 1024)
        assert b >= 10 * 8 + 7
        assert b % 2 == 0


class TestSortAdjacency:
    @pytest.mark.parametrize("seed", range(4))
    def test_lists_sorted_and_symmetry_kept(self, seed, backend_name):
        rng = np.random.default_rng(seed)
        edges = random_graph(rng, 40, 60)
        g = gr.CsrGraph.from_edges(40, edges)
        offs_before = g.words[1:41].copy()
        oracle = gr.plan_oracle(g, backend=backend_name)
        gr.sort_adjacency(oracle)
        assert np.array_equal(g.words[1:41], offs_before)
        g.validate()
        for p in range(1, 41):
            first, last = g.entry_bounds(p)
            seen = [g.entry(t) for t in range(first, last + 1)]
            assert seen == sorted(seen, key=lambda e: (e[1], e[0]))


class TestOffsetRead:
    @pytest.mark.parametrize("shape", [(40, 40), (300, 80), (600, 150)])
    def test_snapshot_after_every_stage(self, shape, backend_name):
        n, extra = shape
        if backend_name == "python" and n > 300:
            pytest.skip("large build is compiled-only")
        rng = np.random.default_rng(n)
        edges = random_graph(rng, n, extra)
        g = gr.CsrGraph.from_edges(n, edges)
        snapshot = g.words[1 : n + 1].copy()
        failures = []

        def hook(stage, oracle):
            for p in range(1, n + 1):
                if oracle.offset_read(p) != int(snapshot[p - 1]):
                    failures.append((stage, p))

        _, oracle = build(edges, n, backend=backend_name, hook=hook)
        assert not failures
        for p in range(1, n + 1):
            assert oracle.offset_read(p) == int(snapshot[p - 1])

    def test_degrees_via_offset_read(self, backend_name):
        rng = np.random.default_rng(7)
        edges = random_graph(rng, 300, 50)
        g = gr.CsrGraph.from_edges(300, edges)
        degs = [g.degree(p) for p in range(1, 301)]
        _, oracle = build(edges, 300, backend=backend_name)
        got = []
        for p in range(1, 301):
            last = oracle.offset_read(p)
            first = oracle.offset_read(p - 1) + 1 if p > 1 else 0
            got.append(last - first + 1)
        assert got == degs


class TestCenters:
    def test_deterministic_and_in_range(self):
        rng = np.random.default_rng(3)
        edges = random_graph(rng, 300, 30)
        g1 = gr.CsrGraph.from_edges(300, edges)
        o1 = gr.plan_oracle(g1, seed=5)
        g2 = gr.CsrGraph.from_edges(300, edges)
        o2 = gr.plan_oracle(g2, seed=5)
        for o in (o1, o2):
            o._be().gcodec_init(*o.meta(), 1)
            gr.choose_centers(o)
        for k in range(o1.nb):
            c1, c2 = o1.center_of_block(k), o2.center_of_block(k)
            assert c1 == c2
            lo = k * o1.b + 1
            hi = (k + 1) * o1.b if k < o1.nb - 1 else 300
            assert lo <= c1 <= hi

    def test_single_block_center(self):
        rng = np.random.default_rng(4)
        edges = random_graph(rng, 40, 10)
        g = gr.CsrGraph.from_edges(40, edges)
        o = gr.plan_oracle(g, seed=1)
        gr.choose_centers(o)
        assert 1 <= o.center_of_block(0) <= 40

    def test_center_distribution_uniform(self):
        rng = np.random.default_rng(5)
        edges = random_graph(rng, 300, 30)
        g = gr.CsrGraph.from_edges(300, edges)
        o = gr.plan_oracle(g)
        counts = np.zeros(o.b)
        trials = 3000
        for seed in range(trials):
            o.seed = seed
            gr.choose_centers(o)
            counts[o.center_of_block(0) - 1] += 1
        expect = trials / o.b
        sigma = (trials * (1 / o.b) * (1 - 1 / o.b)) ** 0.5
        assert np.all(np.abs(counts - expect) < 6 * sigma)


def oracle_centers(oracle):
    return {oracle.center_of_block(k) for k in range(oracle.nb)} if oracle.mode else set()


class TestCenterSearch:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_reference_first_center(self, seed, backend_name):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(20, 90))
        sizes = [n] if seed % 2 else [n, int(rng.integers(4, 20))]
        total, edges = multi_component_graph(rng, sizes, extra=int(rng.integers(0, 20)))
        g = gr.CsrGraph.from_edges(total, edges)
        oracle = gr.plan_oracle(g, seed=seed, backend=backend_name)
        oracle._be().gcodec_init(*oracle.meta(), 1)
        gr.sort_adjacency(oracle)
        gr.choose_centers(oracle)
        centers = oracle_centers(oracle)
        for u in range(1, total + 1):
            want = ref.ref_prim_first_center(total, edges, centers, u)
            got, _, exhausted, _, _ = oracle.center_search(u, L=4 * total)
            if want is None:
                assert got == 0 and exhausted
            else:
                assert got == want

    def test_start_is_center(self):
        rng = np.random.default_rng(9)
        edges = random_graph(rng, 40, 10)
        _, oracle = build(edges, 40)
        c = oracle.center_of_block(0)
        got, visited, _, _, _ = oracle.center_search(c, L=100)
        assert got == c and visited == 1

    def test_path_to_far_center_records_tree(self):
        edges = [(i, i + 1, 5) for i in range(1, 40)]
        g = gr.CsrGraph.from_edges(40, edges)
        oracle = gr.plan_oracle(g, seed=0)
        gr.sort_adjacency(oracle)
        # place the center by trying seeds until it lands on vertex 40
        for seed in range(500):
            oracle.seed = seed
            gr.choose_centers(oracle)
            if oracle.center_of_block(0) == 40:
                break
        else:
            pytest.fail("no seed put the center at the path end")
        got, visited, _, _, tree = oracle.center_search(1, L=100, record_tree=True)
        assert got == 40 and visited == 40
        assert [(p, c) for p, c, _ in tree] == [(i, i + 1) for i in range(1, 40)]

    def test_eviction_threshold_bounds_queue(self):
        rng = np.random.default_rng(11)
        edges = random_graph(rng, 60, 200)
        g = gr.CsrGraph.from_edges(60, edges)
        oracle = gr.plan_oracle(g, seed=2)
        gr.sort_adjacency(oracle)
        gr.choose_centers(oracle)
        got, visited, exhausted, _, _ = oracle.center_search(1, L=4)
        assert visited <= 5
        if not got:
            assert not exhausted  # eviction happened, must retry bigger


def cluster_graph(total, edges, centers):
    """Reference cluster assignment and cross-cluster multigraph."""
    cluster = {u: ref.ref_prim_first_center(total, edges, centers, u)
               for u in range(1, total + 1)}
    cross = [(u, v, w) for u, v, w in edges
             if cluster[u] is not None and cluster[v] is not None and cluster[u] != cluster[v]]
    return cluster, cross


def kruskal_on_clusters(cluster, cross):
    """Forest of the cluster multigraph keyed by the original edge key."""
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    forest = set()
    for u, v, w in sorted(cross, key=lambda e: ref.edge_key(*e)):
        ru, rv = find(cluster[u]), find(cluster[v])
        if ru != rv:
            parent[ru] = rv
            forest.add((min(u, v), max(u, v), w))
    return forest


def stored_edges(oracle):
    out = set()
    I = oracle.graph.words
    for k in range(oracle.nb):
        src, tgt, w = (int(I[1 + k * oracle.b + 1]), int(I[1 + k * oracle.b + 2]),
                       int(I[1 + k * oracle.b + 3]))
        if w != gr.SENT:
            out.add((min(src, tgt), max(src, tgt), w))
    return out


class TestBoruvka:
    @pytest.mark.parametrize("seed", range(5))
    def test_first_round_stores_component_minima(self, seed, backend_name):
        rng = np.random.default_rng(200 + seed)
        edges = random_graph(rng, 300, int(rng.integers(10, 120)))
        g = gr.CsrGraph.from_edges(300, edges)
        oracle = gr.plan_oracle(g, seed=seed, backend=backend_name)
        assert oracle.mode == 2
        oracle._be().gcodec_init(*oracle.meta(), 1)
        gr.sort_adjacency(oracle)
        gr.choose_centers(oracle)
        centers = oracle_centers(oracle)
        cluster, cross = cluster_graph(300, edges, centers)
        progressed = gr.boruvka_round(oracle, 0)
        by_root = {}
        for u, v, w in cross:
            for side in (u, v):
                c = cluster[side]
                key = ref.edge_key(u, v, w)
                if c not in by_root or key < by_root[c]:
                    by_root[c] = key
        got = {}
        I = oracle.graph.words
        for k in range(oracle.nb):
            src, tgt, w = (int(I[1 + k * oracle.b + 1]), int(I[1 + k * oracle.b + 2]),
                           int(I[1 + k * oracle.b + 3]))
            if w != gr.SENT:
                got[oracle.center_of_block(k)] = ref.edge_key(src, tgt, w)
        assert got == by_root
        assert progressed == bool(by_root)

    def test_single_cluster_no_progress(self):
        # every vertex in one cluster: a path with tiny weights and 2 blocks
        rng = np.random.default_rng(6)
        edges = random_graph(rng, 300, 30)
        g = gr.CsrGraph.from_edges(300, edges)
        oracle = gr.plan_oracle(g, seed=0)
        oracle._be().gcodec_init(*oracle.meta(), 1)
        gr.sort_adjacency(oracle)
        gr.choose_centers(oracle)
        # force all blocks to share one center by rewriting the labels
        from pipal import _purecore as pc

        c0 = oracle.center_of_block(0)
        pc._gctx(oracle.b, oracle.nb, oracle.lv, oracle.loff, oracle.mode)
        for k in range(1, oracle.nb):
            pc._gwr(oracle.graph.words, k, oracle.b, 0, oracle.lv, c0)
        assert not gr.boruvka_round(oracle, 0)


class TestContraction:
    def test_mutual_roots_collapse(self):
        rng = np.random.default_rng(8)
        # two blocks, two clusters joined by edges: after one boruvka round
        # both roots store the same edge; iterate contraction to one root
        for seed in range(40):
            edges = random_graph(rng, 300, 40)
            g = gr.CsrGraph.from_edges(300, edges)
            oracle = gr.plan_oracle(g, seed=seed)
            oracle._be().gcodec_init(*oracle.meta(), 1)
            gr.sort_adjacency(oracle)
            gr.choose_centers(oracle)
            centers = oracle_centers(oracle)
            cluster, cross = cluster_graph(300, edges, centers)
            if len({c for c in cluster.values() if c}) < 2 or not cross:
                continue
            gr.boruvka_round(oracle, 0)
            rno = 0
            while gr.contraction_pending(oracle):
                gr.forest_contraction_round(oracle, rno)
                rno += 1
                assert rno < 200
            roots = [k for k in range(oracle.nb)
                     if oracle._be().gfind_root(*oracle.meta(), oracle.center_of_block(k))
                     == oracle.center_of_block(k)]
            assert len(roots) >= 1
            return
        pytest.fail("no seed produced two clusters")

    def test_find_root_chain_and_cycle_guard(self):
        rng = np.random.default_rng(10)
        edges = random_graph(rng, 600, 100)
        g = gr.CsrGraph.from_edges(600, edges)
        oracle = gr.plan_oracle(g, seed=0)
        assert oracle.nb >= 3
        oracle._be().gcodec_init(*oracle.meta(), 1)
        gr.choose_centers(oracle)
        from pipal import _purecore as pc

        pc._gctx(oracle.b, oracle.nb, oracle.lv, oracle.loff, oracle.mode)
        c = [oracle.center_of_block(k) for k in range(oracle.nb)]
        # chain: block2 -> block1 -> block0 (root)
        pc._gwr(g.words, 1, oracle.b, oracle.lv, oracle.lv, c[0])
        pc._gwr(g.words, 1, oracle.b, 2 * oracle.lv, 1, 0)
        pc._gwr(g.words, 2, oracle.b, oracle.lv, oracle.lv, c[1])
        pc._gwr(g.words, 2, oracle.b, 2 * oracle.lv, 1, 0)
        assert oracle.find_root(c[2]) == c[0]
        # corrupt into a cycle: block0 -> block2
        pc._gwr(g.words, 0, oracle.b, oracle.lv, oracle.lv, c[2])
        pc._gwr(g.words, 0, oracle.b, 2 * oracle.lv, 1, 0)
        with pytest.raises(InvariantError):
            oracle.find_root(c[2])


class TestBuildAndQueries:
    def graph_case(self, seed, n, extra, components=None, backend="python"):
        rng = np.random.default_rng(seed)
        if components:
            total, edges = multi_component_graph(rng, components,
                                                 extra=extra)
        else:
            total, edges = n, random_graph(rng, n, extra)
        g, oracle = build(edges, total, seed=seed, backend=backend)
        return total, edges, g, oracle

    @pytest.mark.parametrize("case", [
        dict(seed=0, n=24, extra=10),            # mode 1
        dict(seed=1, n=60, extra=40),            # mode 1, denser
        dict(seed=2, n=300, extra=30),           # mode 2, two blocks
        dict(seed=3, n=300, extra=120),          # mode 2, more cross edges
        dict(seed=4, n=4, extra=1),              # mode 0 (centerless everywhere)
        dict(seed=5, n=0, extra=2, components=[40, 7, 12]),
        dict(seed=6, n=0, extra=1, components=[150, 150]),
    ])
    def test_msf_matches_kruskal(self, case, backend_name):
        backend = backend_name
        total, edges, g, oracle = self.graph_case(
            case["seed"], case["n"], case["extra"], case.get("components"), backend)
        want = ref.ref_kruskal(total, edges)
        for u, v, w in edges:
            got = oracle.msf_query(u, v)
            assert got == ((min(u, v), max(u, v), w) in want), (u, v, w)

    @pytest.mark.parametrize("case", [
        dict(seed=10, n=40, extra=5),
        dict(seed=11, n=300, extra=20),
        dict(seed=12, n=0, extra=1, components=[30, 4, 4, 20]),
        dict(seed=13, n=5, extra=1),
    ])
    def test_connectivity_matches_bfs(self, case, backend_name):
        total, edges, g, oracle = self.graph_case(
            case["seed"], case["n"], case["extra"], case.get("components"), backend_name)
        want = ref.ref_components(total, edges)
        labels = [oracle.connectivity_query(v) for v in range(1, total + 1)]
        classes = {}
        for v in range(1, total + 1):
            classes.setdefault(labels[v - 1], set()).add(v)
            assert 1 <= labels[v - 1] <= total
        want_classes = {}
        for v in range(1, total + 1):
            want_classes.setdefault(want[v], set()).add(v)
        assert sorted(map(sorted, classes.values())) == sorted(map(sorted, want_classes.values()))

    def test_tree_graph_all_edges_in_forest(self, backend_name):
        rng = np.random.default_rng(20)
        edges = random_graph(rng, 50, 0)
        _, oracle = build(edges, 50, backend=backend_name)
        assert all(oracle.msf_query(u, v) for u, v, _ in edges)

    def test_triangle_heaviest_edge_out(self):
        edges = [(1, 2, 1), (2, 3, 2), (1, 3, 3)]
        _, oracle = build(edges, 3)
        assert oracle.msf_query(1, 2) and oracle.msf_query(2, 3)
        assert not oracle.msf_query(1, 3)

    def test_non_edge_query_rejected(self):
        edges = [(1, 2, 1), (2, 3, 2)]
        _, oracle = build(edges, 3)
        with pytest.raises(ContractViolation):
            oracle.msf_query(1, 3)

    def test_stored_forest_matches_cluster_kruskal(self, backend_name):
        hits = 0
        for seed in range(25):
            rng = np.random.default_rng(400 + seed)
            edges = random_graph(rng, 300, int(rng.integers(20, 150)))
            g, oracle = build(edges, 300, seed=seed, backend=backend_name)
            if oracle.mode != 2:
                continue
            centers = oracle_centers(oracle)
            cluster, cross = cluster_graph(300, edges, centers)
            if not cross:
                continue
            hits += 1
            want = kruskal_on_clusters(cluster, cross)
            assert stored_edges(oracle) >= want
            extra = stored_edges(oracle) - want
            # duplicates from symmetric minima are fine; they must at least
            # be cross-cluster edges with correct keys
            for u, v, w in extra:
                assert cluster[u] != cluster[v]
            if hits >= 5:
                return
        pytest.fail("corpus never produced a multi-cluster instance")

    def test_centerless_component_label_is_min_vertex(self):
        # component {301..303} exists in a mode-2 graph; pick a seed whose
        # centers all avoid it (its vertices live in the absorbing block)
        rng = np.random.default_rng(30)
        base = random_graph(rng, 300, 40)
        edges = base + [(301, 302, 1), (302, 303, 2)]
        for seed in range(200):
            g = gr.CsrGraph.from_edges(303, edges)
            oracle = gr.build_oracle(g, seed=seed, backend="python")
            if oracle.mode != 2:
                pytest.skip("unexpected mode")
            centers = oracle_centers(oracle)
            if centers & {301, 302, 303}:
                continue
            for v in (301, 302, 303):
                assert oracle.connectivity_query(v) == 301
            assert oracle.msf_query(301, 302)
            assert oracle.msf_query(302, 303)
            return
        pytest.fail("no seed kept the small component centerless")

    def test_corrupted_parent_detected(self):
        rng = np.random.default_rng(31)
        edges = random_graph(rng, 600, 80)
        g, oracle = build(edges, 600, seed=3)
        if oracle.mode != 2 or oracle.nb < 3:
            pytest.skip("need several blocks")
        from pipal import _purecore as pc

        pc._gctx(oracle.b, oracle.nb, oracle.lv, oracle.loff, oracle.mode)
        # point two non-root blocks at each other
        c = [oracle.center_of_block(k) for k in range(oracle.nb)]
        pc._gwr(g.words, 0, oracle.b, oracle.lv, oracle.lv, c[1])
        pc._gwr(g.words, 0, oracle.b, 2 * oracle.lv, 1, 0)
        pc._gwr(g.words, 1, oracle.b, oracle.lv, oracle.lv, c[0])
        pc._gwr(g.words, 1, oracle.b, 2 * oracle.lv, 1, 0)
        with pytest.raises(InvariantError):
            oracle.find_root(c[0])
