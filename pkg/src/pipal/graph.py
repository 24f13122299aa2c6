"""Spanning-forest and connectivity oracles stored inside a CSR graph.

The graph lives in one flat word array I = [n | offsets | edge entries].
Offsets are strictly increasing (no isolated vertices), so blocking the
offset region and stealing pair bits yields per-block storage for a
union-find over randomly chosen block centers.  Build: sort adjacency,
pick one center per block, then iterate rounds where every component's
minimum cut edge (by the (weight, min, max) key) is recorded at its root
block and roots contract by coin-flip star linking.  Queries run bounded
cheapest-first searches from the endpoints and inspect the stored edges
along root paths.

Three regimes depending on how much offset space exists:

- full (n >= 2 blocks of the computed codec size): the complete machinery;
- single-block (one center only): no union-find needed, queries reduce to
  search-tree membership;
- centerless (offset region too small for even one center label): every
  query falls back to exhaustive bounded search, which is how the
  algorithm treats centerless components anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import get_backend
from .errors import ContractViolation, InvariantError

SENT = (1 << 64) - 1
DEFAULT_C_PRIME = 4
DEFAULT_WEIGHT_EXPONENT = 4  # weights must stay below n**k


class CsrGraph:
    """Flat CSR storage: I[0] = n, n offsets, 2m interleaved (v, w) entries."""

    def __init__(self, words: np.ndarray):
        if words.dtype != np.uint64 or words.ndim != 1:
            raise ContractViolation("graph storage must be a 1-D uint64 array")
        self.words = words
        n = int(words[0])
        if n < 1 or len(words) < n + 1:
            raise ContractViolation("malformed graph header")
        self.n = n
        self.m = (len(words) - n - 1) // 4
        if len(words) != n + 4 * self.m + 1:
            raise ContractViolation("graph storage length does not match n + 4m + 1")

    @classmethod
    def from_edges(cls, n: int, edges, weight_exponent: int = DEFAULT_WEIGHT_EXPONENT):
        """Build from undirected (u, v, w) triples with vertices in 1..n."""
        if n < 1:
            raise ContractViolation("graphs must have at least one vertex")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
        seen = set()
        wmax = n ** weight_exponent
        for u, v, w in edges:
            if not (1 <= u <= n and 1 <= v <= n) or u == v:
                raise ContractViolation(f"bad edge ({u}, {v})")
            if (min(u, v), max(u, v)) in seen:
                raise ContractViolation(f"parallel edge ({u}, {v})")
            if not 0 <= w < wmax:
                raise ContractViolation(f"weight {w} outside [0, n^{weight_exponent})")
            seen.add((min(u, v), max(u, v)))
            adj[u].append((v, w))
            adj[v].append((u, w))
        degs = [len(adj[p]) for p in range(1, n + 1)]
        if min(degs) == 0:
            raise ContractViolation("degree-0 vertex: offsets would not be distinct")
        m = sum(degs) // 2
        words = np.empty(n + 4 * m + 1, dtype=np.uint64)
        words[0] = n
        entry = 0
        pos = n + 1
        for p in range(1, n + 1):
            entry += degs[p - 1]
            words[p] = entry - 1  # offset: global index of p's last entry
            for v, w in adj[p]:
                words[pos] = v
                words[pos + 1] = w
                pos += 2
        return cls(words)

    def validate(self) -> None:
        """Offsets strictly increasing and consistent; symmetric edge lists."""
        offs = self.words[1 : self.n + 1].astype(object)
        if any(offs[i] >= offs[i + 1] for i in range(self.n - 1)):
            raise ContractViolation("offsets must be strictly increasing")
        if int(offs[-1]) != 2 * self.m - 1:
            raise ContractViolation("last offset inconsistent with edge count")
        pairs = set()
        for u, v, w in self.edge_triples(directed=True):
            pairs.add((u, v, w))
        for u, v, w in pairs:
            if (v, u, w) not in pairs:
                raise ContractViolation(f"asymmetric edge ({u}, {v}, {w})")

    def degree(self, p: int) -> int:
        first, last = self.entry_bounds(p)
        return last - first + 1

    def entry_bounds(self, p: int) -> tuple[int, int]:
        last = int(self.words[p])
        first = int(self.words[p - 1]) + 1 if p > 1 else 0
        return first, last

    def entry(self, g: int) -> tuple[int, int]:
        base = self.n + 1 + 2 * g
        return int(self.words[base]), int(self.words[base + 1])

    def edge_triples(self, directed: bool = False):
        """Undirected (u, v, w) triples (or both directions when directed)."""
        for p in range(1, self.n + 1):
            first, last = self.entry_bounds(p)
            for g in range(first, last + 1):
                v, w = self.entry(g)
                if directed or p < v:
                    yield (p, v, w)


def codec_block_size(n: int, m: int) -> tuple[int, int, int]:
    """(block size, label bits, offset bits) for the full codec over n, m."""
    lv = max(1, n.bit_length())
    loff = max(1, (2 * m - 1).bit_length())
    b = 4 + 2 * (2 * lv + 2 + 4 * loff)
    # sanity: never below the coarse logarithmic floor
    floor = 10 * max(1, n.bit_length() - 1) + 7
    if b < floor:
        raise InvariantError("computed codec block is below the logarithmic floor")
    return b, lv, loff


@dataclass
class GraphOracle:
    """A built oracle: the mutated graph words plus codec geometry."""

    graph: CsrGraph
    mode: int
    b: int
    nb: int
    lv: int
    loff: int
    c_prime: int
    seed: int
    backend_name: str | None = None
    rounds: int = 0

    def meta(self) -> tuple:
        g = self.graph
        return (g.words, g.n, g.m, self.b, self.nb, self.lv, self.loff, self.mode)

    def _be(self):
        return get_backend(self.backend_name)

    # -- low-level accessors ---------------------------------------------

    def offset_read(self, p: int) -> int:
        """Original offset of vertex p, whatever the codec overwrote."""
        if not 1 <= p <= self.graph.n:
            raise ContractViolation("vertex out of range")
        return self._be().goffset_read(*self.meta(), p - 1)

    def center_of_block(self, k: int) -> int:
        be = get_backend("python")
        from . import _purecore

        _purecore._gctx(self.b, self.nb, self.lv, self.loff, self.mode)
        return _purecore._gcenter(self.graph.words, k, self.b, self.nb, self.lv, self.mode)

    def find_root(self, s: int) -> int:
        r = self._be().gfind_root(*self.meta(), s)
        if r < 0:
            raise InvariantError("parent links form a cycle")
        return r

    def center_search(self, u: int, L: int, record_tree: bool = False):
        return self._be().gcenter_search(*self.meta(), u, L, 1 if record_tree else 0)

    def search_until(self, u: int, record_tree: bool = False):
        return self._be().gsearch_until(*self.meta(), u, self.c_prime, 1 if record_tree else 0)

    # -- queries ------------------------------------------------------------

    def msf_query(self, u: int, v: int) -> bool:
        got = self._be().gmsf_query(*self.meta(), u, v, self.c_prime)
        if got < 0:
            raise ContractViolation(f"({u}, {v}) is not an edge")
        return bool(got)

    def connectivity_query(self, v: int) -> int:
        if not 1 <= v <= self.graph.n:
            raise ContractViolation("vertex out of range")
        return self._be().gconn_query(*self.meta(), v, self.c_prime)


def plan_oracle(g: CsrGraph, seed: int = 0, c_prime: int = DEFAULT_C_PRIME,
                backend: str | None = None) -> GraphOracle:
    """Choose the codec regime for this graph without touching it yet."""
    n, m = g.n, g.m
    b_full, lv, loff = codec_block_size(n, m)
    if n >= 2 * b_full:
        return GraphOracle(g, 2, b_full, n // b_full, lv, loff, c_prime, seed, backend)
    if n >= 2 * lv:
        return GraphOracle(g, 1, n, 1, lv, loff, c_prime, seed, backend)
    return GraphOracle(g, 0, max(1, n), 1, lv, loff, c_prime, seed, backend)


def sort_adjacency(oracle: GraphOracle, threads: int = 1) -> None:
    oracle._be().gsort_adjacency(*oracle.meta(), threads)


def choose_centers(oracle: GraphOracle, threads: int = 1) -> None:
    oracle._be().gchoose_centers(*oracle.meta(), oracle.seed, threads)


def boruvka_round(oracle: GraphOracle, rno: int, threads: int = 1) -> bool:
    return bool(oracle._be().gboruvka_round(*oracle.meta(), oracle.seed, rno,
                                            oracle.c_prime, threads))


def forest_contraction_round(oracle: GraphOracle, rno: int, threads: int = 1) -> int:
    return oracle._be().gcontraction_round(*oracle.meta(), oracle.seed, rno,
                                           oracle.c_prime, threads)


def contraction_pending(oracle: GraphOracle) -> bool:
    return bool(oracle._be().gcontraction_pending(*oracle.meta(), oracle.c_prime))


def build_oracle(g: CsrGraph, seed: int = 0, c_prime: int = DEFAULT_C_PRIME,
                 threads: int = 1, backend: str | None = None, hook=None) -> GraphOracle:
    """Construct the oracle in place inside g's offset array."""
    oracle = plan_oracle(g, seed, c_prime, backend)
    be = oracle._be()

    def fire(stage):
        if hook is not None:
            hook(stage, oracle)

    be.gcodec_init(*oracle.meta(), threads)
    fire("init")
    sort_adjacency(oracle, threads)
    fire("sorted")
    choose_centers(oracle, threads)
    fire("centers")
    if oracle.mode == 2:
        cround = 0
        for rno in range(oracle.nb.bit_length() + 2):
            progressed = boruvka_round(oracle, rno, threads)
            oracle.rounds = rno + 1
            fire(f"boruvka-{rno}")
            if not progressed:
                break
            guard = 0
            while contraction_pending(oracle):
                forest_contraction_round(oracle, cround, threads)
                fire(f"contract-{cround}")
                cround += 1
                guard += 1
                if guard > 64 * (oracle.nb.bit_length() + 2):
                    raise InvariantError("forest contraction failed to converge")
        else:
            raise InvariantError("component-joining rounds failed to converge")
    return oracle
