"""Brute-force reference oracles.

Deliberately simple and allocation-unconstrained; these never share code
with the main algorithm modules and exist to anchor their tests and the
verify CLI.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque

import numpy as np

from . import _rng
from .errors import ContractViolation


def ref_merge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Merge two sorted arrays by ranks (no comparison sort involved)."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    if len(a) + len(b) < 4096:
        out = np.empty(len(a) + len(b), dtype=np.uint64)
        i = j = k = 0
        while i < len(a) and j < len(b):
            if a[i] < b[j]:
                out[k] = a[i]
                i += 1
            else:
                out[k] = b[j]
                j += 1
            k += 1
        out[k : k + len(a) - i] = a[i:]
        out[k + len(a) - i :] = b[j:]
        return out
    # Rank-based merge: element positions are index + rank in the other array.
    pos_a = np.arange(len(a)) + np.searchsorted(b, a, side="left")
    pos_b = np.arange(len(b)) + np.searchsorted(a, b, side="right")
    out = np.empty(len(a) + len(b), dtype=np.uint64)
    out[pos_a] = a
    out[pos_b] = b
    return out


def ref_shuffle(arr: np.ndarray, seed: int) -> np.ndarray:
    """Sequential swap-from-the-end shuffle using the shared counter PRNG."""
    out = np.array(arr, dtype=np.uint64, copy=True)
    for i in range(len(out) - 1, 0, -1):
        h = _rng.shuffle_target(seed, i)
        out[i], out[h] = out[h].copy(), out[i].copy()
    return out


def edge_key(u: int, v: int, w: int) -> tuple[int, int, int]:
    """Total order making the spanning forest unique: (weight, min, max)."""
    return (w, min(u, v), max(u, v))


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n + 1))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def ref_kruskal(n: int, edges) -> set[tuple[int, int, int]]:
    """Minimum spanning forest as a set of (min, max, weight) triples.

    `edges` is an iterable of undirected (u, v, w) with vertices in 1..n.
    Ties are broken by edge_key, which makes the forest unique.
    """
    dsu = _DSU(n)
    forest = set()
    for u, v, w in sorted(edges, key=lambda e: edge_key(*e)):
        if dsu.union(u, v):
            forest.add((min(u, v), max(u, v), w))
    return forest


def ref_components(n: int, edges) -> list[int]:
    """BFS component labels (index 0 unused; vertices are 1..n).

    Each vertex gets the smallest vertex label of its component.
    """
    if n < 1:
        raise ContractViolation("graphs must have at least one vertex")
    adj = [[] for _ in range(n + 1)]
    for u, v, _ in edges:
        adj[u].append(v)
        adj[v].append(u)
    label = [0] * (n + 1)
    for start in range(1, n + 1):
        if label[start]:
            continue
        label[start] = start
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not label[y]:
                    label[y] = start
                    queue.append(y)
    return label


def ref_prim_first_center(n: int, edges, centers: set[int], u: int):
    """First center popped by an unbounded cheapest-edge-first search from u.

    Pop order breaks ties by the connecting edge's key (weight, min label,
    max label), the same total order every other oracle uses.  Returns None
    when u's component contains no center.
    """
    adj = [[] for _ in range(n + 1)]
    for a, b, w in edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    heap = [((0, 0, 0), u)]
    seen = set()
    while heap:
        _, p = heapq.heappop(heap)
        if p in seen:
            continue
        seen.add(p)
        if p in centers:
            return p
        for q, wq in adj[p]:
            if q not in seen:
                heapq.heappush(heap, (edge_key(p, q, wq), q))
    return None


def ref_prim_tree(n: int, edges, u: int) -> set[tuple[int, int, int]]:
    """Full cheapest-edge-first tree over u's component, as (min,max,w) triples."""
    adj = [[] for _ in range(n + 1)]
    for a, b, w in edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    heap = [((0, 0, 0), u, 0)]
    seen = set()
    tree = set()
    while heap:
        key, p, par = heapq.heappop(heap)
        if p in seen:
            continue
        seen.add(p)
        if par:
            tree.add((min(par, p), max(par, p), key[0]))
        for q, wq in adj[p]:
            if q not in seen:
                heapq.heappush(heap, (edge_key(p, q, wq), q, p))
    return tree


def _generate_ranked(k: int):
    """All permutations of 1..k in rank order, by the defining recursion."""
    if k == 1:
        return [[1]]
    out = []
    for first in range(1, k + 1):
        for rest in _generate_ranked(k - 1):
            out.append([first] + [x + 1 if x >= first else x for x in rest])
    return out


def ref_perm_rank(pi) -> int:
    """Position of pi in the exhaustively generated rank enumeration (k <= 8)."""
    pi = list(pi)
    k = len(pi)
    if k > 8:
        raise ContractViolation("reference enumeration is limited to k <= 8")
    table = _generate_ranked(k)
    try:
        return table.index(pi)
    except ValueError:
        raise ContractViolation("input is not a permutation of 1..k") from None


def all_perm_indices(k: int) -> dict[tuple[int, ...], int]:
    """Map each permutation tuple of 0..k-1 to a dense index (for chi-square bins)."""
    return {p: i for i, p in enumerate(itertools.permutations(range(k)))}
