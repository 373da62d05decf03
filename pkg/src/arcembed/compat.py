"""Compatibility of resolutions and maximum cliques in the compatibility
graph.

Two resolutions are compatible when they share exactly one parallel class
and every other pair of classes, one taken from each, has at most one block
in common.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence, TextIO

from .design import ParallelClass
from .enumeration import Resolution, resolve_workers

__all__ = [
    "CompatContextError",
    "CompatGraph",
    "CliqueResult",
    "Compatibility",
    "compatible",
    "build_compat_graph",
    "max_clique",
    "verify_clique_compatible",
    "compatible_set_bound",
    "write_dimacs",
    "read_dimacs",
]

log = logging.getLogger(__name__)


class CompatContextError(ValueError):
    """Resolutions do not refer to the same class list."""


class Compatibility:
    """Compatibility tests against one list of parallel classes.

    Classes inside a resolution are block-disjoint, so once two resolutions
    share exactly one class the only cross pairs that can meet in two or
    more blocks involve two unshared classes.  ``__call__`` therefore reduces
    to one AND per pair: the classes of r2 against the union of the
    "heavy neighbours" of the classes of r1.  ``check_definition`` tests the
    pairwise condition literally and is used to recheck results.
    """

    def __init__(self, classes: Sequence[ParallelClass]):
        self.class_masks = [c.mask() for c in classes]
        self._meet: dict[tuple[int, int], int] = {}
        self._heavy: list[int] | None = None
        self._union: dict[tuple[int, ...], int] = {}

    def meet(self, a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        n = self._meet.get(key)
        if n is None:
            n = (self.class_masks[a] & self.class_masks[b]).bit_count()
            self._meet[key] = n
        return n

    def heavy(self) -> list[int]:
        """Per class, the bitset of other classes sharing >= 2 blocks with it."""
        if self._heavy is None:
            by_block: dict[int, int] = {}
            for i, m in enumerate(self.class_masks):
                while m:
                    low = m & -m
                    b = low.bit_length() - 1
                    by_block[b] = by_block.get(b, 0) | (1 << i)
                    m ^= low
            heavy = []
            for i, m in enumerate(self.class_masks):
                once = twice = 0
                while m:
                    low = m & -m
                    bucket = by_block[low.bit_length() - 1]
                    twice |= once & bucket
                    once |= bucket
                    m ^= low
                heavy.append(twice & ~(1 << i))
            self._heavy = heavy
        return self._heavy

    def _check(self, r: Resolution) -> None:
        if any(not 0 <= c < len(self.class_masks) for c in r.class_indices):
            raise CompatContextError("resolution refers to classes outside the class list")

    def _heavy_union(self, r: Resolution) -> int:
        u = self._union.get(r.class_indices)
        if u is None:
            heavy = self.heavy()
            u = 0
            for c in r.class_indices:
                u |= heavy[c]
            self._union[r.class_indices] = u
        return u

    def __call__(self, r1: Resolution, r2: Resolution) -> bool:
        self._check(r1)
        self._check(r2)
        m2 = r2.mask()
        if (r1.mask() & m2).bit_count() != 1:
            return False
        return not self._heavy_union(r1) & m2

    def check_definition(self, r1: Resolution, r2: Resolution) -> bool:
        self._check(r1)
        self._check(r2)
        shared = set(r1.class_indices) & set(r2.class_indices)
        if len(shared) != 1:
            return False
        meet = self.meet
        for a in r1.class_indices:
            if a in shared:
                continue
            for b in r2.class_indices:
                if b not in shared and meet(a, b) > 1:
                    return False
        return True


def compatible(r1: Resolution, r2: Resolution, classes: Sequence[ParallelClass]) -> bool:
    return Compatibility(classes)(r1, r2)


@dataclass
class CompatGraph:
    vertex_count: int
    adjacency: list[int]  # bitset of neighbours per vertex
    vertex_labels: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.vertex_labels:
            self.vertex_labels = list(range(self.vertex_count))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> CompatGraph:
        adj = [0] * n
        for u, w in edges:
            if u == w:
                raise ValueError(f"self-loop at {u}")
            adj[u] |= 1 << w
            adj[w] |= 1 << u
        return cls(n, adj)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u in range(self.vertex_count):
            nb = self.adjacency[u] >> (u + 1)
            w = u + 1
            while nb:
                if nb & 1:
                    out.append((u, w))
                tz = (nb & -nb).bit_length() - 1
                if tz == 0:
                    nb >>= 1
                    w += 1
                else:
                    nb >>= tz
                    w += tz
        return out

    @property
    def edge_count(self) -> int:
        return sum(a.bit_count() for a in self.adjacency) // 2

    def degrees(self) -> list[int]:
        return [a.bit_count() for a in self.adjacency]

    def adjacent(self, u: int, w: int) -> bool:
        return bool(self.adjacency[u] >> w & 1)


_worker_state = None


def _class_buckets(resolutions: Sequence[Resolution]) -> dict[int, int]:
    """Bitset over resolutions for every class index."""
    buckets: dict[int, int] = {}
    for i, r in enumerate(resolutions):
        for c in r.class_indices:
            buckets[c] = buckets.get(c, 0) | (1 << i)
    return buckets


def _init_graph_worker(resolutions, classes):
    global _worker_state
    _worker_state = (list(resolutions), Compatibility(classes), _class_buckets(resolutions))


def _graph_rows(rows: Sequence[int]) -> list[tuple[int, int]]:
    resolutions, compat, buckets = _worker_state
    return _edges_for_rows(rows, resolutions, compat, buckets)


def _edges_for_rows(rows, resolutions, compat, buckets) -> list[tuple[int, int]]:
    out = []
    masks = [r.mask() for r in resolutions]
    for i in rows:
        heavy = compat._heavy_union(resolutions[i])
        # resolutions sharing exactly one class with resolution i
        once = twice = 0
        for c in resolutions[i].class_indices:
            b = buckets[c]
            twice |= once & b
            once |= b
        cand = (once & ~twice) >> (i + 1)
        j = i + 1
        while cand:
            low = cand & -cand
            step = low.bit_length() - 1
            j += step
            cand >>= step
            if not heavy & masks[j]:
                out.append((i, j))
            cand >>= 1
            j += 1
    return out


def build_compat_graph(
    resolutions: Sequence[Resolution],
    classes: Sequence[ParallelClass],
    threads: int | None = 1,
) -> CompatGraph:
    n = len(resolutions)
    checker = Compatibility(classes)
    for r in resolutions:
        checker._check(r)
    workers = resolve_workers(threads)
    if workers == 1 or n < 64:
        edges = _edges_for_rows(range(n), resolutions, checker, _class_buckets(resolutions))
    else:
        # interleave rows so the triangular workload is balanced
        chunks = [list(range(w, n, workers)) for w in range(workers)]
        edges = []
        with ProcessPoolExecutor(workers, initializer=_init_graph_worker, initargs=(resolutions, classes)) as pool:
            for part in pool.map(_graph_rows, chunks):
                edges.extend(part)
        edges.sort()
    log.info("compatibility graph: %d vertices, %d edges", n, len(edges))
    return CompatGraph.from_edges(n, edges)


@dataclass
class CliqueResult:
    max_size: int
    cliques: list[tuple[int, ...]]


def _color_order(P: int, adj: Sequence[int]) -> list[tuple[int, int]]:
    """Greedy colouring of the vertices in P; (vertex, colour) by colour."""
    order = []
    color = 0
    uncolored = P
    while uncolored:
        color += 1
        Q = uncolored
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            Q &= ~low & ~adj[v]
            uncolored &= ~low
            order.append((v, color))
    return order


def _search(adj: Sequence[int], n: int, target: int | None) -> tuple[int, list[tuple[int, ...]]]:
    """Branch and bound with colouring bounds.

    target None: find the maximum size.  Otherwise list every clique of size
    ``target`` (pruning only branches that cannot reach it).
    """
    best = [0]
    found: list[tuple[int, ...]] = []
    clique: list[int] = []

    def expand(P: int) -> None:
        order = _color_order(P, adj)
        for v, col in reversed(order):
            size = len(clique)
            if target is None:
                if size + col <= best[0]:
                    return
            elif size + col < target:
                return
            clique.append(v)
            newP = P & adj[v]
            if newP:
                expand(newP)
            else:
                k = len(clique)
                if target is None:
                    if k > best[0]:
                        best[0] = k
                elif k == target:
                    found.append(tuple(sorted(clique)))
            clique.pop()
            P &= ~(1 << v)

    expand((1 << n) - 1)
    return best[0], found


def max_clique(G: CompatGraph) -> CliqueResult:
    """Exact maximum clique size and every clique attaining it.

    The empty graph has m = 0 and the single empty clique.
    """
    n = G.vertex_count
    if n == 0:
        return CliqueResult(0, [()])
    m, _ = _search(G.adjacency, n, None)
    _, cliques = _search(G.adjacency, n, m)
    cliques = sorted(set(cliques))
    for c in cliques:
        for u, w in combinations(c, 2):
            if not G.adjacent(u, w):
                raise AssertionError("search returned a non-clique")
    return CliqueResult(m, cliques)


def verify_clique_compatible(
    clique: Sequence[int],
    resolutions: Sequence[Resolution],
    classes: Sequence[ParallelClass],
) -> bool:
    """Recheck every pair of the clique directly from the resolutions."""
    compat = Compatibility(classes)
    return all(compat.check_definition(resolutions[a], resolutions[b]) for a, b in combinations(clique, 2))


def compatible_set_bound(v: int, k: int) -> int | None:
    """(sk-k+1)s for a 2-((sk-s+1)k, k, 1) design, or None if v, k do not
    have that form with 1 < k < q = sk."""
    if k < 2 or v % k or (v // k - 1) % (k - 1):
        return None
    s = (v // k - 1) // (k - 1)
    if s < 1 or not 1 < k < s * k:
        return None
    return (s * k - k + 1) * s


def write_dimacs(G: CompatGraph, fh: TextIO, comment: str | None = None) -> None:
    if comment:
        for line in comment.splitlines():
            fh.write(f"c {line}\n")
    edges = G.edges()
    fh.write(f"p edge {G.vertex_count} {len(edges)}\n")
    for u, w in edges:
        fh.write(f"e {u + 1} {w + 1}\n")


def read_dimacs(fh: TextIO) -> CompatGraph:
    n = None
    edges = []
    declared = None
    for raw in fh:
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise ValueError(f"bad problem line: {line!r}")
            n, declared = int(parts[2]), int(parts[3])
        elif parts[0] == "e":
            if n is None:
                raise ValueError("edge before problem line")
            u, w = int(parts[1]) - 1, int(parts[2]) - 1
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError(f"edge {line!r} out of range")
            edges.append((u, w))
        else:
            raise ValueError(f"unknown DIMACS line: {line!r}")
    if n is None:
        raise ValueError("missing problem line")
    G = CompatGraph.from_edges(n, edges)
    if G.edge_count != declared:
        raise ValueError(f"declared {declared} edges, read {G.edge_count}")
    return G
