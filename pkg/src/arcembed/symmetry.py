"""Canonical labelling, automorphism groups and isomorphism of incidence
structures.

A design (or plane) becomes a two-coloured bipartite graph: points first,
then blocks.  The search is the usual individualise/refine scheme:
equitable refinement by neighbour counts, branching on the first largest
non-singleton cell, pruning by refinement traces and by orbits of the
automorphisms found so far.  The group order is the product of the orbit
lengths along the first path (orbit-stabilizer chain).
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .design import Design

__all__ = [
    "ColoredGraph",
    "CanonicalForm",
    "AutResult",
    "canonical_form",
    "automorphism_group_order",
    "isomorphic",
    "find_isomorphism",
    "has_rotational_automorphism",
    "incidence_graph",
    "cycle_notation",
]


@dataclass(frozen=True)
class ColoredGraph:
    """Undirected graph with an ordered vertex colouring.

    ``colors[v]`` is an integer; vertices of smaller colour come first in
    every labelling, and automorphisms never mix colours.
    """

    n: int
    adj: tuple[tuple[int, ...], ...]
    colors: tuple[int, ...]

    @classmethod
    def from_incidence(cls, num_points: int, lines: Sequence[Sequence[int]]) -> ColoredGraph:
        n = num_points + len(lines)
        adj: list[list[int]] = [[] for _ in range(n)]
        for j, line in enumerate(lines):
            u = num_points + j
            for p in line:
                adj[p].append(u)
                adj[u].append(p)
        colors = (0,) * num_points + (1,) * len(lines)
        return cls(n, tuple(tuple(sorted(a)) for a in adj), colors)

    def relabel(self, perm: Sequence[int]) -> ColoredGraph:
        """Graph with vertex v renamed perm[v]."""
        adj: list[tuple[int, ...]] = [()] * self.n
        colors = [0] * self.n
        for v in range(self.n):
            adj[perm[v]] = tuple(sorted(perm[u] for u in self.adj[v]))
            colors[perm[v]] = self.colors[v]
        return ColoredGraph(self.n, tuple(adj), tuple(colors))

    def edges(self) -> set[tuple[int, int]]:
        return {(u, w) for u in range(self.n) for w in self.adj[u] if u < w}


def incidence_graph(S) -> ColoredGraph:
    """Bipartite point/block graph of a :class:`Design` or incidence structure."""
    if isinstance(S, Design):
        return ColoredGraph.from_incidence(S.v, S.blocks)
    return ColoredGraph.from_incidence(S.point_count, S.lines)


class _Partition:
    __slots__ = ("lab", "cell", "end", "ncells")

    def __init__(self, lab, cell, end, ncells):
        self.lab = lab
        self.cell = cell
        self.end = end
        self.ncells = ncells

    @classmethod
    def from_colors(cls, colors: Sequence[int]) -> _Partition:
        n = len(colors)
        lab = sorted(range(n), key=lambda v: (colors[v], v))
        cell = [0] * n
        end = [0] * n
        ncells = 0
        i = 0
        while i < n:
            j = i
            while j < n and colors[lab[j]] == colors[lab[i]]:
                j += 1
            end[i] = j
            for v in lab[i:j]:
                cell[v] = i
            ncells += 1
            i = j
        return cls(lab, cell, end, ncells)

    def copy(self) -> _Partition:
        return _Partition(self.lab[:], self.cell[:], self.end[:], self.ncells)

    def starts(self) -> list[int]:
        out, i, n = [], 0, len(self.lab)
        while i < n:
            out.append(i)
            i = self.end[i]
        return out

    def discrete(self) -> bool:
        return self.ncells == len(self.lab)

    def target_cell(self) -> int:
        best, best_size = -1, None
        for s in self.starts():
            size = self.end[s] - s
            if size > 1 and (best_size is None or size > best_size):
                best, best_size = s, size
        return best

    def individualize(self, v: int) -> int:
        s = self.cell[v]
        e = self.end[s]
        lab = self.lab
        i = lab.index(v, s, e)
        lab[s], lab[i] = lab[i], lab[s]
        self.end[s] = s + 1
        self.end[s + 1] = e
        for u in lab[s + 1 : e]:
            self.cell[u] = s + 1
        self.ncells += 1
        return s

    def refine(self, adj, splitters: Sequence[int]) -> int:
        """Refine to the coarsest equitable partition; return a trace hash."""
        lab, cell, end = self.lab, self.cell, self.end
        n = len(lab)
        queue = deque(sorted(splitters))
        inq = set(queue)
        trace: list = []
        while queue and self.ncells < n:
            s = queue.popleft()
            inq.discard(s)
            cnt: dict[int, int] = {}
            for w in lab[s : end[s]]:
                for u in adj[w]:
                    cnt[u] = cnt.get(u, 0) + 1
            touched: dict[int, int] = {}
            for u in cnt:
                c = cell[u]
                touched[c] = touched.get(c, 0) + 1
            for xs in sorted(touched):
                xe = end[xs]
                if xe - xs == 1:
                    trace.append((s, xs, cnt[lab[xs]]))
                    continue
                groups: dict[int, list[int]] = {}
                for v in lab[xs:xe]:
                    groups.setdefault(cnt.get(v, 0), []).append(v)
                if len(groups) == 1:
                    trace.append((s, xs, next(iter(groups))))
                    continue
                keys = sorted(groups)
                pos = xs
                frags = []
                for key in keys:
                    g = groups[key]
                    lab[pos : pos + len(g)] = g
                    end[pos] = pos + len(g)
                    for v in g:
                        cell[v] = pos
                    frags.append(pos)
                    pos += len(g)
                self.ncells += len(keys) - 1
                trace.append((s, xs, tuple((key, len(groups[key])) for key in keys)))
                if xs in inq:
                    for f in frags[1:]:
                        queue.append(f)
                        inq.add(f)
                else:
                    big = max(frags, key=lambda f: (end[f] - f, -f))
                    for f in frags:
                        if f != big:
                            queue.append(f)
                            inq.add(f)
        return hash(tuple(trace))


def _certificate(graph: ColoredGraph, lab: Sequence[int]) -> tuple[int, ...]:
    n = graph.n
    pos = [0] * n
    for i, v in enumerate(lab):
        pos[v] = i
    adj = graph.adj
    return tuple(sorted(pos[u] * n + pos[w] for u in range(n) for w in adj[u] if pos[u] < pos[w]))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


class _Jump(Exception):
    def __init__(self, level: int):
        self.level = level


@dataclass
class _Leaf:
    lab: list[int]
    path: list[int]
    traces: list[int]
    cert: tuple[int, ...]


class _Search:
    def __init__(self, graph: ColoredGraph):
        self.g = graph
        self.first: _Leaf | None = None
        self.best: _Leaf | None = None
        self.generators: list[tuple[list[int], int]] = []  # (perm, fixed first-path prefix length)
        self.nodes = 0
        self._orbit_cache: dict[int, tuple[int, _UnionFind]] = {}

    def run(self) -> None:
        P = _Partition.from_colors(self.g.colors)
        t = P.refine(self.g.adj, P.starts())
        self._node(P, [], [t], first_path=True)

    def _orbits(self, level: int) -> _UnionFind:
        cached = self._orbit_cache.get(level)
        if cached and cached[0] == len(self.generators):
            return cached[1]
        uf = _UnionFind(self.g.n)
        for perm, fixed in self.generators:
            if fixed >= level:
                for v, w in enumerate(perm):
                    if v != w:
                        uf.union(v, w)
        self._orbit_cache[level] = (len(self.generators), uf)
        return uf

    def _add_generator(self, perm: list[int]) -> None:
        path = self.first.path
        fixed = 0
        while fixed < len(path) and perm[path[fixed]] == path[fixed]:
            fixed += 1
        self.generators.append((perm, fixed))

    def _node(self, P: _Partition, path: list[int], traces: list[int], first_path: bool) -> None:
        self.nodes += 1
        first, best = self.first, self.best
        if first is not None and not first_path:
            depth = len(traces)
            same_first = traces == first.traces[:depth]
            if not same_first and traces > best.traces[:depth]:
                return
        if P.discrete():
            self._leaf(P, path, traces)
            return
        s = P.target_cell()
        children = sorted(P.lab[s : P.end[s]])
        level = len(path)
        explored_roots: set[int] = set()
        for i, v in enumerate(children):
            child_first = first_path and i == 0
            if first_path and i > 0:
                uf = self._orbits(level)
                root = uf.find(v)
                if root in explored_roots:
                    continue
                explored_roots.add(root)
            elif first_path:
                explored_roots.add(v)
            Q = P.copy()
            cs = Q.individualize(v)
            t = Q.refine(self.g.adj, [cs])
            try:
                self._node(Q, path + [v], traces + [t], child_first)
            except _Jump as j:
                if j.level < level:
                    raise
            if first_path and i == 0:
                # orbit roots may have moved now that generators exist
                explored_roots = {self._orbits(level).find(v)}
            elif first_path:
                uf = self._orbits(level)
                explored_roots = {uf.find(x) for x in explored_roots}

    def _leaf(self, P: _Partition, path: list[int], traces: list[int]) -> None:
        cert = _certificate(self.g, P.lab)
        leaf = _Leaf(P.lab[:], path, traces, cert)
        if self.first is None:
            self.first = self.best = leaf
            return
        for ref in (self.first, self.best):
            if cert == ref.cert:
                perm = [0] * self.g.n
                for a, b in zip(ref.lab, leaf.lab):
                    perm[a] = b
                if any(v != w for v, w in enumerate(perm)):
                    self._add_generator(perm)
                common = 0
                while common < min(len(path), len(ref.path)) and path[common] == ref.path[common]:
                    common += 1
                raise _Jump(common)
        if (traces, cert) < (self.best.traces, self.best.cert):
            self.best = leaf

    def group_order(self) -> int:
        order = 1
        path = self.first.path
        for k, v in enumerate(path):
            uf = self._orbits(k)
            root = uf.find(v)
            order *= sum(1 for x in range(self.g.n) if uf.find(x) == root)
        return order


@dataclass
class CanonicalForm:
    labeling: list[int]  # labeling[i] = original vertex placed at canonical position i
    certificate: str
    group_order: int
    generators: list[list[int]] = field(default_factory=list)
    nodes: int = 0


def canonical_form(G: ColoredGraph) -> CanonicalForm:
    """Canonical labelling; equal certificates iff the graphs are isomorphic
    by a colour-preserving map."""
    if G.n == 0:
        return CanonicalForm([], hashlib.sha256(b"empty").hexdigest(), 1)
    search = _Search(G)
    search.run()
    best = search.best
    h = hashlib.sha256()
    color_sizes = sorted((c, G.colors.count(c)) for c in set(G.colors))
    h.update(repr((G.n, color_sizes)).encode())
    h.update(repr(best.cert).encode())
    gens = [perm for perm, _ in search.generators]
    for perm in gens:
        for v in range(G.n):
            if G.colors[perm[v]] != G.colors[v]:
                raise AssertionError("automorphism mixes colour classes")
    return CanonicalForm(best.lab, h.hexdigest(), search.group_order(), gens, search.nodes)


@dataclass
class AutResult:
    group_order: int
    generators: list[tuple[int, ...]]  # point permutations

    def to_json(self) -> dict:
        return {
            "group_order": self.group_order,
            "generators": [cycle_notation(g) for g in self.generators],
        }


def cycle_notation(perm: Sequence[int]) -> list[list[int]]:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = perm[x]
        cycles.append(cyc)
    return cycles


def _lines_of(S) -> tuple[int, list[tuple[int, ...]]]:
    if isinstance(S, Design):
        return S.v, [tuple(b) for b in S.blocks]
    return S.point_count, [tuple(sorted(line)) for line in S.lines]


def automorphism_group_order(S) -> AutResult:
    """Order and generators of the automorphism group of a design or plane."""
    v, lines = _lines_of(S)
    cf = canonical_form(ColoredGraph.from_incidence(v, lines))
    block_set = {tuple(sorted(b)) for b in lines}
    gens = []
    for perm in cf.generators:
        g = tuple(perm[:v])
        for b in lines:
            if tuple(sorted(g[x] for x in b)) not in block_set:
                raise AssertionError("generator does not preserve the block set")
        gens.append(g)
    return AutResult(cf.group_order, gens)


def find_isomorphism(S1, S2) -> list[int] | None:
    """Point map S1 -> S2 sending lines to lines, or None."""
    v1, lines1 = _lines_of(S1)
    v2, lines2 = _lines_of(S2)
    if v1 != v2 or len(lines1) != len(lines2):
        return None
    if sorted(map(len, lines1)) != sorted(map(len, lines2)):
        return None
    c1 = canonical_form(ColoredGraph.from_incidence(v1, lines1))
    c2 = canonical_form(ColoredGraph.from_incidence(v2, lines2))
    if c1.certificate != c2.certificate:
        return None
    iso = [0] * (v1 + len(lines1))
    for a, b in zip(c1.labeling, c2.labeling):
        iso[a] = b
    point_map = iso[:v1]
    target = {tuple(sorted(line)) for line in lines2}
    for line in lines1:
        if tuple(sorted(point_map[x] for x in line)) not in target:
            raise AssertionError("certificates matched but the induced map is not an isomorphism")
    return point_map


def isomorphic(S1, S2) -> bool:
    return find_isomorphism(S1, S2) is not None


def has_rotational_automorphism(D: Design, infinity: int | None = None) -> bool:
    """Does x -> x+1 mod (v-1), with ``infinity`` fixed, preserve the blocks?"""
    v = D.v
    if infinity is None:
        infinity = v - 1
    others = [x for x in range(v) if x != infinity]
    n = len(others)
    shift = {x: others[(i + 1) % n] for i, x in enumerate(others)}
    shift[infinity] = infinity
    blocks = set(D.blocks)
    return all(tuple(sorted(shift[x] for x in b)) in blocks for b in D.blocks)
