"""Exact-cover enumeration and its two uses: parallel classes of a design
(points covered by blocks) and resolutions (blocks covered by classes).

Sets are Python ints used as bitsets.  The search keeps the set of still
admissible candidates as one bitset over candidate indices, so the number of
live candidates for an element is a single AND + popcount.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .design import Design, ParallelClass

__all__ = [
    "ExactCoverInstance",
    "Resolution",
    "solve_exact_cover",
    "count_exact_cover",
    "all_parallel_classes",
    "all_resolutions",
    "resolution_masks",
    "group_closure",
    "rotation",
]

log = logging.getLogger(__name__)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class ExactCoverInstance:
    universe_size: int
    candidate_sets: tuple[int, ...]

    def __init__(self, universe_size: int, candidate_sets: Iterable):
        sets = []
        for s in candidate_sets:
            if not isinstance(s, int):
                s = sum(1 << x for x in set(s))
            sets.append(s)
        full = (1 << universe_size) - 1
        for s in sets:
            if s == 0:
                raise ValueError("empty candidate set")
            if s & ~full:
                raise ValueError("candidate set leaves the universe")
        object.__setattr__(self, "universe_size", int(universe_size))
        object.__setattr__(self, "candidate_sets", tuple(sets))


@dataclass(frozen=True, order=True)
class Resolution:
    """Sorted indices into the enumerated parallel-class list."""

    class_indices: tuple[int, ...]

    def mask(self) -> int:
        return sum(1 << i for i in self.class_indices)


class _Search:
    """Shared, read-only search tables for one instance."""

    def __init__(self, inst: ExactCoverInstance):
        self.n = inst.universe_size
        self.sets = inst.candidate_sets
        self.full = (1 << self.n) - 1
        by_elem = [0] * self.n
        for i, s in enumerate(self.sets):
            for e in _bits(s):
                by_elem[e] |= 1 << i
        self.by_elem = by_elem
        self.max_size = max((x.bit_count() for x in self.sets), default=1)
        # candidates sharing an element with candidate i (including i)
        self.clash = []
        for s in self.sets:
            c = 0
            for e in _bits(s):
                c |= by_elem[e]
            self.clash.append(c)

    def choose(self, covered: int, alive: int) -> tuple[int, int]:
        """Most constrained uncovered element and its live candidates."""
        best_e, best_opts, best_n = -1, 0, None
        todo = self.full & ~covered
        while todo:
            low = todo & -todo
            e = low.bit_length() - 1
            todo ^= low
            opts = self.by_elem[e] & alive
            n = opts.bit_count()
            if best_n is None or n < best_n:
                best_e, best_opts, best_n = e, opts, n
                if n <= 1:
                    break
        return best_e, best_opts

    def run(self, covered: int, alive: int, chosen: list[int], out: list | None) -> int:
        full = self.full
        if covered == full:
            if out is not None:
                out.append(tuple(sorted(chosen)))
            return 1
        # too few live candidates left to cover what remains
        if alive.bit_count() * self.max_size < (full & ~covered).bit_count():
            return 0
        _, opts = self.choose(covered, alive)
        sets, clash = self.sets, self.clash
        total = 0
        while opts:
            low = opts & -opts
            i = low.bit_length() - 1
            opts ^= low
            chosen.append(i)
            total += self.run(covered | sets[i], alive & ~clash[i], chosen, out)
            chosen.pop()
        return total

    def start(self, fixed: Sequence[int]) -> tuple[int, int] | None:
        """Covered/alive state after pre-selecting ``fixed``; None if they clash."""
        covered, alive = 0, (1 << len(self.sets)) - 1
        for i in fixed:
            if not alive >> i & 1:
                return None
            covered |= self.sets[i]
            alive &= ~self.clash[i]
        return covered, alive

    def root_branches(self, fixed: Sequence[int]) -> list[int]:
        state = self.start(fixed)
        if state is None or state[0] == self.full:
            return []
        _, opts = self.choose(*state)
        return _bits(opts)

    def run_fixed(self, fixed: Sequence[int], out: list | None) -> int:
        state = self.start(fixed)
        if state is None:
            return 0
        return self.run(state[0], state[1], list(fixed), out)


_worker_search: _Search | None = None


def _init_worker(inst: ExactCoverInstance) -> None:
    global _worker_search
    _worker_search = _Search(inst)


def _worker_branch(args: tuple[tuple[int, ...], bool]):
    fixed, enumerate_ = args
    out: list | None = [] if enumerate_ else None
    n = _worker_search.run_fixed(fixed, out)
    return n, out


def resolve_workers(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))


def _solve(inst: ExactCoverInstance, enumerate_: bool, threads: int | None, fixed: Sequence[int]) -> tuple[int, list]:
    search = _Search(inst)
    workers = resolve_workers(threads)
    if workers == 1:
        out: list | None = [] if enumerate_ else None
        n = search.run_fixed(fixed, out)
        return n, (sorted(out) if out is not None else [])
    branches = search.root_branches(fixed)
    if not branches:
        return _solve(inst, enumerate_, 1, fixed)
    total, merged = 0, []
    tasks = [(tuple(fixed) + (i,), enumerate_) for i in branches]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(inst,)) as pool:
        for n, out in pool.map(_worker_branch, tasks):
            total += n
            if out:
                merged.extend(out)
    return total, sorted(merged)


def solve_exact_cover(
    inst: ExactCoverInstance,
    mode: str = "enumerate",
    threads: int | None = 1,
    fixed: Sequence[int] = (),
):
    """All subsets of ``inst.candidate_sets`` partitioning the universe.

    Each solution is a sorted tuple of candidate indices; the list is sorted.
    With ``mode="count"`` only the number of solutions is returned.
    ``fixed`` restricts the search to solutions containing those candidates.
    ``threads > 1`` splits the root branching across worker processes; the
    merged output is identical to a single-threaded run.
    """
    if mode not in ("count", "enumerate"):
        raise ValueError(f"mode must be 'count' or 'enumerate', got {mode!r}")
    total, sols = _solve(inst, mode == "enumerate", threads, tuple(fixed))
    if mode == "count":
        return total
    return sols


def count_exact_cover(inst: ExactCoverInstance, threads: int | None = 1) -> int:
    return solve_exact_cover(inst, "count", threads)


def all_parallel_classes(D: Design, threads: int | None = 1) -> list[ParallelClass]:
    if D.k == 0 or D.v % D.k:
        raise ValueError(f"v={D.v} is not divisible by k={D.k}: no parallel classes possible")
    inst = ExactCoverInstance(D.v, D.masks)
    sols = solve_exact_cover(inst, "enumerate", threads)
    log.info("found %d parallel classes", len(sols))
    return [ParallelClass(s) for s in sols]


def group_closure(generators: Sequence[Sequence[int]], limit: int = 100_000) -> list[tuple[int, ...]]:
    """All elements of the permutation group generated by ``generators``."""
    gens = [tuple(g) for g in generators]
    if not gens:
        return []
    n = len(gens[0])
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[x] for x in p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if len(seen) > limit:
                        raise ValueError(f"group has more than {limit} elements")
        frontier = nxt
    return sorted(seen)


def _block_action(D: Design, perm: Sequence[int]) -> list[int]:
    index = D.index
    out = []
    for blk in D.blocks:
        img = tuple(sorted(perm[x] for x in blk))
        j = index.get(img)
        if j is None:
            raise ValueError("symmetry does not map blocks to blocks")
        out.append(j)
    return out


def rotation(v: int) -> tuple[int, ...]:
    """x -> x+1 mod (v-1) with the last point fixed."""
    return tuple((x + 1) % (v - 1) for x in range(v - 1)) + (v - 1,)


def _default_symmetries(D: Design) -> list[tuple[int, ...]]:
    from .symmetry import automorphism_group_order

    try:
        gens = automorphism_group_order(D).generators
        group_closure(gens)
        return list(gens)
    except ValueError:
        pass
    if D.v < 3:
        return []
    g = rotation(D.v)
    try:
        _block_action(D, g)
    except ValueError:
        return []
    return [g]


def all_resolutions(
    D: Design,
    classes: Sequence[ParallelClass],
    threads: int | None = 1,
    symmetries: Sequence[Sequence[int]] | str | None = "auto",
) -> list[Resolution]:
    """Every partition of the blocks of ``D`` into classes from ``classes``.

    ``symmetries`` are point permutations preserving the block set (group
    generators).  Every resolution holds exactly one class through a fixed
    block b0, so only one class per orbit of Stab(b0) is searched and the
    others are obtained by mapping solutions.  ``"auto"`` uses the full
    automorphism group when it has at most 100000 elements, else the rotation
    x -> x+1 when that is an automorphism; ``None`` disables this.
    """
    if not classes:
        return []
    inst = ExactCoverInstance(D.b, [c.mask() for c in classes])
    if symmetries == "auto":
        symmetries = _default_symmetries(D)
    group = group_closure(symmetries) if symmetries else []
    if len(group) <= 1:
        sols = solve_exact_cover(inst, "enumerate", threads)
    else:
        sols = _solve_with_symmetry(D, classes, inst, group, threads)
    log.info("found %d resolutions", len(sols))
    r = D.r
    for s in sols:
        if len(s) != r:
            raise AssertionError(f"resolution with {len(s)} classes, expected r={r}")
    return [Resolution(s) for s in sols]


def _solve_with_symmetry(D, classes, inst, group, threads) -> list[tuple[int, ...]]:
    block_perms = [_block_action(D, g) for g in group]
    # b0: the block with the largest stabilizer
    stab_size = [0] * D.b
    for bp in block_perms:
        for j, img in enumerate(bp):
            if img == j:
                stab_size[j] += 1
    b0 = max(range(D.b), key=lambda j: (stab_size[j], -j))
    class_index = {c.block_indices: i for i, c in enumerate(classes)}

    def class_perm(bp):
        out = []
        for c in classes:
            img = tuple(sorted(bp[j] for j in c.block_indices))
            out.append(class_index[img])
        return out

    stabilizer = [class_perm(bp) for bp in block_perms if bp[b0] == b0]
    through_b0 = [i for i, c in enumerate(classes) if b0 in c.block_indices]
    seen: set[int] = set()
    sols: list[tuple[int, ...]] = []
    for c in through_b0:
        if c in seen:
            continue
        # one stabilizer element per orbit point
        orbit: dict[int, list[int]] = {}
        for h in stabilizer:
            orbit.setdefault(h[c], h)
        seen.update(orbit)
        base = solve_exact_cover(inst, "enumerate", threads, fixed=(c,))
        for h in orbit.values():
            sols.extend(tuple(sorted(h[x] for x in sol)) for sol in base)
    sols.sort()
    if len(set(sols)) != len(sols):
        raise AssertionError("symmetry expansion produced duplicate resolutions")
    return sols


def resolution_masks(resolutions: Sequence[Resolution]) -> list[int]:
    return [r.mask() for r in resolutions]
