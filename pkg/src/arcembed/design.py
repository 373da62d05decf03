"""Difference families, their development into 1-rotational designs, and
design validation.

Points of a 1-rotational design over Z_n are labelled ``0..n-1`` with the
fixed point (infinity) labelled ``n``.  Blocks are kept as sorted tuples in
lexicographic order, so block indices are stable across runs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "StructureError",
    "ValidationReport",
    "DifferenceFamily",
    "Design",
    "ParallelClass",
    "validate_family",
    "develop_family",
    "starter_parallel_class",
    "incidence_matrix",
    "validate_design",
    "complete_design",
]


class StructureError(ValueError):
    """Input is malformed (wrong shapes, sizes, ranges), as opposed to
    failing a combinatorial condition."""


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def first_violation(self) -> str | None:
        return self.violations[0] if self.violations else None


@dataclass(frozen=True)
class DifferenceFamily:
    """Base blocks over Z_n generating a resolvable 1-rotational design.

    The short block is ``{0, n/(k-1), ..., infinity}``, i.e. the subgroup of
    order ``k-1`` together with the fixed point.
    """

    modulus: int
    base_blocks: tuple[tuple[int, ...], ...]

    def __init__(self, modulus: int, base_blocks: Iterable[Iterable[int]]):
        object.__setattr__(self, "modulus", int(modulus))
        object.__setattr__(self, "base_blocks", tuple(tuple(int(x) for x in b) for b in base_blocks))
        self._check_structure()

    def _check_structure(self) -> None:
        n = self.modulus
        if n < 1:
            raise StructureError(f"modulus must be positive, got {n}")
        if not self.base_blocks:
            raise StructureError("family has no base blocks")
        sizes = {len(b) for b in self.base_blocks}
        if len(sizes) != 1:
            raise StructureError(f"base blocks have mixed sizes {sorted(sizes)}")
        k = sizes.pop()
        if k < 2:
            raise StructureError("base blocks need at least two elements")
        if n % (k - 1):
            raise StructureError(f"modulus {n} is not divisible by k-1={k - 1}")
        for b in self.base_blocks:
            if len(set(b)) != len(b):
                raise StructureError(f"base block {list(b)} has repeated elements")
            if any(not 0 <= x < n for x in b):
                raise StructureError(f"base block {list(b)} has elements outside Z_{n}")
        # counting: t*k*(k-1) differences must hit the n - (k-1) targets
        expected = (n - (k - 1)) // (k * (k - 1)) if (n - (k - 1)) % (k * (k - 1)) == 0 else None
        if expected is None or expected != len(self.base_blocks):
            raise StructureError(
                f"{len(self.base_blocks)} base blocks of size {k} cannot cover the "
                f"{n - (k - 1)} nonzero non-subgroup residues of Z_{n}"
            )

    @property
    def k(self) -> int:
        return len(self.base_blocks[0])

    @property
    def v(self) -> int:
        return self.modulus + 1

    @property
    def infinity(self) -> int:
        return self.modulus

    @property
    def stride(self) -> int:
        """Index of the order-(k-1) subgroup, n/(k-1) (17 for n = 51, k = 4)."""
        return self.modulus // (self.k - 1)

    def short_block(self) -> tuple[int, ...]:
        return tuple(j * self.stride for j in range(self.k - 1)) + (self.infinity,)


@dataclass(frozen=True)
class Design:
    """A block design on points ``0..v-1`` with canonically ordered blocks."""

    v: int
    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, v: int, blocks: Iterable[Iterable[int]]):
        v = int(v)
        canon = sorted({tuple(sorted(int(x) for x in b)) for b in blocks})
        for b in canon:
            if not b or b[0] < 0 or b[-1] >= v:
                raise StructureError(f"block {list(b)} is not a nonempty subset of 0..{v - 1}")
            if len(set(b)) != len(b):
                raise StructureError(f"block {list(b)} repeats a point")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "blocks", tuple(canon))

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks[0]) if self.blocks else 0

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << x for x in blk) for blk in self.blocks)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {blk: i for i, blk in enumerate(self.blocks)}

    def block_index(self, points: Iterable[int]) -> int:
        return self.index[tuple(sorted(points))]

    @property
    def r(self) -> int:
        return sum(1 for blk in self.blocks if 0 in blk)

    def parameters(self) -> dict:
        k = self.k
        lam = 0
        if self.v >= 2:
            lam = sum(1 for blk in self.blocks if 0 in blk and 1 in blk)
        return {"v": self.v, "b": self.b, "r": self.r, "k": k, "lambda": lam}

    def to_json(self) -> dict:
        return {"v": self.v, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, data: dict) -> Design:
        return cls(data["v"], data["blocks"])

    def __hash__(self) -> int:
        return hash((self.v, self.blocks))


@dataclass(frozen=True, order=True)
class ParallelClass:
    """Sorted indices of pairwise disjoint blocks covering every point."""

    block_indices: tuple[int, ...]

    def mask(self) -> int:
        return sum(1 << i for i in self.block_indices)


def complete_design(n: int, k: int = 2) -> Design:
    """All k-subsets of n points: the trivial 2-(n,k,1) design when k = 2."""
    return Design(n, combinations(range(n), k))


def _differences(block: Sequence[int], n: int) -> list[int]:
    return [(x - y) % n for x in block for y in block if x != y]


def validate_family(F: DifferenceFamily) -> ValidationReport:
    """Check difference coverage and residue coverage of a family.

    (a) the within-block differences hit every element of Z_n outside the
    order-(k-1) subgroup exactly once;
    (b) the base-block elements reduced mod n/(k-1) are exactly the nonzero
    residues, each once.
    """
    n, k, stride = F.modulus, F.k, F.stride
    subgroup = {j * stride for j in range(k - 1)}
    diffs = Counter(d for blk in F.base_blocks for d in _differences(blk, n))
    report = ValidationReport(ok=True, details={"differences": sum(diffs.values())})

    repeated = sorted(d for d, c in diffs.items() if c > 1)
    in_subgroup = sorted(d for d in diffs if d in subgroup)
    missing = sorted(d for d in range(n) if d not in subgroup and d not in diffs)
    if repeated or in_subgroup or missing:
        msg = "difference coverage violated:"
        if repeated:
            msg += f" repeated {repeated}"
        if in_subgroup:
            msg += f" subgroup hit {in_subgroup}"
        if missing:
            msg += f" missing {missing}"
        report.violations.append(msg)

    residues = Counter(x % stride for blk in F.base_blocks for x in blk)
    target = set(range(1, stride))
    if set(residues) != target or any(c != 1 for c in residues.values()):
        report.violations.append(
            f"residues mod {stride} are {sorted(residues.elements())}, expected each of 1..{stride - 1} once"
        )
    report.details["residues"] = sorted(residues)
    report.ok = not report.violations
    return report


def develop_family(F: DifferenceFamily) -> Design:
    """Translate the base blocks and the short block through Z_n."""
    report = validate_family(F)
    if not report:
        raise ValueError(f"invalid difference family: {report.first_violation()}")
    n = F.modulus
    blocks = {tuple(sorted((x + t) % n for x in blk)) for blk in F.base_blocks for t in range(n)}
    short = F.short_block()
    for j in range(F.stride):
        blocks.add(tuple(sorted([(x + j) % n for x in short[:-1]] + [F.infinity])))
    D = Design(F.v, blocks)
    expected = len(F.base_blocks) * n + F.stride
    if D.b != expected:
        raise StructureError(f"development produced {D.b} blocks, expected {expected}")
    return D


def starter_parallel_class(F: DifferenceFamily, D: Design | None = None) -> ParallelClass:
    """The short block plus every base block shifted by multiples of n/(k-1)."""
    if D is None:
        D = develop_family(F)
    n, stride = F.modulus, F.stride
    blocks = [F.short_block()]
    for blk in F.base_blocks:
        for j in range(F.k - 1):
            blocks.append(tuple((x + stride * j) % n for x in blk))
    seen = 0
    for blk in blocks:
        m = sum(1 << x for x in blk)
        if seen & m:
            raise StructureError("starter blocks overlap: the family is not resolvable")
        seen |= m
    if seen != (1 << F.v) - 1:
        raise StructureError("starter blocks do not cover every point")
    return ParallelClass(tuple(sorted(D.block_index(b) for b in blocks)))


def incidence_matrix(D: Design) -> list[list[int]]:
    """The v x b 0/1 matrix with rows indexed by points."""
    M = [[0] * D.b for _ in range(D.v)]
    for j, blk in enumerate(D.blocks):
        for x in blk:
            M[x][j] = 1
    return M


def validate_design(D: Design, lam: int | None = None) -> ValidationReport:
    """Check the 2-design axioms; every violation is listed."""
    report = ValidationReport(ok=True)
    v, b = D.v, D.b
    if b == 0:
        report.ok = False
        report.violations.append("design has no blocks")
        return report
    sizes = Counter(len(blk) for blk in D.blocks)
    k = sizes.most_common(1)[0][0]
    for blk in D.blocks:
        if len(blk) != k:
            report.violations.append(f"block {list(blk)} has size {len(blk)}, expected {k}")

    pair_count: Counter = Counter()
    replication = [0] * v
    for blk in D.blocks:
        for x in blk:
            replication[x] += 1
        pair_count.update(combinations(blk, 2))
    if lam is None:
        lam = pair_count.most_common(1)[0][1] if pair_count else 0
    bad_pairs = [(p, pair_count.get(p, 0)) for p in combinations(range(v), 2) if pair_count.get(p, 0) != lam]
    for (x, y), c in bad_pairs[:20]:
        report.violations.append(f"pair ({x},{y}) lies in {c} blocks, expected {lam}")
    if len(bad_pairs) > 20:
        report.violations.append(f"... {len(bad_pairs) - 20} more pair violations")

    r = lam * (v - 1) // (k - 1) if k > 1 else 0
    if k > 1 and lam * (v - 1) % (k - 1) == 0:
        for x in range(v):
            if replication[x] != r:
                report.violations.append(f"point {x} lies in {replication[x]} blocks, expected {r}")
    else:
        report.violations.append(f"r = {lam}*({v}-1)/({k}-1) is not an integer")
    if k > 1 and lam * v * (v - 1) % (k * (k - 1)) == 0:
        expected_b = lam * v * (v - 1) // (k * (k - 1))
        if b != expected_b:
            report.violations.append(f"design has {b} blocks, expected {expected_b}")
    else:
        report.violations.append("b = lambda*v(v-1)/(k(k-1)) is not an integer")
    report.details = {"v": v, "b": b, "r": r, "k": k, "lambda": lam, "uncovered_pairs": [p for p, c in bad_pairs if c == 0]}
    report.ok = not report.violations
    return report
