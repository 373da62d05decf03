"""Projective planes, maximal arcs, and the passage between an arc and its
Steiner design.

Point and line indices are plain integers; lines are stored as sorted point
tuples and as bitsets.  PG(2,q) points are normalised homogeneous
coordinates (first nonzero coordinate equal to 1) in lexicographic order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .design import Design, ParallelClass, StructureError, ValidationReport, validate_design
from .enumeration import Resolution
from .gf import GF2m, field_for_order

__all__ = [
    "ReconstructionError",
    "IncidenceStructure",
    "MaximalArc",
    "ArcResolutions",
    "generate_pg2q",
    "verify_plane",
    "anisotropic_coefficient",
    "denniston_arc",
    "extract_design",
    "extract_resolutions",
    "reconstruct_plane",
    "dualize",
    "check_arc",
]


class ReconstructionError(RuntimeError):
    """A set of resolutions failed to close up into a projective plane."""


@dataclass(frozen=True)
class IncidenceStructure:
    point_count: int
    lines: tuple[tuple[int, ...], ...]
    point_tags: tuple[str, ...] | None = None
    line_tags: tuple[str, ...] | None = None

    def __init__(self, point_count: int, lines, point_tags=None, line_tags=None):
        lines = tuple(tuple(sorted(int(p) for p in line)) for line in lines)
        for line in lines:
            if not line:
                raise StructureError("empty line")
            if line[0] < 0 or line[-1] >= point_count:
                raise StructureError(f"line {list(line)} leaves the point range")
        if len(set(lines)) != len(lines):
            raise StructureError("repeated line")
        object.__setattr__(self, "point_count", int(point_count))
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "point_tags", tuple(point_tags) if point_tags else None)
        object.__setattr__(self, "line_tags", tuple(line_tags) if line_tags else None)

    @property
    def line_count(self) -> int:
        return len(self.lines)

    @cached_property
    def line_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << p for p in line) for line in self.lines)

    @cached_property
    def lines_through(self) -> tuple[tuple[int, ...], ...]:
        through: list[list[int]] = [[] for _ in range(self.point_count)]
        for j, line in enumerate(self.lines):
            for p in line:
                through[p].append(j)
        return tuple(tuple(t) for t in through)

    def incidence_matrix(self) -> list[list[int]]:
        M = [[0] * self.line_count for _ in range(self.point_count)]
        for j, line in enumerate(self.lines):
            for p in line:
                M[p][j] = 1
        return M

    def incidence_rows(self) -> list[int]:
        """Point rows of the incidence matrix as bitsets over lines."""
        rows = [0] * self.point_count
        for j, line in enumerate(self.lines):
            for p in line:
                rows[p] |= 1 << j
        return rows

    def to_json(self) -> dict:
        return {"points": self.point_count, "lines": [list(line) for line in self.lines]}

    @classmethod
    def from_json(cls, data: dict) -> IncidenceStructure:
        return cls(data["points"], data["lines"])


@dataclass(frozen=True)
class MaximalArc:
    plane: IncidenceStructure
    arc_points: tuple[int, ...]
    degree: int

    @property
    def order(self) -> int:
        return len(self.plane.lines[0]) - 1

    @property
    def s(self) -> int:
        return self.order // self.degree

    @cached_property
    def mask(self) -> int:
        return sum(1 << p for p in self.arc_points)

    def secant_lines(self) -> list[int]:
        return [j for j, m in enumerate(self.plane.line_masks) if m & self.mask]

    def external_lines(self) -> list[int]:
        return [j for j, m in enumerate(self.plane.line_masks) if not m & self.mask]

    def external_points(self) -> list[int]:
        arc = set(self.arc_points)
        return [p for p in range(self.plane.point_count) if p not in arc]

    def to_json(self) -> dict:
        return {"plane": self.plane.to_json(), "arc_points": list(self.arc_points), "degree": self.degree}


def check_arc(plane: IncidenceStructure, points: Sequence[int], k: int) -> ValidationReport:
    """Every line meets ``points`` in 0 or k points."""
    mask = sum(1 << p for p in points)
    spectrum = Counter((m & mask).bit_count() for m in plane.line_masks)
    report = ValidationReport(ok=True, details={"spectrum": dict(sorted(spectrum.items()))})
    bad = sorted(set(spectrum) - {0, k})
    if bad:
        report.ok = False
        report.violations.append(f"lines meet the arc in {bad} points, expected 0 or {k}")
    return report


def _normalized_vectors(F) -> list[tuple[int, int, int]]:
    q = F.order
    vecs = [(1, y, z) for y in range(q) for z in range(q)]
    vecs += [(0, 1, z) for z in range(q)]
    vecs.append((0, 0, 1))
    return sorted(vecs)


def generate_pg2q(q: int) -> IncidenceStructure:
    """PG(2,q) over GF(q) for q prime or a power of two."""
    try:
        F = field_for_order(q)
    except ValueError as exc:
        raise ValueError(f"cannot build PG(2,{q}): {exc}") from None
    pts = _normalized_vectors(F)
    add, mul = F.add, F.mul
    lines = []
    for a, b, c in pts:
        line = [
            i
            for i, (x, y, z) in enumerate(pts)
            if add(add(mul(a, x), mul(b, y)), mul(c, z)) == 0
        ]
        lines.append(line)
    return IncidenceStructure(len(pts), lines)


def verify_plane(S: IncidenceStructure) -> ValidationReport:
    """Projective-plane axioms; ``details['q']`` holds the order when valid."""
    report = ValidationReport(ok=True)
    n, L = S.point_count, S.line_count
    if L == 0:
        report.ok = False
        report.violations.append("no lines")
        return report
    q = len(S.lines[0]) - 1
    report.details["q"] = q
    if q < 2:
        report.violations.append(f"lines have {q + 1} points; a plane needs at least 3")
    expected = q * q + q + 1
    if n != expected:
        report.violations.append(f"{n} points, expected q^2+q+1 = {expected}")
    if L != expected:
        report.violations.append(f"{L} lines, expected q^2+q+1 = {expected}")
    for j, line in enumerate(S.lines):
        if len(line) != q + 1:
            report.violations.append(f"line {j} has {len(line)} points, expected {q + 1}")
            break
    for p, through in enumerate(S.lines_through):
        if len(through) != q + 1:
            report.violations.append(f"point {p} lies on {len(through)} lines, expected {q + 1}")
            break
    # any two points on exactly one line
    rows = S.incidence_rows()
    bad_pts = next(
        ((a, b, (rows[a] & rows[b]).bit_count()) for a, b in combinations(range(n), 2) if (rows[a] & rows[b]).bit_count() != 1),
        None,
    )
    if bad_pts:
        a, b, c = bad_pts
        report.violations.append(f"points {a},{b} lie on {c} common lines")
    masks = S.line_masks
    bad_lines = next(
        ((a, b, (masks[a] & masks[b]).bit_count()) for a, b in combinations(range(L), 2) if (masks[a] & masks[b]).bit_count() != 1),
        None,
    )
    if bad_lines:
        a, b, c = bad_lines
        report.violations.append(f"lines {a},{b} meet in {c} points")
    report.ok = not report.violations
    return report


def anisotropic_coefficient(F: GF2m) -> int:
    """Smallest h with x^2 + h x + 1 irreducible, i.e. x^2 + hxy + y^2 anisotropic."""
    for h in F.elements():
        if all(F.add(F.add(F.mul(x, x), F.mul(h, x)), 1) != 0 for x in F.elements()):
            return h
    raise ValueError(f"no anisotropic form over {F!r}")


def _span(F: GF2m, gens: Sequence[int]) -> set[int]:
    H = {0}
    for g in gens:
        H |= {F.add(h, g) for h in H}
    return H


def denniston_arc(
    q: int,
    k: int,
    h: int | None = None,
    subgroup: Sequence[int] | None = None,
    plane: IncidenceStructure | None = None,
) -> MaximalArc:
    """Denniston maximal arc of degree k in PG(2,q), q = 2^m.

    Affine points (x, y, 1) with Q(x,y) = x^2 + hxy + y^2 in an additive
    subgroup H of order k.  By default h is the smallest anisotropic
    coefficient and H is spanned by 1, a, ..., a^(i-1) where a = x is the
    polynomial-basis generator.
    """
    if q < 4 or q & (q - 1):
        raise ValueError(f"q must be a power of two >= 4, got {q}")
    if k < 2 or k >= q or k & (k - 1):
        raise ValueError(f"k must be a power of two with 2 <= k < q, got k={k}")
    F = GF2m(q.bit_length() - 1)
    if h is None:
        h = anisotropic_coefficient(F)
    if subgroup is None:
        i = k.bit_length() - 1
        gens = [1 << j for j in range(i)]  # 1, a, a^2, ... in polynomial basis
        H = _span(F, gens)
    else:
        H = set(subgroup)
        if 0 not in H or any(F.add(a, b) not in H for a in H for b in H):
            raise ValueError("subgroup is not closed under addition")
    if len(H) != k:
        raise ValueError(f"subgroup has order {len(H)}, expected {k}")
    if plane is None:
        plane = generate_pg2q(q)
    pts = _normalized_vectors(F)
    where = {p: i for i, p in enumerate(pts)}
    arc = []
    for x in range(q):
        for y in range(q):
            Q = F.add(F.add(F.mul(x, x), F.mul(h, F.mul(x, y))), F.mul(y, y))
            if Q in H:
                # (x, y, 1) normalised
                if x:
                    xi = F.inv(x)
                    vec = (1, F.mul(y, xi), xi)
                elif y:
                    vec = (0, 1, F.inv(y))
                else:
                    vec = (0, 0, 1)
                arc.append(where[vec])
    arc.sort()
    report = check_arc(plane, arc, k)
    if not report:
        raise AssertionError(f"Denniston construction failed: {report.first_violation()}")
    s = q // k
    if len(arc) != (q - s + 1) * k:
        raise AssertionError(f"arc has {len(arc)} points, expected {(q - s + 1) * k}")
    return MaximalArc(plane, tuple(arc), k)


def _validate_arc(A: MaximalArc) -> None:
    report = check_arc(A.plane, A.arc_points, A.degree)
    if not report:
        raise ValueError(f"not a maximal arc: {report.first_violation()}")


def extract_design(A: MaximalArc) -> Design:
    """Nonempty line sections of the arc, relabelled to 0..m-1 in plane order."""
    _validate_arc(A)
    relabel = {p: i for i, p in enumerate(A.arc_points)}
    blocks = [[relabel[p] for p in A.plane.lines[j] if p in relabel] for j in A.secant_lines()]
    D = Design(len(A.arc_points), blocks)
    report = validate_design(D, lam=1)
    if not report:
        raise ValueError(f"arc sections do not form a Steiner design: {report.first_violation()}")
    return D


@dataclass
class ArcResolutions:
    design: Design
    classes: list[ParallelClass]
    resolutions: list[Resolution]
    class_points: list[int] = field(default_factory=list)  # external point behind each class
    resolution_lines: list[int] = field(default_factory=list)  # external line behind each resolution


def extract_resolutions(A: MaximalArc) -> ArcResolutions:
    """Classes from external points, resolutions from external lines."""
    D = extract_design(A)
    plane = A.plane
    relabel = {p: i for i, p in enumerate(A.arc_points)}
    arc = A.mask
    masks = plane.line_masks

    class_of_point: dict[int, ParallelClass] = {}
    for p in A.external_points():
        idx = []
        for j in plane.lines_through[p]:
            if masks[j] & arc:
                idx.append(D.block_index(relabel[x] for x in plane.lines[j] if x in relabel))
        pc = ParallelClass(tuple(sorted(idx)))
        covered = 0
        for i in pc.block_indices:
            if covered & D.masks[i]:
                raise AssertionError(f"secants through external point {p} overlap on the arc")
            covered |= D.masks[i]
        if covered != (1 << D.v) - 1:
            raise AssertionError(f"secants through external point {p} miss arc points")
        class_of_point[p] = pc

    ext_points = sorted(class_of_point, key=lambda p: class_of_point[p])
    classes = [class_of_point[p] for p in ext_points]
    index = {c: i for i, c in enumerate(classes)}
    if len(index) != len(classes):
        raise AssertionError("two external points give the same parallel class")

    pairs = []
    for j in A.external_lines():
        res = Resolution(tuple(sorted(index[class_of_point[p]] for p in plane.lines[j])))
        pairs.append((res, j))
    pairs.sort()
    return ArcResolutions(
        design=D,
        classes=classes,
        resolutions=[r for r, _ in pairs],
        class_points=ext_points,
        resolution_lines=[j for _, j in pairs],
    )


def reconstruct_plane(
    D: Design,
    classes: Sequence[ParallelClass],
    clique: Sequence[Resolution],
) -> tuple[IncidenceStructure, MaximalArc]:
    """Plane on design points + clique classes; lines are the blocks extended
    by the classes containing them, plus one line per resolution.

    ``clique`` must hold (sk-k+1)s pairwise compatible resolutions.
    """
    v, k = D.v, D.k
    if k < 2 or v % k:
        raise ValueError(f"design with v={v}, k={k} is not resolvable")
    if (v // k - 1) % (k - 1):
        raise ValueError(f"v={v}, k={k} do not have the form (sk-s+1)k")
    s = (v // k - 1) // (k - 1)
    q = s * k
    m_max = (s * k - k + 1) * s
    if len(clique) != m_max:
        raise ValueError(f"clique has {len(clique)} resolutions, reconstruction needs {m_max}")

    used = sorted({c for r in clique for c in r.class_indices})
    n_points = q * q + q + 1
    if v + len(used) != n_points:
        raise ReconstructionError(f"clique uses {len(used)} classes, expected {n_points - v}")
    point_of_class = {c: v + i for i, c in enumerate(used)}

    classes_of_block: list[list[int]] = [[] for _ in range(D.b)]
    for c in used:
        for bi in classes[c].block_indices:
            classes_of_block[bi].append(point_of_class[c])
    lines = []
    tags = []
    for bi, blk in enumerate(D.blocks):
        lines.append(list(blk) + classes_of_block[bi])
        tags.append("secant")
    for r in clique:
        lines.append([point_of_class[c] for c in r.class_indices])
        tags.append("external")
    for j, line in enumerate(lines):
        if len(line) != q + 1:
            raise ReconstructionError(f"line {j} has {len(line)} points, expected {q + 1}")
    point_tags = ["arc"] * v + ["external"] * len(used)
    plane = IncidenceStructure(n_points, lines, point_tags=point_tags, line_tags=tags)
    report = verify_plane(plane)
    if not report:
        raise ReconstructionError(f"reconstructed structure is not a plane: {report.first_violation()}")
    arc = MaximalArc(plane, tuple(range(v)), k)
    _validate_arc(arc)
    return plane, arc


def dualize(S: IncidenceStructure) -> IncidenceStructure:
    """Swap points and lines: dual point j is line j, dual line p is the set
    of lines through point p."""
    report = verify_plane(S)
    if not report:
        raise ValueError(f"dualize needs a projective plane: {report.first_violation()}")
    return IncidenceStructure(S.line_count, [list(t) for t in S.lines_through])
