"""JSON file formats and content hashing.

Family:      {"modulus": 51, "base_blocks": [[18, 33, 22, 46], ...]}
Design:      {"v": 52, "blocks": [[...], ...]}          0-based, infinity = v-1
Classes:     {"design_sha256": ..., "classes": [[block indices], ...]}
Resolutions: {"classes_sha256": ..., "resolutions": [[class indices], ...]}
Graph:       {"vertices": 460, "edges": [[i, j], ...]}  0-based
Cliques:     {"max_size": 52, "cliques": [[resolution indices], ...]}
Plane:       {"points": 273, "lines": [[...], ...]}
Arc:         {"plane": <plane object or path>, "arc_points": [...], "degree": 4}
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .compat import CliqueResult, CompatGraph
from .design import Design, DifferenceFamily, ParallelClass, StructureError
from .enumeration import Resolution
from .geometry import IncidenceStructure, MaximalArc

__all__ = [
    "ParseError",
    "dumps",
    "sha256_of",
    "read_json",
    "write_json",
    "load_family",
    "load_design",
    "load_classes",
    "load_resolutions",
    "load_graph",
    "load_cliques",
    "load_plane",
    "load_arc",
    "classes_from_json",
    "resolutions_from_json",
    "graph_from_json",
    "cliques_from_json",
    "classes_to_json",
    "resolutions_to_json",
    "graph_to_json",
    "cliques_to_json",
]


class ParseError(ValueError):
    """A file could not be read or does not follow its schema."""


def dumps(data: Any) -> str:
    """Deterministic JSON text (sorted keys, compact, trailing newline)."""
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def sha256_of(data: Any) -> str:
    if isinstance(data, (bytes, bytearray)):
        raw = bytes(data)
    elif isinstance(data, str):
        raw = data.encode()
    else:
        raw = dumps(data).encode()
    return hashlib.sha256(raw).hexdigest()


def read_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def write_json(path: str | Path, data: Any) -> str:
    """Write ``data`` deterministically; return the sha256 of the bytes written."""
    text = dumps(data)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return sha256_of(text)


def _field(data: Any, key: str, path) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{path}: missing field {key!r}")
    return data[key]


def _int_lists(value: Any, what: str, path) -> list[list[int]]:
    if not isinstance(value, list) or not all(
        isinstance(row, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in row) for row in value
    ):
        raise ParseError(f"{path}: {what} must be a list of integer lists")
    return value


def family_from_json(data: Any, path="<family>") -> DifferenceFamily:
    modulus = _field(data, "modulus", path)
    if not isinstance(modulus, int):
        raise ParseError(f"{path}: modulus must be an integer")
    blocks = _int_lists(_field(data, "base_blocks", path), "base_blocks", path)
    try:
        return DifferenceFamily(modulus, blocks)
    except StructureError as exc:
        raise ParseError(f"{path}: {exc}") from None


def load_family(path) -> DifferenceFamily:
    return family_from_json(read_json(path), path)


def load_design(path) -> Design:
    data = read_json(path)
    v = _field(data, "v", path)
    blocks = _int_lists(_field(data, "blocks", path), "blocks", path)
    try:
        return Design(v, blocks)
    except StructureError as exc:
        raise ParseError(f"{path}: {exc}") from None


def classes_to_json(classes, design_hash: str | None = None) -> dict:
    out = {"classes": [list(c.block_indices) for c in classes]}
    if design_hash:
        out["design_sha256"] = design_hash
    return out


def classes_from_json(data: Any, path="<classes>") -> list[ParallelClass]:
    return [ParallelClass(tuple(c)) for c in _int_lists(_field(data, "classes", path), "classes", path)]


def load_classes(path) -> list[ParallelClass]:
    return classes_from_json(read_json(path), path)


def resolutions_to_json(resolutions, classes_hash: str | None = None) -> dict:
    out = {"resolutions": [list(r.class_indices) for r in resolutions]}
    if classes_hash:
        out["classes_sha256"] = classes_hash
    return out


def resolutions_from_json(data: Any, path="<resolutions>") -> list[Resolution]:
    return [Resolution(tuple(r)) for r in _int_lists(_field(data, "resolutions", path), "resolutions", path)]


def load_resolutions(path) -> list[Resolution]:
    return resolutions_from_json(read_json(path), path)


def graph_to_json(G: CompatGraph) -> dict:
    return {"vertices": G.vertex_count, "edges": [list(e) for e in G.edges()]}


def load_graph(path) -> CompatGraph:
    return graph_from_json(read_json(path), path)


def graph_from_json(data: Any, path="<graph>") -> CompatGraph:
    n = _field(data, "vertices", path)
    edges = _int_lists(_field(data, "edges", path), "edges", path)
    try:
        return CompatGraph.from_edges(n, [tuple(e) for e in edges])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def cliques_to_json(result: CliqueResult) -> dict:
    return {"max_size": result.max_size, "cliques": [list(c) for c in result.cliques]}


def load_cliques(path) -> CliqueResult:
    return cliques_from_json(read_json(path), path)


def cliques_from_json(data: Any, path="<cliques>") -> CliqueResult:
    return CliqueResult(_field(data, "max_size", path), [tuple(c) for c in _field(data, "cliques", path)])


def plane_from_json(data: Any, path="<plane>") -> IncidenceStructure:
    n = _field(data, "points", path)
    lines = _int_lists(_field(data, "lines", path), "lines", path)
    try:
        return IncidenceStructure(n, lines)
    except StructureError as exc:
        raise ParseError(f"{path}: {exc}") from None


def load_plane(path) -> IncidenceStructure:
    return plane_from_json(read_json(path), path)


def load_arc(path) -> MaximalArc:
    data = read_json(path)
    plane = _field(data, "plane", path)
    if isinstance(plane, str):
        plane = load_plane(Path(path).parent / plane)
    else:
        plane = plane_from_json(plane, path)
    points = _field(data, "arc_points", path)
    degree = data.get("degree")
    if degree is None:
        mask = sum(1 << p for p in points)
        degree = max((m & mask).bit_count() for m in plane.line_masks)
    return MaximalArc(plane, tuple(sorted(points)), degree)
