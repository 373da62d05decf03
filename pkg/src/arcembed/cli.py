"""Command-line entry point: one subcommand per stage plus ``pipeline``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 input that parses
but fails validation, 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import io, report
from .compat import (
    CliqueResult,
    build_compat_graph,
    compatible_set_bound,
    max_clique,
    verify_clique_compatible,
    write_dimacs,
)
from .design import Design, develop_family, incidence_matrix, validate_design, validate_family
from .enumeration import all_parallel_classes, all_resolutions
from .geometry import (
    ReconstructionError,
    check_arc,
    denniston_arc,
    extract_design,
    extract_resolutions,
    generate_pg2q,
    reconstruct_plane,
    verify_plane,
)
from .gf import field_for_order, p_rank
from .symmetry import automorphism_group_order, isomorphic

log = logging.getLogger("arcembed")

EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_INTERNAL = 4

EMBEDDABLE = "EMBEDDABLE"
NOT_EMBEDDABLE = "NOT EMBEDDABLE"
NO_CLAIM = "NO CLAIM"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _threads(args) -> int | None:
    return 1 if args.single_thread else args.threads


def _emit(args, data: dict, table: str | None = None) -> None:
    if args.format == "json" or table is None:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(table)


def _kv_table(data: dict) -> str:
    width = max(len(k) for k in data)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in data.items())


def _out(args, name: str) -> Path:
    return Path(args.out_dir) / name


def _require_valid(rep, what: str) -> None:
    if not rep:
        raise CliError(EXIT_INVALID, f"{what} failed validation: {rep.first_violation()}")


def _load_structure(args):
    """--design or --plane, whichever was given."""
    if getattr(args, "plane", None):
        return io.load_plane(args.plane)
    if getattr(args, "design", None):
        return io.load_design(args.design)
    if getattr(args, "family", None):
        return develop_family(io.load_family(args.family))
    raise CliError(EXIT_PARSE, "one of --design, --plane or --family is required")


# ---------------------------------------------------------------- stages


def cmd_validate_family(args) -> int:
    F = io.load_family(args.family)
    rep = validate_family(F)
    data = {"ok": rep.ok, "violations": rep.violations, "modulus": F.modulus, "k": F.k, "v": F.v}
    _emit(args, data, _kv_table({"family": args.family, "valid": rep.ok, **{f"violation {i}": v for i, v in enumerate(rep.violations)}}))
    return 0 if rep else EXIT_INVALID


def cmd_develop(args) -> int:
    F = io.load_family(args.family)
    _require_valid(validate_family(F), "family")
    D = develop_family(F)
    _require_valid(validate_design(D, 1), "developed design")
    h = io.write_json(_out(args, "design.json"), D.to_json())
    data = {"v": D.v, "b": D.b, "k": D.k, "design_sha256": h}
    _emit(args, data, _kv_table(data))
    return 0


def cmd_classes(args) -> int:
    D = io.load_design(args.design)
    classes = all_parallel_classes(D, threads=_threads(args))
    h = io.write_json(_out(args, "classes.json"), io.classes_to_json(classes, io.sha256_of(D.to_json())))
    data = {"classes": len(classes), "classes_sha256": h}
    _emit(args, data, _kv_table(data))
    return 0


def cmd_resolutions(args) -> int:
    D = io.load_design(args.design)
    classes = io.load_classes(args.classes)
    _check_classes(D, classes)
    res = all_resolutions(D, classes, threads=_threads(args))
    h = io.write_json(_out(args, "resolutions.json"), io.resolutions_to_json(res, io.sha256_of(io.classes_to_json(classes))))
    data = {"resolutions": len(res), "resolutions_sha256": h}
    _emit(args, data, _kv_table(data))
    return 0


def _check_classes(D: Design, classes) -> None:
    full = (1 << D.v) - 1
    for i, c in enumerate(classes):
        if any(not 0 <= b < D.b for b in c.block_indices):
            raise CliError(EXIT_INVALID, f"class {i} names a block outside the design")
        mask = 0
        for b in c.block_indices:
            if mask & D.masks[b]:
                raise CliError(EXIT_INVALID, f"class {i} has overlapping blocks")
            mask |= D.masks[b]
        if mask != full:
            raise CliError(EXIT_INVALID, f"class {i} does not cover every point")


def cmd_compat_graph(args) -> int:
    classes = io.load_classes(args.classes)
    res = io.load_resolutions(args.resolutions)
    G = build_compat_graph(res, classes, threads=_threads(args))
    h = io.write_json(_out(args, "graph.json"), io.graph_to_json(G))
    if args.dimacs:
        Path(args.dimacs).parent.mkdir(parents=True, exist_ok=True)
        with open(args.dimacs, "w") as fh:
            write_dimacs(G, fh, comment="compatibility graph of resolutions (vertex i+1 = resolution i)")
    data = {"vertices": G.vertex_count, "edges": G.edge_count, "graph_sha256": h}
    _emit(args, data, _kv_table(data))
    return 0


def cmd_clique(args) -> int:
    G = io.load_graph(args.graph)
    result = max_clique(G)
    h = io.write_json(_out(args, "cliques.json"), io.cliques_to_json(result))
    data = {"m": result.max_size, "cliques": len(result.cliques), "cliques_sha256": h}
    _emit(args, data, _kv_table(data))
    return 0


def embed_cliques(D, classes, res, cliques: CliqueResult):
    """Reconstruct a plane from every maximum clique of the right size."""
    bound = compatible_set_bound(D.v, D.k)
    planes = []
    if bound is None or cliques.max_size != bound:
        return bound, planes
    for clique in cliques.cliques:
        chosen = [res[i] for i in clique]
        if not verify_clique_compatible(clique, res, classes):
            raise CliError(EXIT_INTERNAL, f"clique {list(clique)} contains incompatible resolutions")
        try:
            plane, arc = reconstruct_plane(D, classes, chosen)
        except ReconstructionError as exc:
            raise CliError(EXIT_INTERNAL, f"reconstruction failed on a verified clique: {exc}") from None
        planes.append((plane, arc))
    return bound, planes


def _pg_check(plane) -> bool | None:
    """Isomorphic to the Desarguesian plane of the same order, or None if
    that plane cannot be generated here."""
    q = verify_plane(plane).details["q"]
    try:
        field_for_order(q)
    except ValueError:
        return None
    return isomorphic(plane, generate_pg2q(q))


def cmd_embed(args) -> int:
    D = io.load_design(args.design)
    classes = io.load_classes(args.classes)
    res = io.load_resolutions(args.resolutions)
    cliques = io.load_cliques(args.cliques)
    bound, planes = embed_cliques(D, classes, res, cliques)
    if bound is None:
        data = {"verdict": NO_CLAIM, "m": cliques.max_size}
    elif not planes:
        data = {"verdict": NOT_EMBEDDABLE, "m": cliques.max_size, "bound": bound}
    else:
        for i, (plane, arc) in enumerate(planes):
            io.write_json(_out(args, f"plane-{i}.json"), plane.to_json())
            io.write_json(_out(args, f"arc-{i}.json"), {"plane": f"plane-{i}.json", "arc_points": list(arc.arc_points), "degree": arc.degree})
        data = {
            "verdict": EMBEDDABLE,
            "m": cliques.max_size,
            "bound": bound,
            "planes": len(planes),
            "q": verify_plane(planes[0][0]).details["q"],
        }
    _emit(args, data, _kv_table(data))
    return 0


def cmd_verify_plane(args) -> int:
    plane = io.load_plane(args.plane)
    rep = verify_plane(plane)
    data = {"ok": rep.ok, "violations": rep.violations, "q": rep.details.get("q")}
    _emit(args, data, _kv_table({"plane": args.plane, "valid": rep.ok, "q": data["q"]}))
    return 0 if rep else EXIT_INVALID


def cmd_rank(args) -> int:
    S = _load_structure(args)
    M = incidence_matrix(S) if isinstance(S, Design) else S.incidence_matrix()
    try:
        r = p_rank(M, args.p)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    data = {"p": args.p, "rank": r}
    _emit(args, data, _kv_table(data))
    return 0


def cmd_aut(args) -> int:
    S = _load_structure(args)
    result = automorphism_group_order(S)
    data = result.to_json()
    _emit(args, data, _kv_table({"group_order": result.group_order, "generators": len(result.generators)}))
    return 0


def cmd_pg2q(args) -> int:
    try:
        plane = generate_pg2q(args.q)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    h = io.write_json(_out(args, f"pg2-{args.q}.json"), plane.to_json())
    data = {"q": args.q, "points": plane.point_count, "lines": plane.line_count, "plane_sha256": h}
    _emit(args, data, _kv_table(data))
    return 0


def cmd_denniston(args) -> int:
    try:
        arc = denniston_arc(args.q, args.k)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    out = Path(args.out_dir)
    io.write_json(out / "plane.json", arc.plane.to_json())
    io.write_json(out / "arc.json", {"plane": "plane.json", "arc_points": list(arc.arc_points), "degree": arc.degree})
    D = extract_design(arc)
    io.write_json(out / "design.json", D.to_json())
    ar = extract_resolutions(arc)
    data = {
        "q": args.q,
        "k": args.k,
        "arc_points": len(arc.arc_points),
        "design_blocks": D.b,
        "classes": len(ar.classes),
        "resolutions": len(ar.resolutions),
    }
    _emit(args, data, _kv_table(data))
    return 0


# ---------------------------------------------------------------- pipeline


class _Stages:
    """Runs stages in order, caching outputs by the hash of their input."""

    def __init__(self, cache_dir: Path | None):
        self.cache_dir = cache_dir
        self.records: list[dict] = []

    def run(self, name: str, input_hash: str, compute):
        start = time.perf_counter()
        data = None
        cached = False
        path = None
        if self.cache_dir is not None:
            path = self.cache_dir / f"{name}-{input_hash[:24]}.json"
            if path.exists():
                try:
                    data = io.read_json(path)
                    cached = True
                except io.ParseError:
                    log.warning("ignoring unreadable cache entry %s", path)
        if data is None:
            data = compute()
            if path is not None:
                io.write_json(path, data)
        out_hash = io.sha256_of(data)
        self.records.append(
            {
                "stage": name,
                "input_sha256": input_hash,
                "output_sha256": out_hash,
                "seconds": round(time.perf_counter() - start, 3),
                "cached": cached,
            }
        )
        log.info("%s: %.2f s%s", name, self.records[-1]["seconds"], " (cached)" if cached else "")
        return data, out_hash


def run_pipeline(
    family_path=None,
    design_path=None,
    out_dir=".",
    cache_dir=None,
    threads: int | None = 1,
    figures: bool = True,
) -> dict:
    """All stages from a family (or design) to a verdict.  Returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = _Stages(Path(cache_dir) if cache_dir else None)

    if family_path is not None:
        F = io.load_family(family_path)
        rep = validate_family(F)
        _require_valid(rep, "difference family")
        family_json = {"modulus": F.modulus, "base_blocks": [list(b) for b in F.base_blocks]}
        design_json, design_hash = stages.run("develop", io.sha256_of(family_json), lambda: develop_family(F).to_json())
        source = str(family_path)
    elif design_path is not None:
        D0 = io.load_design(design_path)
        design_json = D0.to_json()
        design_hash = io.sha256_of(design_json)
        source = str(design_path)
    else:
        raise CliError(EXIT_PARSE, "pipeline needs --family or --design")

    D = Design.from_json(design_json)
    _require_valid(validate_design(D, 1), "design")
    if D.v % D.k:
        raise CliError(EXIT_INVALID, f"v={D.v} is not divisible by k={D.k}; the design is not resolvable")
    io.write_json(out / "design.json", design_json)

    classes_json, classes_hash = stages.run(
        "classes",
        design_hash,
        lambda: io.classes_to_json(all_parallel_classes(D, threads=threads), design_hash),
    )
    classes = io.classes_from_json(classes_json)

    res_json, res_hash = stages.run(
        "resolutions",
        classes_hash,
        lambda: io.resolutions_to_json(all_resolutions(D, classes, threads=threads), classes_hash),
    )
    res = io.resolutions_from_json(res_json)

    graph_json, graph_hash = stages.run(
        "compat-graph",
        res_hash,
        lambda: {**io.graph_to_json(build_compat_graph(res, classes, threads=threads)), "resolutions_sha256": res_hash},
    )
    G = io.graph_from_json(graph_json)

    cl_json, cl_hash = stages.run(
        "clique", graph_hash, lambda: {**io.cliques_to_json(max_clique(G)), "graph_sha256": graph_hash}
    )
    cliques = io.cliques_from_json(cl_json)

    aut_json, _ = stages.run("aut", design_hash, lambda: automorphism_group_order(D).to_json())
    rank_json, _ = stages.run("rank", design_hash, lambda: {"p": 2, "rank": p_rank(incidence_matrix(D), 2)})

    for name, data in (
        ("classes.json", classes_json),
        ("resolutions.json", res_json),
        ("graph.json", graph_json),
        ("cliques.json", cl_json),
    ):
        io.write_json(out / name, data)

    bound = compatible_set_bound(D.v, D.k)
    if bound is not None and cliques.max_size > bound:
        raise CliError(EXIT_INTERNAL, f"clique of size {cliques.max_size} exceeds the bound {bound}")

    start = time.perf_counter()
    bound, planes = embed_cliques(D, classes, res, cliques)
    embedding = None
    if bound is None:
        verdict = NO_CLAIM
    elif not planes:
        verdict = NOT_EMBEDDABLE
    else:
        verdict = EMBEDDABLE
        plane, arc = planes[0]
        q = verify_plane(plane).details["q"]
        io.write_json(out / "plane.json", plane.to_json())
        io.write_json(out / "arc.json", {"plane": "plane.json", "arc_points": list(arc.arc_points), "degree": arc.degree})
        spectrum = check_arc(plane, arc.arc_points, arc.degree).details["spectrum"]
        embedding = {
            "q": q,
            "planes": len(planes),
            "plane_rank": p_rank(plane.incidence_matrix(), 2),
            "desarguesian": [_pg_check(p) for p, _ in planes],
            "arc_spectrum": {str(k): v for k, v in spectrum.items()},
            "plane_sha256": io.sha256_of(plane.to_json()),
        }
    stages.records.append(
        {
            "stage": "embed",
            "input_sha256": cl_hash,
            "output_sha256": embedding["plane_sha256"] if embedding else io.sha256_of(verdict),
            "seconds": round(time.perf_counter() - start, 3),
            "cached": False,
        }
    )

    summary = {
        "family": Path(source).stem,
        "v": D.v,
        "k": D.k,
        "blocks": D.b,
        "aut": aut_json["group_order"],
        "classes": len(classes),
        "resolutions": len(res),
        "edges": len(graph_json["edges"]),
        "m": cliques.max_size,
        "cliques": len(cliques.cliques),
        "rank": rank_json["rank"],
        "bound": bound,
        "verdict": verdict,
    }
    manifest = {
        "input": source,
        "stages": stages.records,
        "summary": summary,
        "embedding": embedding,
    }
    report.write_summary_tsv([summary], out / "summary.tsv")
    if figures:
        fig_dir = out / "figures"
        report.degree_histogram(G.degrees(), fig_dir / "compat_degrees.png")
        report.stage_timings({r["stage"]: r["seconds"] for r in stages.records}, fig_dir / "timings.png")
        if embedding:
            report.incidence_image(plane.incidence_matrix(), fig_dir / "plane_incidence.png", f"reconstructed plane, q={embedding['q']}")
            report.line_spectrum({int(k): v for k, v in embedding["arc_spectrum"].items()}, fig_dir / "arc_spectrum.png")
    # timings vary between runs, so the manifest is not part of any cache key
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def cmd_pipeline(args) -> int:
    manifest = run_pipeline(
        family_path=args.family,
        design_path=args.design,
        out_dir=args.out_dir,
        cache_dir=args.cache_dir,
        threads=_threads(args),
        figures=not args.no_figures,
    )
    s = manifest["summary"]
    if args.format == "json":
        print(json.dumps(manifest, indent=2, sort_keys=True))
        return 0
    print(report.format_table(s))
    emb = manifest["embedding"]
    if s["verdict"] == EMBEDDABLE:
        iso = emb["desarguesian"][0]
        iso_text = {True: f"isomorphic to PG(2,{emb['q']})", False: f"not isomorphic to PG(2,{emb['q']})", None: "Desarguesian check unavailable"}[iso]
        print(f"verdict: {EMBEDDABLE} as a maximal ({s['v']},{s['k']})-arc in a plane of order {emb['q']}, 2-rank {emb['plane_rank']}, {iso_text}")
    elif s["verdict"] == NOT_EMBEDDABLE:
        print(f"verdict: {NOT_EMBEDDABLE} (m = {s['m']} < {s['bound']})")
    else:
        print(f"verdict: {NO_CLAIM} (v={s['v']}, k={s['k']} do not describe a maximal arc in a plane with k < q)")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for written artifacts")
    common.add_argument("--format", choices=("json", "table"), default="table")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--single-thread", action="store_true", help="run every stage in-process")
    common.add_argument("--cache-dir", default=None, help="reuse stage outputs keyed by input hash")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="arcembed", description="Embed resolvable Steiner designs as maximal arcs.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=fn)
        return sp

    add("validate-family", cmd_validate_family, "check a difference family").add_argument("--family", required=True)
    add("develop", cmd_develop, "develop a family into a design").add_argument("--family", required=True)
    add("classes", cmd_classes, "enumerate parallel classes").add_argument("--design", required=True)
    sp = add("resolutions", cmd_resolutions, "enumerate resolutions")
    sp.add_argument("--design", required=True)
    sp.add_argument("--classes", required=True)
    sp = add("compat-graph", cmd_compat_graph, "build the compatibility graph")
    sp.add_argument("--classes", required=True)
    sp.add_argument("--resolutions", required=True)
    sp.add_argument("--dimacs", default=None, help="also write the graph in DIMACS format")
    add("clique", cmd_clique, "maximum cliques of a graph").add_argument("--graph", required=True)
    sp = add("embed", cmd_embed, "reconstruct planes from maximum cliques")
    for flag in ("--design", "--classes", "--resolutions", "--cliques"):
        sp.add_argument(flag, required=True)
    add("verify-plane", cmd_verify_plane, "check projective-plane axioms").add_argument("--plane", required=True)
    for name, fn, text in (("rank", cmd_rank, "p-rank of an incidence matrix"), ("aut", cmd_aut, "automorphism group order")):
        sp = add(name, fn, text)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--design")
        g.add_argument("--plane")
        g.add_argument("--family")
        if name == "rank":
            sp.add_argument("--p", type=int, default=2)
    add("pg2q", cmd_pg2q, "generate PG(2,q)").add_argument("--q", type=int, required=True)
    sp = add("denniston", cmd_denniston, "Denniston maximal arc in PG(2,2^m)")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp = add("pipeline", cmd_pipeline, "run every stage and print a verdict")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--family")
    g.add_argument("--design")
    sp.add_argument("--no-figures", action="store_true", help="skip the matplotlib figures")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ReconstructionError, AssertionError) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
