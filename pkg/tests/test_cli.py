import json
from pathlib import Path

import pytest

from arcembed import io
from arcembed.cli import EMBEDDABLE, NO_CLAIM, NOT_EMBEDDABLE, main, run_pipeline

TOY = {"modulus": 3, "base_blocks": [[1, 2]]}
K6 = {"modulus": 5, "base_blocks": [[1, 4], [2, 3]]}
K8 = {"modulus": 7, "base_blocks": [[1, 6], [2, 5], [3, 4]]}


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


@pytest.mark.parametrize(
    "content",
    ['{"modulus": 3', '{"base_blocks": [[1, 2]]}', '{"modulus": 3, "base_blocks": [[1, "x"]]}', '[1, 2]'],
)
def test_malformed_family_exits_2(tmp_path, content):
    path = write(tmp_path, "bad.json", content)
    assert main(["validate-family", "--family", path]) == 2


def test_missing_file_exits_2(tmp_path):
    assert main(["validate-family", "--family", str(tmp_path / "nope.json")]) == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["pipeline", "--bogus"])
    assert exc.value.code == 2


def test_invalid_family_exits_3(tmp_path):
    blocks = [[18, 33, 22, 45], [21, 30, 37, 31], [6, 45, 25, 43], [24, 27, 19, 49]]
    path = write(tmp_path, "f.json", {"modulus": 51, "base_blocks": blocks})
    assert main(["validate-family", "--family", path]) == 3
    assert main(["develop", "--family", path, "--out-dir", str(tmp_path)]) == 3
    assert main(["pipeline", "--family", path, "--out-dir", str(tmp_path)]) == 3


def test_toy_pipeline_makes_no_claim(tmp_path, capsys):
    path = write(tmp_path, "toy.json", TOY)
    m = run_pipeline(path, out_dir=tmp_path / "out", threads=1)
    s = m["summary"]
    assert (s["classes"], s["resolutions"], s["m"], s["verdict"]) == (3, 1, 1, NO_CLAIM)
    assert m["embedding"] is None


def test_k6_pipeline_is_embeddable(tmp_path, capsys):
    path = write(tmp_path, "k6.json", K6)
    out = tmp_path / "out"
    assert main(["pipeline", "--family", path, "--out-dir", str(out), "--single-thread"]) == 0
    text = capsys.readouterr().out
    assert "EMBEDDABLE" in text and "PG(2,4)" in text
    manifest = json.loads((out / "manifest.json").read_text())
    s = manifest["summary"]
    assert (s["classes"], s["resolutions"], s["edges"], s["m"], s["cliques"], s["aut"]) == (15, 6, 15, 6, 1, 720)
    assert s["verdict"] == EMBEDDABLE
    assert manifest["embedding"]["q"] == 4
    assert manifest["embedding"]["desarguesian"] == [True]
    for fig in ("compat_degrees.png", "timings.png", "plane_incidence.png", "arc_spectrum.png"):
        assert (out / "figures" / fig).stat().st_size > 0
    rows = (out / "summary.tsv").read_text().splitlines()
    assert rows[0].split("\t")[:4] == ["family", "aut", "classes", "resolutions"]
    assert rows[1].split("\t")[-1] == EMBEDDABLE


def test_k8_pipeline_is_not_embeddable(tmp_path):
    """A hyperoval of a plane of order 6 would be needed, and no such plane exists."""
    path = write(tmp_path, "k8.json", K8)
    m = run_pipeline(path, out_dir=tmp_path / "out", threads=1, figures=False)
    s = m["summary"]
    assert (s["resolutions"], s["bound"], s["verdict"]) == (6240, 15, NOT_EMBEDDABLE)
    assert s["m"] < 15


def test_manifest_invariants(tmp_path):
    path = write(tmp_path, "k6.json", K6)
    out = tmp_path / "out"
    m = run_pipeline(path, out_dir=out, threads=1, figures=False)
    outputs = {r["stage"]: r["output_sha256"] for r in m["stages"]}
    parent = {"classes": "develop", "resolutions": "classes", "compat-graph": "resolutions",
              "clique": "compat-graph", "aut": "develop", "rank": "develop", "embed": "clique"}
    for r in m["stages"]:
        if r["stage"] in parent:
            assert r["input_sha256"] == outputs[parent[r["stage"]]]
    s = m["summary"]
    assert len(io.read_json(out / "classes.json")["classes"]) == s["classes"]
    assert len(io.read_json(out / "resolutions.json")["resolutions"]) == s["resolutions"]
    assert len(io.read_json(out / "graph.json")["edges"]) == s["edges"]
    cl = io.read_json(out / "cliques.json")
    assert (cl["max_size"], len(cl["cliques"])) == (s["m"], s["cliques"])
    for name in ("classes", "resolutions", "graph", "cliques"):
        assert io.sha256_of((out / f"{name}.json").read_text()) == outputs[
            {"classes": "classes", "resolutions": "resolutions", "graph": "compat-graph", "cliques": "clique"}[name]
        ]


def test_rerun_is_byte_identical_and_cache_is_used(tmp_path):
    path = write(tmp_path, "k6.json", K6)
    cache = tmp_path / "cache"
    run_pipeline(path, out_dir=tmp_path / "a", cache_dir=cache, threads=1)
    m2 = run_pipeline(path, out_dir=tmp_path / "b", cache_dir=cache, threads=1)
    assert all(r["cached"] for r in m2["stages"] if r["stage"] != "embed")
    run_pipeline(path, out_dir=tmp_path / "c", threads=2)
    for name in ("design", "classes", "resolutions", "graph", "cliques", "plane", "arc"):
        a = (tmp_path / "a" / f"{name}.json").read_bytes()
        assert a == (tmp_path / "b" / f"{name}.json").read_bytes()
        assert a == (tmp_path / "c" / f"{name}.json").read_bytes()
    assert (tmp_path / "a" / "summary.tsv").read_bytes() == (tmp_path / "c" / "summary.tsv").read_bytes()


def test_stage_subcommands_chain(tmp_path, capsys):
    fam = write(tmp_path, "k6.json", K6)
    d = str(tmp_path)
    assert main(["validate-family", "--family", fam]) == 0
    assert main(["develop", "--family", fam, "--out-dir", d]) == 0
    assert main(["classes", "--design", f"{d}/design.json", "--out-dir", d]) == 0
    assert main(["resolutions", "--design", f"{d}/design.json", "--classes", f"{d}/classes.json", "--out-dir", d]) == 0
    assert main(["compat-graph", "--classes", f"{d}/classes.json", "--resolutions", f"{d}/resolutions.json",
                 "--out-dir", d, "--dimacs", f"{d}/graph.dimacs"]) == 0
    assert Path(f"{d}/graph.dimacs").read_text().count("\ne ") == 15
    assert main(["clique", "--graph", f"{d}/graph.json", "--out-dir", d]) == 0
    capsys.readouterr()
    assert main(["embed", "--design", f"{d}/design.json", "--classes", f"{d}/classes.json",
                 "--resolutions", f"{d}/resolutions.json", "--cliques", f"{d}/cliques.json",
                 "--out-dir", d, "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == EMBEDDABLE
    assert main(["verify-plane", "--plane", f"{d}/plane-0.json"]) == 0
    assert io.load_arc(f"{d}/arc-0.json").degree == 2
    capsys.readouterr()
    assert main(["rank", "--plane", f"{d}/plane-0.json", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["rank"] == 10
    assert main(["aut", "--design", f"{d}/design.json", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["group_order"] == 720


def test_verify_plane_rejects_non_plane(tmp_path):
    path = write(tmp_path, "p.json", {"points": 4, "lines": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]})
    assert main(["verify-plane", "--plane", path]) == 3


def test_pg2q_and_denniston(tmp_path, capsys):
    assert main(["pg2q", "--q", "4", "--out-dir", str(tmp_path), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["points"] == 21
    assert main(["pg2q", "--q", "6", "--out-dir", str(tmp_path)]) == 3
    capsys.readouterr()
    assert main(["denniston", "--q", "8", "--k", "4", "--out-dir", str(tmp_path), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert (data["arc_points"], data["design_blocks"], data["resolutions"]) == (28, 63, 10)
    assert main(["denniston", "--q", "8", "--k", "3", "--out-dir", str(tmp_path)]) == 3


def test_rank_with_bad_prime(tmp_path):
    fam = write(tmp_path, "k6.json", K6)
    assert main(["rank", "--family", fam, "--p", "4"]) == 3


def test_pipeline_from_design_file(tmp_path):
    path = write(tmp_path, "d.json", {"v": 6, "blocks": [[a, b] for a in range(6) for b in range(a + 1, 6)]})
    m = run_pipeline(design_path=path, out_dir=tmp_path / "out", threads=1, figures=False)
    assert m["summary"]["verdict"] == EMBEDDABLE


def test_pipeline_rejects_non_steiner_design(tmp_path):
    path = write(tmp_path, "d.json", {"v": 4, "blocks": [[0, 1], [2, 3]]})
    assert main(["pipeline", "--design", path, "--out-dir", str(tmp_path)]) == 3
