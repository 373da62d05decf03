"""Figures and delimited summaries written next to the pipeline artifacts."""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PARAMS = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    # fixed metadata keeps repeated runs byte-identical
    "svg.hashsalt": "arcembed",
}

# column order mirrors the usual census table for rotational designs
SUMMARY_COLUMNS = ["family", "aut", "classes", "resolutions", "edges", "m", "cliques", "rank", "verdict"]


def _new(width=4.0, height=3.0):
    plt.rcParams.update(PARAMS)
    return plt.subplots(figsize=(width, height))


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def degree_histogram(degrees: Sequence[int], path: Path) -> Path:
    """Bar chart of vertex degrees in the compatibility graph."""
    fig, ax = _new()
    counts = Counter(degrees)
    xs = sorted(counts)
    ax.bar(xs, [counts[x] for x in xs], width=0.8, color="0.35")
    ax.set_xlabel("degree")
    ax.set_ylabel("resolutions")
    ax.set_title("compatibility graph")
    return _save(fig, path)


def incidence_image(rows: Sequence[Sequence[int]], path: Path, title: str = "incidence") -> Path:
    """Black pixel wherever point i lies on line j."""
    fig, ax = _new(4.0, 4.0)
    ax.imshow(rows, cmap="Greys", interpolation="nearest", aspect="auto")
    ax.set_xlabel("line")
    ax.set_ylabel("point")
    ax.set_title(title)
    return _save(fig, path)


def line_spectrum(spectrum: Mapping[int, int], path: Path, title: str = "line intersections") -> Path:
    """How many lines meet the arc in each possible number of points."""
    fig, ax = _new()
    xs = sorted(spectrum)
    ax.bar(range(len(xs)), [spectrum[x] for x in xs], color="0.35")
    ax.set_xticks(range(len(xs)), [str(x) for x in xs])
    ax.set_xlabel("points of the arc on the line")
    ax.set_ylabel("lines")
    ax.set_title(title)
    return _save(fig, path)


def stage_timings(timings: Mapping[str, float], path: Path) -> Path:
    fig, ax = _new(4.5, 3.0)
    names = list(timings)
    ax.barh(range(len(names)), [timings[n] for n in names], color="0.35")
    ax.set_yticks(range(len(names)), names)
    ax.invert_yaxis()
    ax.set_xlabel("seconds")
    ax.set_title("stage timings")
    return _save(fig, path)


def write_summary_tsv(rows: Sequence[Mapping[str, object]], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, delimiter="\t", extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in SUMMARY_COLUMNS})
    return path


def format_table(row: Mapping[str, object]) -> str:
    """Fixed-width rendering of one summary row with a header."""
    headers = ["Family", "|Aut|", "Par. Cl.", "Res.", "Edges", "Comp. Res.", "Cliques", "2-rank", "Verdict"]
    values = [("-" if row.get(k) is None else str(row.get(k))) for k in SUMMARY_COLUMNS]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    line1 = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    line2 = "  ".join(v.ljust(w) for v, w in zip(values, widths))
    return line1.rstrip() + "\n" + line2.rstrip()
