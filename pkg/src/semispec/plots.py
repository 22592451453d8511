"""SVG plots regenerated from experiment CSVs.

Plots always read from files, never from in-memory state, so archived
runs can be re-plotted.  Output bytes are deterministic for fixed input
(fixed hash salt, no timestamps).
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .harness import CUT_ORDER, MATRIX_ORDER, read_records_csv
from .theory import thresholds

_MATRIX_LABEL = {
    "unnormalized": "L (unnormalized)",
    "sym": "L_sym (normalized)",
    "rw": "L_rw (random walk)",
    "adjacency": "A (adjacency)",
}

_X_LABEL = {"vary-pbar": "pbar", "clique-sweep": "clique size"}


def _deterministic_rc():
    plt.rcParams["svg.hashsalt"] = "semispec"


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_plots(csv_path, kind: str, out_path) -> list[Path]:
    """Render ``kind`` ('lines' | 'heatmap' | 'embed') from a CSV file."""
    _deterministic_rc()
    rows = read_records_csv(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no records to plot")
    if kind == "lines":
        return _plot_lines(rows, out_path)
    if kind == "heatmap":
        return _plot_heatmap(rows, out_path)
    if kind == "embed":
        return _plot_embedding(rows, out_path)
    raise ValueError(f"unknown plot kind {kind!r}")


def _require(rows, *fields):
    missing = [f for f in fields if f not in rows[0]]
    if missing:
        raise ValueError(f"records are missing required columns: {missing}")


def _mean_series(rows, x_field="param"):
    by_x: dict = {}
    for rec in rows:
        by_x.setdefault(float(rec[x_field]), []).append(float(rec["agreement"]))
    xs = sorted(by_x)
    return xs, [sum(by_x[x]) / len(by_x[x]) for x in xs]


def _plot_lines(rows, out_path) -> list[Path]:
    _require(rows, "experiment", "param", "matrix", "cut", "agreement")
    experiment = rows[0]["experiment"]
    out_path = Path(out_path)
    cuts = [c for c in CUT_ORDER if any(r["cut"] == c for r in rows)]
    written = []
    for cut in cuts:
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for mat in MATRIX_ORDER:
            sub = [r for r in rows if r["cut"] == cut and r["matrix"] == mat]
            if not sub:
                continue
            xs, ys = _mean_series(sub)
            ax.plot(xs, ys, marker="o", label=_MATRIX_LABEL.get(mat, mat))
        if experiment == "vary-pbar":
            first = rows[0]
            rep = thresholds(int(first["n"]), float(first["p"]), 1.0, float(first["q"]))
            ax.axvline(rep.pbar_thr, color="k", linestyle="-", gid="marker-pbar-thr")
            ax.axvline(rep.pbar_max, color="k", linestyle="--", gid="marker-pbar-max")
        ax.set_xlabel(_X_LABEL.get(experiment, "parameter"))
        ax.set_ylabel("mean agreement")
        ax.set_title(f"{experiment}: {cut} cut")
        ax.legend(loc="lower left", fontsize=8)
        target = out_path if len(cuts) == 1 else out_path.with_name(
            f"{out_path.stem}-{cut}{out_path.suffix}"
        )
        written.append(_save(fig, target))
    if experiment == "vary-pbar" and any(r["matrix"] == "unnormalized" for r in rows):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        cut = "zero" if any(r["cut"] == "zero" for r in rows) else cuts[0]
        sub = [r for r in rows if r["matrix"] == "unnormalized" and r["cut"] == cut]
        by_x: dict = {}
        for rec in sub:
            by_x.setdefault(float(rec["param"]), []).append(float(rec["embedding_variance"]))
        xs = sorted(by_x)
        ax.plot(xs, [sum(by_x[x]) / len(by_x[x]) for x in xs], marker="o", color="tab:blue")
        ax.set_xlabel("pbar")
        ax.set_ylabel("embedding variance")
        ax.set_title("vary-pbar: unnormalized embedding variance")
        written.append(_save(fig, out_path.with_name(
            f"{out_path.stem}-variance{out_path.suffix}")))
    return written


def _plot_heatmap(rows, out_path) -> list[Path]:
    _require(rows, "p", "q", "agreement")
    import numpy as np

    cells: dict = {}
    for rec in rows:
        cells.setdefault((float(rec["p"]), float(rec["q"])), []).append(
            float(rec["agreement"])
        )
    ps = sorted({k[0] for k in cells})
    qs = sorted({k[1] for k in cells})
    grid = np.zeros((len(ps), len(qs)))
    for (p, q), vals in cells.items():
        grid[ps.index(p), qs.index(q)] = sum(vals) / len(vals)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(qs, ps, grid, shading="nearest", vmin=0.0, vmax=1.0)
    fig.colorbar(mesh, ax=ax, label="mean agreement")
    first = rows[0]
    n = int(first["n"])
    pbar = float(first["pbar"]) if first.get("pbar") is not None else 0.5
    logn = math.log(n)
    q_axis = np.linspace(min(qs), max(qs), 200)
    p_thr = np.sqrt(pbar * logn / n) + q_axis
    p_info = (math.sqrt(2.0) * math.sqrt(logn / n) + np.sqrt(q_axis)) ** 2
    ax.plot(q_axis, p_thr, color="red", linestyle="-", gid="marker-p-thr",
            label="recovery threshold")
    ax.plot(q_axis, p_info, color="red", linestyle="--", gid="marker-p-info",
            label="information threshold")
    ax.set_ylim(min(ps), max(ps))
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title("pq-grid: unnormalized zero-cut agreement")
    ax.legend(loc="upper left", fontsize=8)
    return [_save(fig, out_path)]


def _plot_embedding(rows, out_path) -> list[Path]:
    _require(rows, "vertex", "planted_label")
    u2_cols = [k for k in rows[0] if k.startswith("u2_")]
    if not u2_cols:
        raise ValueError("embedding records carry no u2_* columns")
    n = max(int(r["vertex"]) for r in rows)
    ref = 1.0 / math.sqrt(n)
    ncols = 2
    nrows = (len(u2_cols) + 1) // 2
    fig, axes = plt.subplots(nrows, ncols, figsize=(10, 4 * nrows), squeeze=False)
    order = [f"u2_{m}" for m in MATRIX_ORDER if f"u2_{m}" in u2_cols]
    order += [c for c in u2_cols if c not in order]
    for i, col in enumerate(order):
        ax = axes[i // ncols][i % ncols]
        xs = [int(r["vertex"]) for r in rows]
        ys = [float(r[col]) for r in rows]
        colors = ["tab:blue" if int(r["planted_label"]) == 0 else "tab:orange"
                  for r in rows]
        ax.scatter(xs, ys, s=2, c=colors)
        for y, style in ((ref, "--"), (0.0, "-"), (-ref, "--")):
            ax.axhline(y, color="gray", linestyle=style, linewidth=0.8)
        ax.set_title(col.removeprefix("u2_"))
        ax.set_xlabel("vertex")
        ax.set_ylabel("embedding")
    for j in range(len(order), nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    return [_save(fig, out_path)]
