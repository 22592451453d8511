"""Seeded, parallel experiment runs with CSV output and SVG plots.

Each trial's seed stream is a stable hash of its parameter point, so
grids can be refined without disturbing existing points, and workers can
run in any order.  CSVs are written from sorted records with fixed float
formatting: identical configs give byte-identical files regardless of
the worker count.  (Wall-clock timings are therefore zeroed in the CSV
unless explicitly requested with ``timing``.)
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bisection import second_embedding, sweep_cut, zero_cut
from .graph import Graph
from .metrics import agreement, embedding_variance, ideal_second_eigenvector
from .models import (
    DcmSpec,
    erdos_renyi,
    nssbm_benchmark_spec,
    planted_clique_internal,
    sample_block_model,
    sample_dcm,
)
from .streams import Seed, stable_stream
from .theory import thresholds

EXPERIMENTS = ("vary-pbar", "pq-grid", "clique-sweep", "embed-dump")
MATRIX_ORDER = ("unnormalized", "sym", "rw", "adjacency")
CUT_ORDER = ("zero", "sweep")

RECORD_FIELDS = (
    "experiment", "n", "p", "pbar", "q", "K", "param", "matrix", "cut",
    "trial", "seed", "agreement", "misclassification", "lambda2", "lambda3",
    "embedding_variance", "degeneracy_flag", "runtime_ms",
)

SEED_ENV_VAR = "SEMISPEC_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 2000
    p: float | None = None            # defaults to 24 ln(n)/n
    q: float | None = None            # defaults to 8 ln(n)/n
    pbar: float | None = None
    K: float | None = None
    trials: int | None = None
    base_seed: int | None = None      # falls back to $SEMISPEC_SEED, then 0
    pbar_list: tuple[float, ...] | None = None
    pbar_points: int = 12
    pq_points: int = 20
    pq_min: float | None = None       # defaults to 1/n
    pq_max: float = 0.45
    clique_sizes: tuple[int, ...] | None = None
    clique_size: int | None = None    # embed-dump DCM point
    matrices: tuple[str, ...] = MATRIX_ORDER
    cuts: tuple[str, ...] = CUT_ORDER
    model: str = "nssbm-bench"        # embed-dump source model
    tol: float | None = None
    dense_cap: int = 512
    jobs: int = 1
    timing: bool = False
    out_dir: str = "."

    def resolved(self) -> "ExperimentConfig":
        """Fill experiment-specific defaults; validate."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        n = self.n
        if n < 4 or n % 4:
            raise ConfigError(f"n must be a positive multiple of 4, got {n}")
        logn = math.log(n)
        changes: dict = {}
        if self.base_seed is None:
            changes["base_seed"] = int(os.environ.get(SEED_ENV_VAR, "0"))
        dcm_like = self.experiment == "clique-sweep" or (
            self.experiment == "embed-dump" and self.model == "dcm-clique"
        )
        if dcm_like:
            if self.p is None:
                changes["p"] = 9.0 / math.sqrt(n)
            if self.q is None:
                changes["q"] = 1.0 / math.sqrt(n)
        elif self.experiment != "pq-grid":
            # pq-grid takes p and q from its own grid
            if self.p is None:
                changes["p"] = 24 * logn / n
            if self.q is None:
                changes["q"] = 8 * logn / n
        if self.experiment == "clique-sweep":
            if self.clique_sizes is None:
                h = n // 2
                sizes = np.unique(np.round(np.linspace(h / 10, h, 10)).astype(int))
                changes["clique_sizes"] = tuple(int(s) for s in sizes)
            if self.trials is None:
                changes["trials"] = 10
        if self.experiment == "vary-pbar" and self.trials is None:
            changes["trials"] = 10
        if self.experiment == "pq-grid":
            if self.trials is None:
                changes["trials"] = 3
            if self.pbar is None:
                changes["pbar"] = 0.5
            if self.pq_min is None:
                changes["pq_min"] = 1.0 / n
        if self.experiment == "embed-dump":
            if self.trials is None:
                changes["trials"] = 1
            if self.model not in ("nssbm-bench", "dcm-clique"):
                raise ConfigError(f"embed-dump model must be nssbm-bench or dcm-clique, "
                                  f"got {self.model!r}")
        cfg = replace(self, **changes)
        for name in cfg.matrices:
            if name not in MATRIX_ORDER:
                raise ConfigError(f"unknown matrix {name!r}")
        for cut in cfg.cuts:
            if cut not in CUT_ORDER:
                raise ConfigError(f"unknown cut {cut!r}")
        if cfg.trials is not None and cfg.trials < 1:
            raise ConfigError("trials must be >= 1")
        for prob_name in ("p", "q", "pbar"):
            v = getattr(cfg, prob_name)
            if v is not None and not 0 <= v <= 1:
                raise ConfigError(f"{prob_name} = {v} is not a probability")
        return cfg

    def vary_pbar_grid(self) -> list[float]:
        if self.pbar_list is not None:
            return [float(x) for x in self.pbar_list]
        if self.pbar is not None:
            return [float(self.pbar)]
        return [float(x) for x in np.linspace(self.p, 1.0, self.pbar_points)]


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' comments; lists are comma-separated."""
    out: dict = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = _parse_value(val)
    return out


def _parse_value(val: str):
    if "," in val:
        return tuple(_parse_value(v.strip()) for v in val.split(","))
    low = val.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            continue
    return val


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    unknown = set(mapping) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(mapping)
    for key in ("pbar_list", "clique_sizes", "matrices", "cuts"):
        if key in kwargs and not isinstance(kwargs[key], tuple):
            kwargs[key] = (kwargs[key],)
    return ExperimentConfig(**kwargs)


# -- seeding -------------------------------------------------------------------


def point_seed(base_seed: int, label: str) -> Seed:
    return Seed(base_seed, stable_stream(label))


def _point_label(experiment: str, **params) -> str:
    parts = [experiment] + [f"{k}={params[k]!r}" for k in sorted(params)]
    return "|".join(parts)


# -- per-trial work ------------------------------------------------------------


def _matrix_embeddings(g, matrices, tol, dense_cap, seed):
    """Second-eigenvector embedding per requested matrix kind.

    The random-walk embedding is derived from the symmetric solve via the
    degree similarity, so 'sym' and 'rw' share one eigensolve.
    """
    out = {}
    sym_cache = None
    for name in MATRIX_ORDER:
        if name not in matrices:
            continue
        t0 = time.perf_counter()
        u2, lam2, lam3, degenerate, eig = second_embedding(
            g, name, tol=tol, dense_cap=dense_cap,
            seed=seed.derive(f"eig|{'sym' if name == 'rw' else name}"),
            sym_eig=sym_cache if name == "rw" else None,
        )
        if name == "sym":
            sym_cache = eig
        out[name] = {
            "u2": u2,
            "lambda2": lam2,
            "lambda3": lam3,
            "degenerate": degenerate,
            "runtime_ms": (time.perf_counter() - t0) * 1e3,
        }
    return out


_CUT_FN = {"zero": zero_cut, "sweep": sweep_cut}


def _trial_records(cfg, g, planted, common, label, trial, stream):
    emb = _matrix_embeddings(g, cfg.matrices, cfg.tol, cfg.dense_cap,
                             point_seed(cfg.base_seed, label))
    records = []
    for name in MATRIX_ORDER:
        if name not in cfg.matrices:
            continue
        e = emb[name]
        var = embedding_variance(e["u2"] / np.linalg.norm(e["u2"]), planted)
        for cut in cfg.cuts:
            pred = _CUT_FN[cut](e["u2"])
            rec = dict(common)
            rec.update(
                matrix=name, cut=cut, trial=trial, seed=stream,
                agreement=agreement(pred, planted),
                lambda2=e["lambda2"], lambda3=e["lambda3"],
                embedding_variance=var,
                degeneracy_flag=int(e["degenerate"]),
                runtime_ms=e["runtime_ms"] if cfg.timing else 0.0,
            )
            rec["misclassification"] = 1.0 - rec["agreement"]
            records.append(rec)
    return records


def _run_task(args) -> list[dict]:
    cfg, task = args
    kind = task["kind"]
    trial = task["trial"]
    if kind == "vary-pbar":
        pbar = task["pbar"]
        label = _point_label("vary-pbar", n=cfg.n, p=cfg.p, pbar=pbar, q=cfg.q,
                             trial=trial)
        spec = nssbm_benchmark_spec(cfg.n, cfg.p, pbar, cfg.q)
        seed = point_seed(cfg.base_seed, label).derive("edges")
        g = sample_block_model(spec, seed)
        common = dict(experiment="vary-pbar", n=cfg.n, p=cfg.p, pbar=pbar,
                      q=cfg.q, K=None, param=pbar)
        return _trial_records(cfg, g, spec.labels, common, label, trial, seed.stream)
    if kind == "pq-grid":
        p, q = task["p"], task["q"]
        label = _point_label("pq-grid", n=cfg.n, p=p, pbar=cfg.pbar, q=q, trial=trial)
        spec = nssbm_benchmark_spec(cfg.n, p, cfg.pbar, q)
        seed = point_seed(cfg.base_seed, label).derive("edges")
        g = sample_block_model(spec, seed)
        sub = replace(cfg, matrices=("unnormalized",), cuts=("zero",))
        common = dict(experiment="pq-grid", n=cfg.n, p=p, pbar=cfg.pbar,
                      q=q, K=None, param=None)
        return _trial_records(sub, g, spec.labels, common, label, trial, seed.stream)
    if kind == "clique-sweep":
        size = task["size"]
        g1, g2 = _clique_internals(cfg, size)
        spec = DcmSpec(cfg.n, g1, g2, cfg.q)
        label = _point_label("clique-sweep", n=cfg.n, p=cfg.p, q=cfg.q,
                             size=size, trial=trial)
        seed = point_seed(cfg.base_seed, label).derive("crossing")
        g = sample_dcm(spec, seed)
        common = dict(experiment="clique-sweep", n=cfg.n, p=cfg.p, pbar=None,
                      q=cfg.q, K=None, param=size)
        return _trial_records(cfg, g, spec.labels, common, label, trial, seed.stream)
    raise ConfigError(f"unknown task kind {kind!r}")


def _clique_internals(cfg, size) -> tuple[Graph, Graph]:
    h = cfg.n // 2
    label = _point_label("clique-sweep", n=cfg.n, p=cfg.p, q=cfg.q, size=size)
    g1 = planted_clique_internal(h, cfg.p, size, point_seed(cfg.base_seed, label).derive("g1"))
    g2 = erdos_renyi(h, cfg.p, point_seed(cfg.base_seed, label).derive("g2"))
    return g1, g2


# -- experiment drivers ---------------------------------------------------------


def _map_tasks(cfg, tasks):
    args = [(cfg, t) for t in tasks]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_run_task, args))
    else:
        chunks = [_run_task(a) for a in args]
    records = [rec for chunk in chunks for rec in chunk]
    return sorted(records, key=_record_key)


def _record_key(rec):
    return (
        rec["experiment"],
        float(rec["p"]) if rec["p"] is not None else -1.0,
        float(rec["pbar"]) if rec["pbar"] is not None else -1.0,
        float(rec["q"]) if rec["q"] is not None else -1.0,
        float(rec["param"]) if rec["param"] is not None else -1.0,
        MATRIX_ORDER.index(rec["matrix"]) if rec["matrix"] else -1,
        CUT_ORDER.index(rec["cut"]) if rec["cut"] else -1,
        int(rec["trial"]),
    )


def run_vary_pbar(cfg: ExperimentConfig) -> list[dict]:
    cfg = cfg.resolved()
    tasks = [
        {"kind": "vary-pbar", "pbar": pbar, "trial": t}
        for pbar in cfg.vary_pbar_grid()
        for t in range(cfg.trials)
    ]
    return _map_tasks(cfg, tasks)


def run_pq_grid(cfg: ExperimentConfig) -> list[dict]:
    cfg = cfg.resolved()
    axis = [float(x) for x in np.linspace(cfg.pq_min, cfg.pq_max, cfg.pq_points)]
    tasks = []
    sentinels = []
    for p in axis:
        for q in axis:
            if p > q:
                tasks.extend(
                    {"kind": "pq-grid", "p": p, "q": q, "trial": t}
                    for t in range(cfg.trials)
                )
            else:
                # below-diagonal cells are excluded; emitted as agreement-0
                sentinels.append(dict(
                    experiment="pq-grid", n=cfg.n, p=p, pbar=cfg.pbar, q=q,
                    K=None, param=None, matrix="unnormalized", cut="zero",
                    trial=0, seed=0, agreement=0.0, misclassification=1.0,
                    lambda2=float("nan"), lambda3=float("nan"),
                    embedding_variance=float("nan"), degeneracy_flag=0,
                    runtime_ms=0.0,
                ))
    return sorted(_map_tasks(cfg, tasks) + sentinels, key=_record_key)


def run_clique_sweep(cfg: ExperimentConfig) -> list[dict]:
    cfg = cfg.resolved()
    tasks = [
        {"kind": "clique-sweep", "size": int(s), "trial": t}
        for s in cfg.clique_sizes
        for t in range(cfg.trials)
    ]
    return _map_tasks(cfg, tasks)


def run_embed_dump(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Per-vertex embedding rows plus run metadata."""
    cfg = cfg.resolved()
    if cfg.model == "dcm-clique":
        size = cfg.clique_size if cfg.clique_size is not None else (2 * cfg.n) // 5
        g1, g2 = _clique_internals(cfg, size)
        spec = DcmSpec(cfg.n, g1, g2, cfg.q)
        label = _point_label("embed-dump", n=cfg.n, p=cfg.p, q=cfg.q, size=size)
        g = sample_dcm(spec, point_seed(cfg.base_seed, label).derive("crossing"))
        planted = spec.labels
        params = {"model": "dcm-clique", "p": cfg.p, "q": cfg.q, "clique_size": size}
    else:
        pbar = cfg.pbar
        if pbar is None:
            pbar = min(1.0, thresholds(cfg.n, cfg.p, 1.0, cfg.q).pbar_thr)
        spec = nssbm_benchmark_spec(cfg.n, cfg.p, pbar, cfg.q)
        label = _point_label("embed-dump", n=cfg.n, p=cfg.p, pbar=pbar, q=cfg.q)
        g = sample_block_model(spec, point_seed(cfg.base_seed, label).derive("edges"))
        planted = spec.labels
        params = {"model": "nssbm-bench", "p": cfg.p, "pbar": pbar, "q": cfg.q}

    emb = _matrix_embeddings(g, cfg.matrices, cfg.tol, cfg.dense_cap,
                             point_seed(cfg.base_seed, label))
    star = ideal_second_eigenvector(planted)
    rows = []
    names = [m for m in MATRIX_ORDER if m in cfg.matrices]
    aligned = {}
    for name in names:
        u2 = emb[name]["u2"]
        aligned[name] = u2 if float(u2 @ star) >= 0 else -u2
    for v in range(cfg.n):
        row = {"vertex": v + 1, "planted_label": int(planted[v])}
        for name in names:
            row[f"u2_{name}"] = float(aligned[name][v])
        rows.append(row)
    meta = {
        "experiment": "embed-dump",
        "n": cfg.n,
        "base_seed": cfg.base_seed,
        "ref_lines": [1.0 / math.sqrt(cfg.n), 0.0, -1.0 / math.sqrt(cfg.n)],
        **params,
    }
    return rows, meta


# -- CSV writing ----------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_records_csv(records, path, fields=RECORD_FIELDS) -> None:
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fields)
        for rec in records:
            writer.writerow([_fmt(rec.get(k)) for k in fields])


def read_records_csv(path) -> list[dict]:
    with open(path) as f:
        reader = csv.DictReader(f)
        rows = []
        for raw in reader:
            rec = {}
            for k, v in raw.items():
                if v == "" or v is None:
                    rec[k] = None
                else:
                    try:
                        rec[k] = int(v)
                    except ValueError:
                        try:
                            rec[k] = float(v)
                        except ValueError:
                            rec[k] = v
            rows.append(rec)
    return rows


def _aggregate(records, keys, value="agreement"):
    groups: dict = {}
    for rec in records:
        key = tuple(rec[k] for k in keys)
        groups.setdefault(key, []).append(float(rec[value]))
    return groups


def _write_vary_pbar_summary(cfg, records, path):
    rep = thresholds(cfg.n, cfg.p, 1.0, cfg.q)
    groups = _aggregate(records, ("param", "matrix", "cut"))
    var_groups = _aggregate(records, ("param", "matrix", "cut"), value="embedding_variance")
    fields = ("experiment", "n", "p", "q", "pbar", "matrix", "cut", "trials",
              "agreement_mean", "embedding_variance_mean", "pbar_thr", "pbar_max")
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fields)
        for key in sorted(groups, key=lambda k: (k[0], MATRIX_ORDER.index(k[1]),
                                                 CUT_ORDER.index(k[2]))):
            pbar_val, mat, cut = key
            vals = groups[key]
            writer.writerow([
                "vary-pbar", cfg.n, _fmt(cfg.p), _fmt(cfg.q), _fmt(pbar_val), mat, cut,
                len(vals), _fmt(sum(vals) / len(vals)),
                _fmt(sum(var_groups[key]) / len(var_groups[key])),
                _fmt(rep.pbar_thr), _fmt(rep.pbar_max),
            ])


def _write_pq_cells(cfg, records, path):
    groups = _aggregate(records, ("p", "q"))
    trials = {k: 0 for k in groups}
    for rec in records:
        if not (rec["lambda2"] is None or np.isnan(rec["lambda2"])):
            trials[(rec["p"], rec["q"])] += 1
    fields = ("experiment", "n", "pbar", "p", "q", "trials", "agreement_mean",
              "p_thr", "p_info")
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fields)
        for (p, q) in sorted(groups):
            vals = groups[(p, q)]
            if p > q:
                rep = thresholds(cfg.n, p, max(cfg.pbar, p), q)
                p_thr, p_info = rep.p_thr, rep.p_info
            else:
                p_thr = p_info = float("nan")
            writer.writerow([
                "pq-grid", cfg.n, _fmt(cfg.pbar), _fmt(p), _fmt(q),
                trials[(p, q)], _fmt(sum(vals) / len(vals)),
                _fmt(p_thr), _fmt(p_info),
            ])


def _write_clique_summary(cfg, records, path):
    import scipy.linalg as sla

    from .theory import dcm_expected_laplacian

    logn = math.log(cfg.n)
    din_bound = cfg.n * cfg.q + math.sqrt(cfg.n)
    gap_bound = math.sqrt(cfg.n) + cfg.n * cfg.q + math.sqrt(cfg.n * cfg.q * logn) + logn
    groups = _aggregate(records, ("param", "matrix", "cut"))
    per_size = {}
    for size in sorted({k[0] for k in groups}):
        g1, g2 = _clique_internals(cfg, int(size))
        lap_hat = dcm_expected_laplacian(g1, g2, cfg.q).dense()
        vals = sla.eigh(lap_hat, eigvals_only=True, subset_by_index=(0, 2))
        per_size[size] = (
            int(min(g1.degrees.min(), g2.degrees.min())),
            float(vals[2] - vals[1]),
        )
    fields = ("experiment", "n", "p", "q", "clique_size", "matrix", "cut", "trials",
              "agreement_mean", "d_in_min", "expected_gap", "din_bound", "gap_bound")
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fields)
        for key in sorted(groups, key=lambda k: (k[0], MATRIX_ORDER.index(k[1]),
                                                 CUT_ORDER.index(k[2]))):
            size, mat, cut = key
            vals = groups[key]
            din_min, gap = per_size[size]
            writer.writerow([
                "clique-sweep", cfg.n, _fmt(cfg.p), _fmt(cfg.q), int(size), mat, cut,
                len(vals), _fmt(sum(vals) / len(vals)),
                din_min, _fmt(gap), _fmt(din_bound), _fmt(gap_bound),
            ])


def run_experiment(cfg: ExperimentConfig) -> dict[str, Path]:
    """Run one experiment end to end; returns the written file paths."""
    cfg = cfg.resolved()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    if cfg.experiment == "embed-dump":
        rows, meta = run_embed_dump(cfg)
        path = out_dir / "embedding.csv"
        fields = list(rows[0].keys())
        with open(path, "w", newline="\n") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(fields)
            for row in rows:
                writer.writerow([_fmt(row[k]) for k in fields])
        meta_path = out_dir / "meta.json"
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        written["embedding"] = path
        written["meta"] = meta_path
        return written

    runner = {
        "vary-pbar": run_vary_pbar,
        "pq-grid": run_pq_grid,
        "clique-sweep": run_clique_sweep,
    }[cfg.experiment]
    records = runner(cfg)
    rec_path = out_dir / "records.csv"
    write_records_csv(records, rec_path)
    written["records"] = rec_path
    if cfg.experiment == "vary-pbar":
        path = out_dir / "summary.csv"
        _write_vary_pbar_summary(cfg, records, path)
        written["summary"] = path
    elif cfg.experiment == "pq-grid":
        path = out_dir / "cells.csv"
        _write_pq_cells(cfg, records, path)
        written["cells"] = path
    elif cfg.experiment == "clique-sweep":
        path = out_dir / "summary.csv"
        _write_clique_summary(cfg, records, path)
        written["summary"] = path
    return written
