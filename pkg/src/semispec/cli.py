"""Command-line interface: gen, bisect, theory, expt, plot."""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bisection import recheck, spectral_bisection
from .graph import (
    MatrixKind,
    read_edge_list,
    read_partition,
    write_edge_list,
    write_partition,
)
from .harness import (
    SEED_ENV_VAR,
    config_from_mapping,
    parse_config_file,
    run_experiment,
)
from .metrics import agreement
from .models import (
    DcmSpec,
    erdos_renyi,
    nested_block_spec,
    nssbm_benchmark_spec,
    planted_clique_internal,
    sample_block_model,
    sample_dcm,
    ssbm_spec,
)
from .streams import Seed
from .theory import thresholds

_MATRIX_CHOICES = [k.value for k in MatrixKind]


def _add_gen(sub):
    p = sub.add_parser("gen", help="sample a graph from one of the models")
    p.add_argument("--model", required=True,
                   choices=["ssbm", "nssbm-bench", "nested", "dcm-clique"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--pbar", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--k", type=float, help="nested-block density multiplier")
    p.add_argument("--clique-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge-list output path")
    p.add_argument("--partition-out", help="planted partition output path")


def _cmd_gen(args) -> int:
    n = args.n
    seed = Seed(args.seed)
    if args.model == "dcm-clique":
        p = args.p if args.p is not None else 9.0 / math.sqrt(n)
        q = args.q if args.q is not None else 1.0 / math.sqrt(n)
        size = args.clique_size if args.clique_size is not None else (2 * n) // 5
        g1 = planted_clique_internal(n // 2, p, size, seed.derive("g1"))
        g2 = erdos_renyi(n // 2, p, seed.derive("g2"))
        spec = DcmSpec(n, g1, g2, q)
        g = sample_dcm(spec, seed.derive("crossing"))
        labels = spec.labels
    else:
        logn = math.log(n)
        p = args.p if args.p is not None else 24 * logn / n
        q = args.q if args.q is not None else 8 * logn / n
        if args.model == "ssbm":
            spec = ssbm_spec(n, p, q)
        elif args.model == "nssbm-bench":
            pbar = args.pbar if args.pbar is not None else p
            spec = nssbm_benchmark_spec(n, p, pbar, q)
        else:
            if args.k is None:
                raise SystemExit("gen --model nested requires --k")
            spec = nested_block_spec(n, p, q, args.k)
        g = sample_block_model(spec, seed.derive("edges"))
        labels = spec.labels
    write_edge_list(g, args.out)
    if args.partition_out:
        write_partition(labels, args.partition_out)
    print(f"wrote {g.num_edges} edges on {g.n} vertices to {args.out}")
    return 0


def _add_bisect(sub):
    p = sub.add_parser("bisect", help="spectral bisection of an edge-list graph")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--matrix", default="unnormalized", choices=_MATRIX_CHOICES)
    p.add_argument("--cut", default="zero", choices=["zero", "sweep"])
    p.add_argument("--tol", type=float)
    p.add_argument("--dense-cap", type=int, default=512)
    p.add_argument("--labels-out")
    p.add_argument("--planted", help="partition file; prints agreement when given")


def _cmd_bisect(args) -> int:
    g = read_edge_list(args.infile)
    out = spectral_bisection(g, args.matrix, cut=args.cut, tol=args.tol,
                             dense_cap=args.dense_cap)
    assert recheck(out)
    print(f"matrix={args.matrix} cut={args.cut} "
          f"lambda2={out.lambda2:.12g} lambda3={out.lambda3:.12g} "
          f"degenerate={int(out.degeneracy_flag)} "
          f"side_sizes={int((out.labels == 0).sum())}/{int((out.labels == 1).sum())}")
    if args.labels_out:
        write_partition(out.labels, args.labels_out)
    if args.planted:
        planted = read_partition(args.planted)
        print(f"agreement={agreement(out.labels, planted):.12g}")
    return 0


def _add_theory(sub):
    p = sub.add_parser("theory", help="evaluate threshold formulas at a parameter point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--pbar", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--k", type=float)
    p.add_argument("--format", default="text", choices=["text", "json"])


def _cmd_theory(args) -> int:
    report = thresholds(args.n, args.p, args.pbar, args.q, K=args.k)
    payload = report.to_dict()
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        width = max(len(k) for k in payload)
        for key, val in payload.items():
            if isinstance(val, float):
                print(f"{key:<{width}}  {val:.10g}")
            else:
                print(f"{key:<{width}}  {val}")
    return 0


def _add_expt(sub):
    p = sub.add_parser("expt", help="run an experiment to CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--experiment", choices=["vary-pbar", "pq-grid", "clique-sweep",
                                            "embed-dump"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--pbar", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--k", dest="K", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--base-seed", type=int,
                   help=f"defaults to ${SEED_ENV_VAR}, then 0")
    p.add_argument("--pbar-points", type=int)
    p.add_argument("--pq-points", type=int)
    p.add_argument("--clique-sizes", help="comma-separated sizes")
    p.add_argument("--clique-size", type=int)
    p.add_argument("--matrices", help="comma-separated subset of "
                                      "unnormalized,sym,rw,adjacency")
    p.add_argument("--cuts", help="comma-separated subset of zero,sweep")
    p.add_argument("--model", choices=["nssbm-bench", "dcm-clique"])
    p.add_argument("--tol", type=float)
    p.add_argument("--dense-cap", type=int)
    p.add_argument("--timing", action="store_true",
                   help="record wall time per record (breaks byte reproducibility)")


def _cmd_expt(args) -> int:
    mapping: dict = {}
    if args.config:
        mapping.update(parse_config_file(args.config))
    overrides = {
        "jobs": args.jobs, "out_dir": args.out_dir, "experiment": args.experiment,
        "n": args.n, "p": args.p, "pbar": args.pbar, "q": args.q, "K": args.K,
        "trials": args.trials, "base_seed": args.base_seed,
        "pbar_points": args.pbar_points, "pq_points": args.pq_points,
        "clique_size": args.clique_size, "model": args.model, "tol": args.tol,
        "dense_cap": args.dense_cap,
    }
    for key, val in overrides.items():
        if val is not None:
            mapping[key] = val
    for key, val in (("clique_sizes", args.clique_sizes),
                     ("matrices", args.matrices), ("cuts", args.cuts)):
        if val is not None:
            parts = tuple(s.strip() for s in str(val).split(","))
            mapping[key] = tuple(int(s) for s in parts) if key == "clique_sizes" else parts
    if args.timing:
        mapping["timing"] = True
    if "experiment" not in mapping:
        raise SystemExit("expt needs --experiment (or an experiment key in --config)")
    cfg = config_from_mapping(mapping)
    written = run_experiment(cfg)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


def _add_plot(sub):
    p = sub.add_parser("plot", help="render SVG plots from an experiment CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", required=True, choices=["lines", "heatmap", "embed"])
    p.add_argument("--out", required=True)


def _cmd_plot(args) -> int:
    from .plots import emit_plots

    for path in emit_plots(args.csv, args.kind, args.out):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="semispec",
        description="Block-model graph generation, spectral bisection, "
                    "thresholds, and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gen(sub)
    _add_bisect(sub)
    _add_theory(sub)
    _add_expt(sub)
    _add_plot(sub)
    args = parser.parse_args(argv)
    handler = {
        "gen": _cmd_gen,
        "bisect": _cmd_bisect,
        "theory": _cmd_theory,
        "expt": _cmd_expt,
        "plot": _cmd_plot,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
