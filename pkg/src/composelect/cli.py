"""Command-line surface: census, nets, selection, benchmarks, verification."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bench import ExperimentConfig, run_experiment, truth_values
from .errors import ComposelectError
from .families import FamilyConfig, ann_budget, family_stream, pca_decompose, pca_residual
from .functions import empirical_design, uniform_grid
from .gaussians import GaussianBounds, hellinger_table_rows
from .nets import build_eta_net, clamp_model, net_csv_rows
from .partitions import census_rows
from .selection import RegressionData, penalized_select
from .verify import FAST_CHECKS, SLOW_CHECKS, run_battery
from . import verify as verify_mod


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / name).write_text(text, encoding="utf-8")
        print(f"wrote {out_dir / name}")
    else:
        sys.stdout.write(text)


def _csv(rows, header: str) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def _cmd_census(args) -> int:
    rows = census_rows(args.k, args.budget)
    if args.format == "json":
        payload = [
            {"k": r[0], "cells": r[1], "count": r[2], "c_estimate": r[3]}
            for r in rows
        ]
        _emit(args, "census.json", json.dumps(payload, indent=2) + "\n")
    else:
        _emit(args, "census.csv", _csv(rows, "k,cells,count,c_estimate"))
    return 0


def _cmd_net(args) -> int:
    from .verify import _poly_model

    measure = uniform_grid(1, 129)
    if args.dim == 0:
        from .functions import GridFunction
        from .nets import LinearModel

        model = LinearModel(
            "demo", measure, (), offset=GridFunction(measure, measure.nodes[:, 0])
        )
    else:
        model = _poly_model(measure, args.dim, "demo")
    net = build_eta_net(clamp_model(model), args.eta, seed=args.seed)
    header = "member_index," + ",".join(f"c{j}" for j in range(args.dim))
    _emit(args, "net.csv", _csv(net_csv_rows(net), header))
    _emit(args, "net.json", json.dumps(net.sidecar(), indent=2) + "\n")
    return 0


def _cmd_select(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    fam = FamilyConfig.from_dict(cfg["family"])
    data_spec = cfg["data"]
    seed = args.seed if args.seed is not None else int(data_spec.get("seed", 0))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n, k = int(data_spec["n"]), int(data_spec["k"])
    design = empirical_design(rng.uniform(-1, 1, size=(n, k)))
    truth = truth_values(
        data_spec["truth"], design.nodes, data_spec.get("truth_params", {})
    )
    sigma = float(data_spec.get("sigma", 1.0))
    y = truth + sigma * rng.standard_normal(n)
    stream = family_stream(fam, design)
    result = penalized_select(
        stream, RegressionData(design, y, sigma), kappa=float(cfg.get("kappa", 3.0))
    )
    _emit(args, "selection.json", result.to_json() + "\n")
    _emit(
        args,
        "selection_table.csv",
        _csv(result.table_rows(), "model_id,dimension,delta,rss,criterion"),
    )
    return 0


def _cmd_bench(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    report = run_experiment(cfg)
    _emit(args, "risks.csv", report.risks_csv())
    _emit(args, "slopes.csv", report.slopes_csv())
    _emit(args, "chosen.csv", report.histogram_csv())
    return 0


def _cmd_pca(args) -> int:
    if args.points:
        pts = np.loadtxt(args.points, delimiter=",", ndmin=2)
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
        pts = rng.normal(0, 1, size=(120, 3)) * np.array([1.0, 0.3, 0.1])
        pts /= np.linalg.norm(pts, axis=1).max() * 1.01
    measure = empirical_design(pts)
    dec = pca_decompose(measure)
    rows = []
    for l in range(0, measure.dim_k + 1):
        rows.append((l, repr(pca_residual(measure, l, dec))))
    _emit(args, "pca_residuals.csv", _csv(rows, "l,tail_residual"))
    _emit(
        args,
        "pca_eigvals.json",
        json.dumps({"eigenvalues": [repr(v) for v in dec.eigvals]}, indent=2) + "\n",
    )
    return 0


def _cmd_hellinger(args) -> int:
    bounds = GaussianBounds(r=args.r, rho_low=args.rho_low, rho_high=args.rho_high)
    rows = hellinger_table_rows(args.pairs, bounds, k=args.k, seed=args.seed)
    _emit(args, "hellinger.csv", _csv(rows, "pair,h,h2,lhs,rhs,holds"))
    if any(not r[-1] for r in rows):
        return 1
    return 0


def _cmd_ann_budget(args) -> int:
    plan = ann_budget(
        K=args.K,
        R=args.R,
        L=args.L,
        alpha=args.alpha,
        gamma_psi=args.gamma_psi,
        q_psi=args.q_psi,
        k=args.k,
        tau=args.tau,
    )
    print(f"(l*, q*) = ({plan.l_star}, {plan.q_star})")
    payload = {
        "l_star": plan.l_star,
        "q_star": plan.q_star,
        "bound_terms": {k: repr(v) for k, v in plan.bound_terms.items()},
    }
    if args.out:
        _emit(args, "ann_budget.json", json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_verify(args) -> int:
    results = run_battery(full=args.full)
    for res in results:
        print(res.line())
    n_fail = sum(1 for r in results if not r.passed)
    total = len(FAST_CHECKS) + (len(SLOW_CHECKS) if args.full else 0)
    print(f"{total - n_fail}/{total} checks passed")
    return 0 if n_fail == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="composelect",
        description="Model selection engine and benchmark harness for "
        "composite-function regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("census", help="partition census and growth constant")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--budget", type=int, default=4)
    common(p)
    p.set_defaults(fn=_cmd_census)

    p = sub.add_parser("net", help="build and certify one eta-net")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.5)
    common(p)
    p.set_defaults(fn=_cmd_net, seed=0)
    p.set_defaults(seed=0)

    p = sub.add_parser("select", help="one selection run from a JSON config")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("bench", help="full risk benchmark from a JSON config")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("pca", help="decomposition and residual identity table")
    p.add_argument("--points", default=None, help="CSV of points (rows)")
    common(p)
    p.set_defaults(fn=_cmd_pca, seed=0)

    p = sub.add_parser("hellinger", help="Gaussian distance table")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--r", type=float, default=1.5)
    p.add_argument("--rho-low", dest="rho_low", type=float, default=0.5)
    p.add_argument("--rho-high", dest="rho_high", type=float, default=1.6)
    common(p)
    p.set_defaults(fn=_cmd_hellinger, seed=0)

    p = sub.add_parser("ann-budget", help="width/resolution planner")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma-psi", dest="gamma_psi", type=float, required=True)
    p.add_argument("--q-psi", dest="q_psi", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--tau", type=float, required=True)
    common(p)
    p.set_defaults(fn=_cmd_ann_budget)

    p = sub.add_parser("verify", help="run the property battery")
    p.add_argument("--full", action="store_true", help="include slow checks")
    common(p)
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    if args.seed is None and hasattr(args, "seed"):
        args.seed = 0
    try:
        return args.fn(args)
    except ComposelectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
