"""Command-line entry point.

Exit status: 0 when every checked quantity is within tolerance, 2 when some
tolerance fails, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io as fio
from .dims import bm_exit_curve, sg_walk_curve, walk_dimension
from .energy import DEFAULT_WINDOW, dirichlet_spectrum, spectral_dimension_fit
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment, write_artifacts
from .ifs import moran_dimension
from .report import Component, StageReport, emit_report
from .sg import build_graph
from .spaces import space_from_config
from .stoch.rng import RngSpec

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the tolerance-failure status
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _load_json(path) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return data


def _only(d: dict, allowed, where):
    extra = set(d) - set(allowed)
    if extra:
        raise ValueError(f"unknown keys in {where}: {sorted(extra)}")


def _seed(args, cfg: dict) -> RngSpec:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    return RngSpec(int(seed), int(cfg.get("stream", 0)))


def _finish(args, report, write_files) -> int:
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        write_files(args.out)
    sys.stdout.write(emit_report(report, args.format))
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_moran(args) -> int:
    cfg = _load_json(args.config)
    _only(cfg, {"ratios", "target", "tolerance"}, "moran config")
    ratios = args.ratios or cfg.get("ratios")
    if not ratios:
        raise ValueError("give contraction ratios with --ratios or in the config")
    target = args.target if args.target is not None else cfg.get("target")
    tol = args.tol if args.tol is not None else cfg.get("tolerance", 1e-10 if target is not None else None)
    s = moran_dimension(ratios)
    rep = StageReport("moran", (Component("dim_h", s, "moran", target, tol, "root of sum r_i^s = 1"),),
                      diagnostics={"ratios": [float(r) for r in ratios]})
    return _finish(args, rep, lambda d: fio.write_json(os.path.join(d, "report.json"), rep.to_dict()))


def cmd_sg_spectral(args) -> int:
    cfg = _load_json(args.config)
    _only(cfg, {"level", "window", "normalization", "tolerance"}, "sg-spectral config")
    level = args.level if args.level is not None else int(cfg.get("level", 6))
    window = tuple(args.window or cfg.get("window", DEFAULT_WINDOW))
    tol = args.tol if args.tol is not None else float(cfg.get("tolerance", 0.05))
    spec = dirichlet_spectrum(build_graph(level), None, cfg.get("normalization"))
    fit = spectral_dimension_fit(spec, window)
    rep = StageReport("sg-spectral", (Component("dim_s", fit.slope, "spectrum", math.log(3) / math.log(5), tol,
                                                "gasket spectral dimension log 3 / log 5", fit.to_dict()),),
                      diagnostics={"level": level, "normalization": spec.normalization, "n_eigenvalues": len(spec)})

    def files(d):
        fio.write_json(os.path.join(d, "report.json"), rep.to_dict())
        fio.write_spectrum(os.path.join(d, "spectrum.csv"), spec)

    return _finish(args, rep, files)


def cmd_sg_walk(args) -> int:
    cfg = _load_json(args.config)
    _only(cfg, {"level", "scales", "n_runs", "tolerance", "seed", "stream"}, "sg-walk config")
    level = args.level if args.level is not None else int(cfg.get("level", 7))
    scales = args.scales or cfg.get("scales", [1, 2, 3, 4, 5])
    runs = args.runs if args.runs is not None else int(cfg.get("n_runs", 4000))
    tol = args.tol if args.tol is not None else float(cfg.get("tolerance", 0.1))
    curve = sg_walk_curve(level, tuple(scales), runs, _seed(args, cfg), args.workers)
    est = walk_dimension(curve)
    rep = StageReport("sg-walk", (Component("dim_w", est.value, "exit_curve", math.log(5) / math.log(2), tol,
                                            "gasket walk dimension log 5 / log 2", est.to_dict()),),
                      diagnostics={"exit_curve": curve.rows(), "exact_means": curve.source["exact_means"]})

    def files(d):
        fio.write_json(os.path.join(d, "report.json"), rep.to_dict())
        fio.write_exit_curve(os.path.join(d, "exit_curve.csv"), curve)

    return _finish(args, rep, files)


def cmd_bm_exit(args) -> int:
    cfg = _load_json(args.config)
    _only(cfg, {"space", "start", "radii", "n_paths", "target", "tolerance", "seed", "stream"}, "bm-exit config")
    space_cfg = json.loads(args.space) if args.space else cfg.get("space", {"kind": "euclidean", "n": 1})
    space = space_from_config(space_cfg)
    start = args.start or cfg.get("start", [0.0] * space.dim)
    radii = np.asarray(args.radii or cfg.get("radii", [0.4, 0.2, 0.1, 0.05]), dtype=float)
    n_paths = args.n_paths if args.n_paths is not None else int(cfg.get("n_paths", 10000))
    target = args.target if args.target is not None else float(cfg.get("target", 2.0))
    tol = args.tol if args.tol is not None else float(cfg.get("tolerance", 0.05))
    curve = bm_exit_curve(space, start, radii, n_paths, _seed(args, cfg), workers=args.workers)
    est = walk_dimension(curve)
    rep = StageReport("bm-exit", (Component("dim_w", est.value, "exit_curve", target, tol,
                                            "Brownian exit times", est.to_dict()),),
                      diagnostics={"space": space.to_dict(), "exit_curve": curve.rows()})

    def files(d):
        fio.write_json(os.path.join(d, "report.json"), rep.to_dict())
        fio.write_exit_curve(os.path.join(d, "exit_curve.csv"), curve)

    return _finish(args, rep, files)


def _run_config(args, cfg: ExperimentConfig) -> int:
    report, artifacts = run_experiment(cfg)
    return _finish(args, report, lambda d: write_artifacts(report, artifacts, d))


def _config_dict(args) -> dict:
    data = _load_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "workers", 1) != 1:
        data["workers"] = args.workers
    return data


def cmd_fbm_graph(args) -> int:
    data = _config_dict(args)
    data.setdefault("experiment", "fbm_graph")
    if data["experiment"] != "fbm_graph":
        raise ValueError("fbm-graph needs a config for the fbm_graph experiment")
    params = data.setdefault("params", {})
    for key, val in (("hurst", args.hurst), ("n_paths", args.n_paths), ("anchors_per_path", args.anchors)):
        if val is not None:
            params[key] = val
    return _run_config(args, ExperimentConfig.from_dict(data))


def cmd_report(args) -> int:
    data = _config_dict(args)
    if args.experiment:
        data["experiment"] = args.experiment
    if "experiment" not in data:
        raise ValueError("give --config or --experiment")
    return _run_config(args, ExperimentConfig.from_dict(data))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit); overrides the config")
    common.add_argument("--out", help="directory for report.json and CSV artifacts")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text",
                        help="report format written to stdout")
    common.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo blocks")

    p = _Parser(prog="fractaldims", description="Estimate Hausdorff, spectral and walk dimensions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("moran", parents=[common], help="similarity dimension of an IFS")
    q.add_argument("--ratios", type=float, nargs="+")
    q.add_argument("--target", type=float)
    q.add_argument("--tol", type=float)
    q.set_defaults(func=cmd_moran)

    q = sub.add_parser("sg-spectral", parents=[common], help="spectral dimension of the gasket graph G_n")
    q.add_argument("--level", type=int)
    q.add_argument("--window", type=float, nargs=2, metavar=("LOW", "HIGH"))
    q.add_argument("--tol", type=float)
    q.set_defaults(func=cmd_sg_spectral)

    q = sub.add_parser("sg-walk", parents=[common], help="walk dimension of the gasket from random-walk crossings")
    q.add_argument("--level", type=int)
    q.add_argument("--scales", type=int, nargs="+")
    q.add_argument("--runs", type=int)
    q.add_argument("--tol", type=float)
    q.set_defaults(func=cmd_sg_walk)

    q = sub.add_parser("bm-exit", parents=[common], help="Brownian exit-time curve in a metric space")
    q.add_argument("--space", help='JSON space description, e.g. \'{"kind": "arctan"}\'')
    q.add_argument("--start", type=float, nargs="+")
    q.add_argument("--radii", type=float, nargs="+")
    q.add_argument("--n-paths", type=int)
    q.add_argument("--target", type=float)
    q.add_argument("--tol", type=float)
    q.set_defaults(func=cmd_bm_exit)

    q = sub.add_parser("fbm-graph", parents=[common], help="Einstein report for the graph of an fBM path")
    q.add_argument("--hurst", type=float)
    q.add_argument("--n-paths", type=int)
    q.add_argument("--anchors", type=int)
    q.set_defaults(func=cmd_fbm_graph)

    q = sub.add_parser("report", parents=[common], help="run a named experiment and emit its Einstein report")
    q.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    q.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # every failure maps to status 1
        print(f"fractaldims {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
