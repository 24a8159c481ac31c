"""Experiment configurations and the pipelines that produce Einstein reports."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import io as fio
from .dims import (
    bm_exit_curve,
    fbm_crossing_dataset,
    sg_walk_curve,
    upper_walk_dimension,
    walk_dimension,
)
from .energy import dirichlet_spectrum, grid_dirichlet_spectrum, spectral_dimension_fit
from .ifs import box_counting_dimension, graph_box_counting_dimension, moran_dimension
from .report import Check, Component, EinsteinReport
from .sg import build_graph, path_graph
from .spaces import ArctanLine, EuclideanDomain, HolderProduct
from .stoch.fbm import sample_fbm
from .stoch.rng import RngSpec

__all__ = ["EXPERIMENTS", "ExperimentConfig", "ExperimentError", "run_experiment", "sierpinski_closed_form_c"]

LOG2, LOG3, LOG5 = math.log(2), math.log(3), math.log(5)

_INTERVAL = {"nodes": 2000, "length": 1.0, "radii": [0.4, 0.2, 0.1, 0.05], "n_paths": 10000, "window": [0.0, 0.1]}

# parameter defaults and tolerance defaults per experiment
EXPERIMENTS = {
    "euclidean_interval": (dict(_INTERVAL), {"dim_h": 1e-10, "dim_s": 0.02, "dim_w": 0.05, "c": 0.1}),
    "euclidean_disk": (
        {"grid": 32, "radii": [0.4, 0.2, 0.1, 0.05], "n_paths": 10000, "box_points": 1000000,
         "box_scales": [2.0**-k for k in range(4, 9)], "window": [0.0, 0.1]},
        {"dim_h": 0.05, "dim_s": 0.1, "dim_w": 0.05, "c": 0.1},
    ),
    "arctan_line": (
        {"start": 0.0, "radii": [0.2, 0.1, 0.05, 0.025, 0.0125], "n_paths": 10000},
        {"dim_h": 0.0, "dim_s": 0.0, "dim_w": 0.05, "c": 0.1},
    ),
    "sierpinski": (
        {"spectral_level": 6, "walk_level": 7, "walk_scales": [1, 2, 3, 4, 5], "n_runs": 4000,
         "window": [0.0, 0.1], "normalization": None},
        {"dim_h": 1e-10, "dim_s": 0.05, "dim_w": 0.1, "c": 0.1, "closed_form_c": 1e-12},
    ),
    "fbm_graph": (
        {"hurst": 0.5, "n_paths": 200, "anchors_per_path": 20, "grid": None, "horizon": None,
         "method": "auto", "box_paths": 4, "box_grid": 2**18,
         "box_scales": [2.0**-k for k in range(4, 12)]},
        {"dim_h": 0.15, "dim_s": 0.0, "dim_w": 0.2, "c": 0.1, "legs": 0.15},
    ),
    "holder_counterexample": (
        {"alpha": 0.5, "radii": [0.4, 0.2, 0.1, 0.05], "n_paths": 10000, "equality_case": True},
        {"dim_h": 0.0, "dim_s": 0.0, "dim_w": 0.1, "c": 0.1, "upper_bound": 0.1},
    ),
    "bilipschitz_check": (
        dict(_INTERVAL, scale=3.0),
        {"dim_h": 1e-10, "dim_s": 0.02, "dim_w": 0.05, "c": 0.05},
    ),
}

_TOP_KEYS = {"experiment", "params", "seed", "stream", "tolerances", "output", "workers"}


class ExperimentError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    JSON form::

        {"experiment": "sierpinski", "seed": 0, "stream": 0,
         "params": {...}, "tolerances": {...}, "output": "out", "workers": 1}

    Only ``experiment`` is required; missing parameters and tolerances take
    the defaults in :data:`EXPERIMENTS`.  Unknown keys are rejected.
    """

    experiment: str
    params: dict = field(default_factory=dict)
    rng: RngSpec = RngSpec()
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {sorted(EXPERIMENTS)}")
        pdef, tdef = EXPERIMENTS[self.experiment]
        _reject_unknown(self.params, pdef, f"params for {self.experiment}")
        _reject_unknown(self.tolerances, tdef, f"tolerances for {self.experiment}")
        params = {**pdef, **self.params}
        tols = {**tdef, **{k: float(v) for k, v in self.tolerances.items()}}
        if any(v < 0 for v in tols.values()):
            raise ValueError("tolerances must be nonnegative")
        _validate(self.experiment, params)
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "tolerances", tols)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        _reject_unknown(d, _TOP_KEYS, "config")
        if "experiment" not in d:
            raise ValueError("config needs an 'experiment' entry")
        return cls(
            experiment=d["experiment"],
            params=dict(d.get("params", {})),
            rng=RngSpec(int(d.get("seed", 0)), int(d.get("stream", 0))),
            tolerances=dict(d.get("tolerances", {})),
            output=d.get("output"),
            workers=int(d.get("workers", 1)),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "seed": self.rng.seed,
            "stream": self.rng.stream,
            "tolerances": self.tolerances,
        }


def _reject_unknown(d, allowed, where):
    extra = set(d) - set(allowed)
    if extra:
        raise ValueError(f"unknown keys in {where}: {sorted(extra)}")


def _radii(p, key="radii"):
    r = np.asarray(p[key], dtype=float)
    if r.ndim != 1 or len(r) < 4 or np.any(r <= 0) or np.any(np.diff(r) >= 0):
        raise ValueError(f"{key} must list at least four decreasing positive radii")
    return r


def _validate(name, p):
    for key in ("n_paths", "n_runs", "nodes", "grid", "box_points", "anchors_per_path", "box_paths"):
        if key in p and p[key] is not None and int(p[key]) < 1:
            raise ValueError(f"{key} must be a positive integer")
    if "radii" in p:
        _radii(p)
    if "window" in p:
        lo, hi = p["window"]
        if not 0 <= lo < hi <= 1:
            raise ValueError("window must satisfy 0 <= low < high <= 1")
    if name == "fbm_graph" and not 0 < float(p["hurst"]) < 1:
        raise ValueError("hurst must lie in (0, 1)")
    if name == "holder_counterexample" and not 0 < float(p["alpha"]) <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if name == "bilipschitz_check" and not float(p["scale"]) > 0:
        raise ValueError("scale must be positive")
    if name == "sierpinski":
        if not 1 <= int(p["spectral_level"]) <= 7:
            raise ValueError("spectral_level must lie in 1..7")
        if not all(0 <= int(m) < int(p["walk_level"]) <= 8 for m in p["walk_scales"]):
            raise ValueError("walk_scales must be levels below walk_level <= 8")


def _stage(name):
    def wrap(fn):
        def inner(*a, **k):
            try:
                return fn(*a, **k)
            except ExperimentError:
                raise
            except Exception as exc:
                raise ExperimentError(f"stage '{name}' failed: {exc}") from exc

        return inner

    return wrap


def sierpinski_closed_form_c() -> float:
    dh, ds, dw = LOG3 / LOG2, LOG3 / LOG5, LOG5 / LOG2
    return dh / (ds * dw)


def _walk_component(curve, target, tol, provenance):
    est = _stage("walk fit")(walk_dimension)(curve)
    return Component("dim_w", est.value, "exit_curve", target, tol, provenance, est.to_dict()), est


def _spec_component(spec, window, target, tol, provenance):
    fit = _stage("spectral fit")(spectral_dimension_fit)(spec, tuple(window))
    return Component("dim_s", fit.slope, "spectrum", target, tol, provenance, fit.to_dict()), fit


def _interval_parts(p, tol, rng, workers, scale=1.0):
    L = float(p["length"]) * scale
    dim_h = Component("dim_h", moran_dimension([0.5, 0.5]), "moran", 1.0, tol["dim_h"],
                      "interval as attractor of two half-scale maps")
    g = path_graph(int(p["nodes"]), L)
    spec = _stage("spectrum")(dirichlet_spectrum)(g)
    dim_s, _ = _spec_component(spec, p["window"], 0.5, tol["dim_s"], "Weyl asymptotics on an interval, n/2 with n = 1")
    radii = _radii(p) * L
    curve = _stage("exit curve")(bm_exit_curve)(
        EuclideanDomain(1), [L / 2], radii, int(p["n_paths"]), rng, diffusivity=scale, workers=workers)
    dim_w, _ = _walk_component(curve, 2.0, tol["dim_w"], "Brownian exit times E[tau(r)] = r^2")
    return dim_h, dim_s, dim_w, {"spectrum": spec, "exit_curve": curve}


def _run_interval(cfg):
    dh, ds, dw, art = _interval_parts(cfg.params, cfg.tolerances, cfg.rng, cfg.workers)
    rep = EinsteinReport("euclidean_interval", dh, ds, dw, 1.0, cfg.tolerances["c"],
                         "Einstein relation with constant 1 on Euclidean domains",
                         diagnostics={"process": "standard Brownian motion (unit diffusivity)",
                                      "exit_curve": art["exit_curve"].rows()})
    return rep, art


def _run_disk(cfg):
    p, tol = cfg.params, cfg.tolerances
    gen = cfg.rng.spawn(2).generator()
    m = int(p["box_points"])
    rad = np.sqrt(gen.random(m))
    ang = 2 * np.pi * gen.random(m)
    pts = np.stack([rad * np.cos(ang), rad * np.sin(ang)], 1)
    box = _stage("box counting")(box_counting_dimension)(pts, p["box_scales"])
    dim_h = Component("dim_h", box.slope, "boxcount", 2.0, tol["dim_h"], "planar domain has dimension 2",
                      box.to_dict())
    k = int(p["grid"])
    x = np.arange(-k, k + 1) / k
    X, Y = np.meshgrid(x, x, indexing="ij")
    spec = _stage("spectrum")(grid_dirichlet_spectrum)(X**2 + Y**2 < 1, 1.0 / k)
    dim_s, _ = _spec_component(spec, p["window"], 1.0, tol["dim_s"], "Weyl asymptotics, n/2 with n = 2")
    curve = _stage("exit curve")(bm_exit_curve)(EuclideanDomain(2), [0.0, 0.0], _radii(p), int(p["n_paths"]),
                                                cfg.rng, workers=cfg.workers)
    dim_w, _ = _walk_component(curve, 2.0, tol["dim_w"], "Brownian exit times E[tau(r)] = r^2 / 2")
    rep = EinsteinReport("euclidean_disk", dim_h, dim_s, dim_w, 1.0, tol["c"],
                         "Einstein relation with constant 1 on Euclidean domains",
                         diagnostics={"process": "standard Brownian motion (unit diffusivity)",
                                      "exit_curve": curve.rows(), "boxcount": box.to_dict()})
    return rep, {"spectrum": spec, "exit_curve": curve, "boxcount": box}


def _run_arctan(cfg):
    p, tol = cfg.params, cfg.tolerances
    space = ArctanLine()
    x0 = float(p["start"])
    curve = _stage("exit curve")(bm_exit_curve)(space, [x0], _radii(p), int(p["n_paths"]), cfg.rng,
                                                workers=cfg.workers)
    dim_w, _ = _walk_component(curve, 2.0, tol["dim_w"], "mean-value argument on tan-images of balls")
    a = math.atan(x0)
    exact = [(math.tan(a + r) - x0) * (x0 - math.tan(a - r)) for r in curve.radii]
    rep = EinsteinReport(
        "arctan_line",
        Component("dim_h", 1.0, "literature-target", 1.0, tol["dim_h"], "tan is an isometry onto an interval"),
        Component("dim_s", 0.5, "literature-target", 0.5, tol["dim_s"],
                  "operator and measure are those of the real line; Weyl asymptotics"),
        dim_w, 1.0, tol["c"], "Einstein relation with constant 1",
        diagnostics={"exit_curve": curve.rows(), "exact_means": exact,
                     "process": "standard Brownian motion (unit diffusivity)"},
    )
    return rep, {"exit_curve": curve}


def _run_sierpinski(cfg):
    p, tol = cfg.params, cfg.tolerances
    dh = moran_dimension([0.5, 0.5, 0.5])
    dim_h = Component("dim_h", dh, "moran", LOG3 / LOG2, tol["dim_h"], "Moran root of three half-scale similitudes")
    g = build_graph(int(p["spectral_level"]))
    spec = _stage("spectrum")(dirichlet_spectrum)(g, None, p["normalization"])
    dim_s, _ = _spec_component(spec, p["window"], LOG3 / LOG5, tol["dim_s"], "gasket spectral dimension log 3 / log 5")
    curve = _stage("walk curve")(sg_walk_curve)(int(p["walk_level"]), tuple(p["walk_scales"]), int(p["n_runs"]),
                                                cfg.rng, cfg.workers)
    dim_w, _ = _walk_component(curve, LOG5 / LOG2, tol["dim_w"], "gasket walk dimension log 5 / log 2")
    closed = sierpinski_closed_form_c()
    rep = EinsteinReport(
        "sierpinski", dim_h, dim_s, dim_w, 1.0, tol["c"], "Einstein relation with constant 1 on the gasket",
        checks=(Check("closed_form_c", closed, 1.0, tol["closed_form_c"],
                      note="(log3/log2) / ((log3/log5)(log5/log2))"),),
        diagnostics={"exit_curve": curve.rows(), "exact_means": curve.source["exact_means"],
                     "normalization": spec.normalization, "energy_renormalization": "(5/3)^n",
                     "time_clock": "5^-n per walk step"},
    )
    return rep, {"spectrum": spec, "exit_curve": curve}


def _run_fbm(cfg):
    p, tol = cfg.params, cfg.tolerances
    H = float(p["hurst"])
    slopes, boxes = [], []
    for i in range(int(p["box_paths"])):
        path = sample_fbm(H, int(p["box_grid"]), 1.0, cfg.rng.spawn(3, i))
        box = _stage("box counting")(graph_box_counting_dimension)(path.times, path.values, p["box_scales"])
        slopes.append(box.slope)
        boxes.append(box)
    dim_h = Component("dim_h", float(np.mean(slopes)), "boxcount", 2 - H, tol["dim_h"],
                      "Hausdorff dimension 2 - H of fBM graphs", {"slopes": slopes, "first": boxes[0].to_dict()})
    dim_s = Component("dim_s", 0.5, "literature-target", 0.5, tol["dim_s"],
                      "spectral dimension transported from the time axis (Weyl, n = 1)")
    ds = _stage("crossing times")(fbm_crossing_dataset)(
        H, None, int(p["n_paths"]), int(p["anchors_per_path"]), cfg.rng,
        n=p["grid"], horizon=p["horizon"], method=p["method"])
    curve = _stage("walk curve")(ds.curve)("product")
    est = walk_dimension(curve)
    up = upper_walk_dimension(curve)
    dim_w = Component("dim_w", est.value, "exit_curve", 2 / H, tol["dim_w"],
                      "per-anchor exit-time lemma, slope 2/H", est.to_dict())
    legs = {w: walk_dimension(ds.curve(w)) for w in ("plus", "minus")}
    checks = tuple(
        Check(f"leg_{w}", e.value, 1 / H, tol["legs"], note="crossing leg slope against 1/H")
        for w, e in legs.items()
    ) + (Check("leg_sum", legs["plus"].value + legs["minus"].value, est.value, 0.1,
               note="sum of leg slopes against the product slope"),
         Check("upper_ge_local", est.value, up.value, 0.0, "le", note="local estimate <= upper estimate"))
    rep = EinsteinReport(
        "fbm_graph", dim_h, dim_s, dim_w, H * (2 - H), tol["c"],
        "CONJECTURE: c(H) = H(2-H); an empirical observation, not a theorem",
        checks=checks,
        diagnostics={"hurst": H, "exit_curve": curve.rows(), "upper_walk_dimension": up.to_dict(),
                     "legs": {w: e.to_dict() for w, e in legs.items()}, "strides": ds.strides.tolist(),
                     "censored_fraction": ds.censored_fraction, "n_pairs": int(len(ds.anchors)),
                     "walk_target_status": "2/H is proven per anchor and conjectured almost surely"},
    )
    return rep, {"exit_curve": curve, "boxcount": boxes[0], "crossings": ds}


def _run_holder(cfg):
    p, tol = cfg.params, cfg.tolerances
    alpha = float(p["alpha"])
    space = HolderProduct(alpha)
    radii = _radii(p)
    curve = _stage("exit curve")(bm_exit_curve)(space, [0.0, 0.0], radii, int(p["n_paths"]), cfg.rng,
                                                axes=[1], workers=cfg.workers)
    dim_w, est = _walk_component(curve, 2.0, tol["dim_w"], "process (0, W_t) moves along the unsnowflaked axis")
    up = upper_walk_dimension(curve)
    checks = [
        Check("strictly_below_2_over_alpha", est.value, 2 / alpha, relation="lt",
              note="Hoelder bound dim_w / alpha is not attained"),
        Check("upper_bound", up.value, 2 / alpha, tol["upper_bound"], "le",
              note="upper walk dimension <= dim_w / alpha"),
    ]
    diag = {"alpha": alpha, "exit_curve": curve.rows(), "upper_walk_dimension": up.to_dict()}
    arts = {"exit_curve": curve}
    if p["equality_case"]:
        eq_curve = _stage("equality-case curve")(bm_exit_curve)(
            space, [0.0, 0.0], radii, int(p["n_paths"]), cfg.rng.spawn(9), axes=[0], workers=cfg.workers,
            dts=radii ** (2 / alpha) / 400)
        eq = walk_dimension(eq_curve)
        checks.append(Check("equality_case", eq.value, 2 / alpha, tol["dim_w"],
                            note="process (W_t, 0) along the snowflaked axis attains 2/alpha"))
        diag["equality_case"] = eq.to_dict()
    rep = EinsteinReport(
        "holder_counterexample",
        Component("dim_h", 1.0, "literature-target", 1.0, tol["dim_h"], "image line {0} x R is isometric to R"),
        Component("dim_s", 0.5, "literature-target", 0.5, tol["dim_s"], "Weyl asymptotics on the line"),
        dim_w, 1.0, tol["c"], "Einstein relation with constant 1 on the image line",
        checks=tuple(checks), diagnostics=diag,
    )
    return rep, arts


def _run_bilipschitz(cfg):
    p, tol = cfg.params, cfg.tolerances
    c = float(p["scale"])
    base = _interval_parts(p, tol, cfg.rng.spawn(0), cfg.workers)
    scaled = _interval_parts(p, tol, cfg.rng.spawn(1), cfg.workers, scale=c)
    c0 = base[0].value / (base[1].value * base[2].value)

    def vs_base(comp, b, key):
        return Component(comp.name, comp.value, comp.method, b.value, tol[key],
                         f"unscaled run (scale 1); {b.provenance}", comp.fit)

    rep = EinsteinReport(
        "bilipschitz_check",
        vs_base(scaled[0], base[0], "dim_h"),
        vs_base(scaled[1], base[1], "dim_s"),
        vs_base(scaled[2], base[2], "dim_w"),
        c0, tol["c"], "Einstein constant of the unscaled run",
        diagnostics={"scale": c, "base": {"dim_h": base[0].value, "dim_s": base[1].value, "dim_w": base[2].value,
                                          "c": c0},
                     "exit_curve": scaled[3]["exit_curve"].rows(), "base_exit_curve": base[3]["exit_curve"].rows()},
    )
    return rep, scaled[3]


_RUNNERS = {
    "euclidean_interval": _run_interval,
    "euclidean_disk": _run_disk,
    "arctan_line": _run_arctan,
    "sierpinski": _run_sierpinski,
    "fbm_graph": _run_fbm,
    "holder_counterexample": _run_holder,
    "bilipschitz_check": _run_bilipschitz,
}


def write_artifacts(report: EinsteinReport, artifacts: dict, out_dir) -> list[str]:
    """Write ``report.json`` plus whichever of ``exit_curve.csv``,
    ``spectrum.csv``, ``boxcount.csv`` and ``crossings.csv`` apply."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def target(name):
        path = os.path.join(out_dir, name)
        written.append(path)
        return path

    fio.write_json(target("report.json"), report.to_dict())
    if "exit_curve" in artifacts:
        fio.write_exit_curve(target("exit_curve.csv"), artifacts["exit_curve"])
    if "spectrum" in artifacts:
        fio.write_spectrum(target("spectrum.csv"), artifacts["spectrum"])
    if "boxcount" in artifacts:
        fio.write_boxcount(target("boxcount.csv"), artifacts["boxcount"])
    if "crossings" in artifacts:
        fio.write_crossings(target("crossings.csv"), artifacts["crossings"])
    return written


def run_experiment(cfg: ExperimentConfig | dict, out_dir=None):
    """Run one named experiment; returns ``(report, artifacts)``.

    When ``out_dir`` (or ``cfg.output``) is set the artifact files are
    written there as well.
    """
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    report, artifacts = _RUNNERS[cfg.experiment](cfg)
    out_dir = out_dir if out_dir is not None else cfg.output
    if out_dir is not None:
        write_artifacts(report, artifacts, out_dir)
    return report, artifacts
