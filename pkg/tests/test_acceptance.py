"""Acceptance criteria 1-14, one test each.

Every test records a ``[PASS]`` or ``[FAIL]`` line in ``RESULTS`` before it
asserts; the conftest prints them after the run.  ``python
tests/test_acceptance.py`` runs the same checks without pytest.
"""

import math
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy import stats

from fractaldims.dims import bm_exit_curve, sg_walk_curve, walk_dimension
from fractaldims.energy import dirichlet_spectrum, energy, harmonic_extension, spectral_dimension_fit
from fractaldims.experiments import run_experiment, sierpinski_closed_form_c
from fractaldims.ifs import moran_dimension
from fractaldims.sg import build_graph, path_graph
from fractaldims.spaces import ArctanLine, EuclideanDomain
from fractaldims.stoch import (
    RngSpec,
    bm_exit_time_mc,
    exact_crossing_mean,
    fbm_covariance,
    sample_fbm_paths,
    srw_crossing_stats,
)

LOG2, LOG3, LOG5 = math.log(2), math.log(3), math.log(5)
RESULTS = {}


def record(n, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {n} {name}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def within_se(est, exact, k=3.0):
    return abs(est.mean - exact) <= k * est.stderr


def test_01_moran_exactness():
    ratios = [0.5, 0.5, 0.5]
    moran_dimension(ratios)
    best = math.inf
    for _ in range(20):
        t0 = time.perf_counter()
        s = moran_dimension(ratios)
        best = min(best, time.perf_counter() - t0)
    err = abs(s - LOG3 / LOG2)
    record(1, "moran exactness", err <= 1e-10 and best < 1e-3, f"|s - log3/log2| = {err:.1e}, {best * 1e3:.3f} ms")


def test_02_harmonic_extension():
    g0 = build_graph(0)
    ext = harmonic_extension(g0, [1.0, 0.0, 0.0]).values
    golden = ext[3:].tolist()
    exact = sorted(golden) == [0.2, 0.4, 0.4] and ext[3 + 1] == 0.2  # midpoint of edge 12 is opposite corner 0
    g1 = build_graph(1)
    gen = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        u = gen.normal(size=3)
        ratio = energy(g1, harmonic_extension(g0, u)) / energy(g0, u)
        worst = max(worst, abs(ratio - 0.6))
    record(2, "harmonic extension", exact and worst <= 1e-12,
           f"midpoints {golden}, max |ratio - 3/5| = {worst:.1e}")


def test_03_srw_crossing_time():
    errs = [abs(exact_crossing_mean(n, m) - 5.0 ** (n - m)) for n, m in ((1, 0), (2, 0), (2, 1), (3, 1))]
    mc = srw_crossing_stats(3, 1, RngSpec(3), n_runs=10_000)
    z = (mc.mean - mc.exact_mean) / mc.stderr
    record(3, "SRW crossing time", max(errs) <= 1e-9 and abs(z) <= 3,
           f"max exact error {max(errs):.1e}, MC {mc.mean:.3f} vs {mc.exact_mean:.0f} (z = {z:+.2f})")


def test_04_interval_spectral_dimension():
    t0 = time.perf_counter()
    fit = spectral_dimension_fit(dirichlet_spectrum(path_graph(2000)))
    dt = time.perf_counter() - t0
    record(4, "interval spectral dimension", abs(fit.slope - 0.5) <= 0.02 and dt < 30,
           f"slope {fit.slope:.4f}, {dt:.2f} s")


def test_05_sg_spectral_dimension():
    t0 = time.perf_counter()
    fit = spectral_dimension_fit(dirichlet_spectrum(build_graph(6)))
    dt = time.perf_counter() - t0
    target = LOG3 / LOG5
    record(5, "SG spectral dimension", abs(fit.slope - target) <= 0.05 and dt < 60,
           f"slope {fit.slope:.4f} vs {target:.4f}, {dt:.2f} s")


def test_06_bm_exit_times():
    line, plane = EuclideanDomain(1), EuclideanDomain(2)
    z1 = []
    for i, r in enumerate((0.1, 0.2, 0.4)):
        est = bm_exit_time_mc(line, [0.0], r, n_paths=10_000, rng=RngSpec(6, 0, (i,)))
        z1.append((est.mean - r * r) / est.stderr)
    z2 = []
    for i, r in enumerate((0.1, 0.2, 0.4)):
        est = bm_exit_time_mc(plane, [0.0, 0.0], r, n_paths=10_000, rng=RngSpec(6, 1, (i,)))
        z2.append((est.mean - r * r / 2) / est.stderr)
    curve = bm_exit_curve(line, [0.0], [0.4, 0.2, 0.1, 0.05], 10_000, RngSpec(6, 2))
    w = walk_dimension(curve).value
    ok = max(map(abs, z1 + z2)) <= 3 and abs(w - 2) <= 0.05
    record(6, "BM exit times", ok,
           f"z(R1) {np.round(z1, 2).tolist()}, z(R2) {np.round(z2, 2).tolist()}, walk dim {w:.4f}")


def test_07_arctan_space():
    est = bm_exit_time_mc(ArctanLine(), [0.0], 0.3, n_paths=10_000, rng=RngSpec(7))
    z = (est.mean - math.tan(0.3) ** 2) / est.stderr
    rep, _ = run_experiment({"experiment": "arctan_line", "seed": 7})
    w = rep.dim_w.value
    record(7, "arctan space", abs(z) <= 3 and abs(w - 2) <= 0.05, f"z = {z:+.2f} at r = 0.3, walk dim {w:.4f}")


def test_08_sg_walk_dimension():
    curve = sg_walk_curve(7, (1, 2, 3, 4, 5), 4000, RngSpec(8))
    w = walk_dimension(curve).value
    target = LOG5 / LOG2
    record(8, "SG walk dimension", abs(w - target) <= 0.1, f"slope {w:.4f} vs {target:.4f}")


def test_09_einstein_identity_sg():
    rep, _ = run_experiment({"experiment": "sierpinski", "seed": 9})
    closed = sierpinski_closed_form_c()
    record(9, "Einstein identity on SG", abs(rep.c - 1) <= 0.1 and abs(closed - 1) <= 1e-12,
           f"numerical c = {rep.c:.4f}, closed form |c - 1| = {abs(closed - 1):.1e}")


def test_10_fbm_validity():
    n = 1024
    pairs = ((n // 8, n // 4), (n // 4, 3 * n // 4), (n // 2, n))
    zmax, pmin = 0.0, 1.0
    for h_i, H in enumerate((0.3, 0.5, 0.7)):
        P = sample_fbm_paths(H, n, 1.0, 4000, RngSpec(10, h_i))
        for i, j in pairs:
            prod = P[:, i] * P[:, j]
            z = (prod.mean() - fbm_covariance(i / n, j / n, H)) / (prod.std(ddof=1) / math.sqrt(len(prod)))
            zmax = max(zmax, abs(z))
        # xi^-H B(xi t) against B(t) from an independent ensemble, xi = 2
        A = sample_fbm_paths(H, 256, 1.0, 1000, RngSpec(10, 10 + h_i))
        B = sample_fbm_paths(H, 256, 2.0, 1000, RngSpec(10, 20 + h_i))
        for k in (32, 128, 256):
            pmin = min(pmin, stats.ks_2samp(A[:, k], 2.0**-H * B[:, k]).pvalue)
    record(10, "fBM validity", zmax <= 3 and pmin > 0.01, f"max covariance |z| = {zmax:.2f}, min KS p = {pmin:.3f}")


def test_11_fbm_graph_walk_dimension():
    parts, ok = [], True
    for H in (0.3, 0.5, 0.7):
        rep, _ = run_experiment({"experiment": "fbm_graph", "seed": 11, "params": {"hurst": H}})
        d = rep.to_dict()
        legs = [d["checks"][f"leg_{w}"]["value"] for w in ("plus", "minus")]
        n_pairs = d["diagnostics"]["n_pairs"]
        ok &= abs(rep.dim_w.value - 2 / H) <= 0.2
        ok &= all(abs(v - 1 / H) <= 0.15 for v in legs)
        ok &= n_pairs >= 200 * 20
        ok &= abs(rep.c - H * (2 - H)) <= 0.1 and rep.c_provenance.startswith("CONJECTURE")
        parts.append(f"H={H}: dim_w {rep.dim_w.value:.3f} (2/H {2 / H:.3f}), legs {legs[0]:.3f}/{legs[1]:.3f}, "
                     f"c {rep.c:.3f} vs conjectured {H * (2 - H):.3f}")
    record(11, "fBM-graph walk dimension", ok, "; ".join(parts))


def test_12_holder_counterexample():
    rep, _ = run_experiment({"experiment": "holder_counterexample", "seed": 12, "params": {"alpha": 0.5}})
    w = rep.dim_w.value
    record(12, "Hoelder bound strictness", abs(w - 2) <= 0.1 and w < 2 / 0.5,
           f"walk dim {w:.4f}, bound 2/alpha = 4")


def test_13_bilipschitz_invariance():
    parts, ok = [], True
    for scale in (0.5, 3.0):
        rep, _ = run_experiment({"experiment": "bilipschitz_check", "seed": 13, "params": {"scale": scale}})
        ok &= rep.passed
        parts.append(f"scale {scale}: d(dim_s) {rep.dim_s.value - rep.dim_s.target:+.4f}, "
                     f"d(dim_w) {rep.dim_w.value - rep.dim_w.target:+.4f}, d(c) {rep.c - rep.c_target:+.4f}")
    record(13, "bi-Lipschitz invariance", ok, "; ".join(parts))


def test_14_determinism():
    configs = (
        {"experiment": "sierpinski", "seed": 14, "params": {"n_runs": 1000}},
        {"experiment": "fbm_graph", "seed": 14, "params": {"n_paths": 20, "anchors_per_path": 5, "box_paths": 1}},
        {"experiment": "holder_counterexample", "seed": 14, "params": {"n_paths": 1000}},
    )
    same = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, cfg in enumerate(configs):
            a, b = Path(tmp, f"{i}a"), Path(tmp, f"{i}b")
            run_experiment(cfg, a)
            run_experiment(cfg, b)
            same.append((a / "report.json").read_bytes() == (b / "report.json").read_bytes())
    record(14, "determinism", all(same), f"byte-identical report.json for {sum(same)}/{len(same)} experiments")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
