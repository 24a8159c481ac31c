"""Walk-dimension estimates from exit-time curves, and Hoelder regularity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fitting import DimensionFit, linear_fit, loglog_fit
from .spaces import SpaceDescriptor
from .stoch.brownian import CensoringError, bm_exit_time_mc
from .stoch.crossing import UNRELIABLE_FACTOR, anchor_legs
from .stoch.fbm import PathSample, iter_fbm_blocks
from .stoch.rng import RngSpec, as_rng_spec
from .stoch.srw import srw_crossing_stats

__all__ = [
    "ExitCurve",
    "WalkDimEstimate",
    "CrossingDataset",
    "HolderEstimate",
    "walk_dimension",
    "upper_walk_dimension",
    "bm_exit_curve",
    "sg_walk_curve",
    "fbm_design",
    "crossing_dataset",
    "fbm_crossing_dataset",
    "fbm_graph_walk_curve",
    "holder_regularity",
    "dyadic_radii",
]


def dyadic_radii(r0: float, k: int) -> np.ndarray:
    """``r0 * 2**-j`` for ``j = 0..k-1``."""
    return r0 * 2.0 ** -np.arange(k)


@dataclass(frozen=True, eq=False)
class ExitCurve:
    """Mean exit times ``E[tau(r)]`` against radius, largest radius first."""

    radii: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        m = np.asarray(self.means, dtype=float)
        e = np.asarray(self.stderrs, dtype=float)
        if not (r.ndim == 1 and r.shape == m.shape == e.shape):
            raise ValueError("radii, means and stderrs must be 1-d of equal length")
        if np.any(r <= 0) or np.any(np.diff(r) >= 0):
            raise ValueError("radii must be positive and strictly decreasing")
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise ValueError("exit-time means must be positive")
        if np.any(e < 0):
            raise ValueError("standard errors must be nonnegative")
        for a in (r, m, e):
            a.setflags(write=False)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stderrs", e)

    def __len__(self):
        return len(self.radii)

    def rows(self):
        return [(float(r), float(m), float(e)) for r, m, e in zip(self.radii, self.means, self.stderrs)]


@dataclass(frozen=True)
class WalkDimEstimate:
    value: float
    kind: str
    fit: DimensionFit

    def __post_init__(self):
        if self.kind not in ("local_limit", "upper_limsup"):
            raise ValueError(f"unknown estimate kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind,
            "slope": self.fit.slope,
            "r2": self.fit.r2,
            "window": list(self.fit.window),
        }


def _check_curve(curve: ExitCurve, min_points: int, min_octaves: float):
    if len(curve) < min_points:
        raise ValueError(f"need at least {min_points} radii, got {len(curve)}")
    octaves = np.log2(curve.radii[0] / curve.radii[-1])
    if octaves < min_octaves - 1e-9:
        raise ValueError(f"radii span {octaves:.2f} octaves; need {min_octaves}")


def walk_dimension(curve: ExitCurve, min_points: int = 4, min_octaves: float = 2.0) -> WalkDimEstimate:
    """Slope of log E[tau(r)] against log r over the whole curve."""
    _check_curve(curve, min_points, min_octaves)
    fit = loglog_fit(curve.radii, curve.means)
    return WalkDimEstimate(fit.slope, "local_limit", fit)


def upper_walk_dimension(curve: ExitCurve, min_window: int = 4, min_octaves: float = 2.0) -> WalkDimEstimate:
    """Largest slope among the trailing windows (the ``j`` smallest radii, j >= min_window).

    The full curve is one of the windows, so the result never falls below
    :func:`walk_dimension`.
    """
    _check_curve(curve, min_window, min_octaves)
    best = None
    for j in range(min_window, len(curve) + 1):
        fit = loglog_fit(curve.radii[-j:], curve.means[-j:])
        if best is None or fit.slope > best.slope:
            best = fit
    return WalkDimEstimate(best.slope, "upper_limsup", best)


def bm_exit_curve(
    space: SpaceDescriptor,
    start,
    radii,
    n_paths: int = 10_000,
    rng: RngSpec | int | None = None,
    *,
    dt_factor: float = 400.0,
    diffusivity: float = 1.0,
    axes=None,
    workers: int = 1,
    dts=None,
) -> ExitCurve:
    """Brownian exit-time curve; radius ``i`` uses the sub-stream ``rng.spawn(i)``.

    The time step is ``r**2 / (dt_factor * diffusivity**2)`` unless ``dts``
    gives one per radius, which is needed when the metric ball is much
    smaller in chart coordinates than ``r`` (snowflaked axes).
    """
    spec = as_rng_spec(rng)
    radii = np.asarray(radii, dtype=float)
    if dts is None:
        dts = radii * radii / (dt_factor * diffusivity**2)
    dts = np.broadcast_to(np.asarray(dts, dtype=float), radii.shape)
    ests = [
        bm_exit_time_mc(
            space,
            start,
            r,
            dt=float(dts[i]),
            n_paths=n_paths,
            rng=spec.spawn(i),
            axes=axes,
            diffusivity=diffusivity,
            workers=workers,
        )
        for i, r in enumerate(radii)
    ]
    return ExitCurve(
        radii,
        np.array([e.mean for e in ests]),
        np.array([e.stderr for e in ests]),
        source={"space": space.to_dict(), "process": "brownian", "start": np.atleast_1d(start).tolist(),
                "diffusivity": diffusivity, "n_paths": n_paths, "censored": [e.n_censored for e in ests]},
    )


def sg_walk_curve(n: int = 7, levels=(1, 2, 3, 4, 5), n_runs: int = 4000, rng: RngSpec | int | None = None,
                  workers: int = 1) -> ExitCurve:
    """Crossing-time curve of the walk on G_n at scales ``2**-m``.

    Steps between successive distinct V_m visits are converted to time by the
    walk's natural clock ``5**-n`` per step.
    """
    spec = as_rng_spec(rng)
    levels = sorted(levels)
    stats = [srw_crossing_stats(n, m, spec.spawn(i), n_runs, workers=workers) for i, m in enumerate(levels)]
    clock = 5.0**-n
    return ExitCurve(
        2.0 ** -np.asarray(levels, dtype=float),
        np.array([s.mean for s in stats]) * clock,
        np.array([s.stderr for s in stats]) * clock,
        source={"space": {"kind": "sierpinski", "level": n}, "process": "srw", "levels": levels,
                "exact_means": [s.exact_mean * clock for s in stats], "n_runs": n_runs},
    )


# Default grids per Hurst index: (grid size, horizon).  The grid must hold
# two octaves of radii at ten increment deviations without censoring.
_FBM_GRIDS = {0.3: (2**21, 2.0**-4), 0.5: (2**16, 2.0**-4), 0.7: (2**14, 2.0**-8), 0.8: (2**14, 2.0**-10)}


def fbm_design(H: float, n: int | None = None, horizon: float | None = None, n_radii: int = 5,
               resolution: float = UNRELIABLE_FACTOR):
    """Grid, radii and strides for an fBM-graph exit curve.

    Radii grow by sqrt(2) from ``resolution * dt**H``; radius ``j`` inspects
    every ``s_j = floor(2**(j / (2H)))``-th sample, so each radius sits at
    the same multiple (at least ``resolution``) of its increment deviation.
    The discretisation bias then becomes a common factor and drops out of
    the log-log slope.

    Returns ``(n, horizon, radii, strides)`` with radii in decreasing order.
    """
    if n is None or horizon is None:
        key = min(_FBM_GRIDS, key=lambda h: abs(h - H))
        n0, h0 = _FBM_GRIDS[key]
        n = n0 if n is None else n
        horizon = h0 if horizon is None else horizon
    dt = horizon / n
    j = np.arange(n_radii)
    radii = resolution * dt**H * 2.0 ** (j / 2)
    strides = np.maximum(1, np.floor(2.0 ** (j / (2 * H)) + 1e-9)).astype(int)
    return int(n), float(horizon), radii[::-1].copy(), strides[::-1].copy()


@dataclass(frozen=True, eq=False)
class CrossingDataset:
    """Truncated crossing legs for every (path, anchor) pair and radius.

    ``plus[i, j]`` is ``theta_plus - T`` for pair ``i`` at ``radii[j]`` and
    ``minus[i, j]`` is ``T - theta_minus``; censored legs are NaN.
    """

    hurst: float
    radii: np.ndarray
    strides: np.ndarray
    anchors: np.ndarray
    path_index: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def censored(self) -> np.ndarray:
        return np.isnan(self.plus) | np.isnan(self.minus)

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())

    def curve(self, which: str = "product", max_censored: float = 0.01) -> ExitCurve:
        """Average over pairs of the product ``(theta_plus - T)(T - theta_minus)``
        or of a single leg (``"plus"``/``"minus"``)."""
        if self.censored_fraction > max_censored:
            raise CensoringError(f"{self.censored_fraction:.2%} of crossings censored")
        data = {"product": self.plus * self.minus, "plus": self.plus, "minus": self.minus}[which]
        means, errs = [], []
        for col, bad in zip(data.T, self.censored.T):
            x = col[~bad]
            means.append(x.mean())
            errs.append(x.std(ddof=1) / np.sqrt(len(x)))
        return ExitCurve(self.radii, np.array(means), np.array(errs),
                         source={"space": {"kind": "fbm_graph", "hurst": self.hurst}, "process": "crossing",
                                 "statistic": which, "n_pairs": int(len(self.anchors)),
                                 "censored_fraction": self.censored_fraction})

    def rows(self):
        """``(T, r, theta_minus, theta_plus, censored)`` per pair and radius."""
        out = []
        for i, T in enumerate(self.anchors):
            for j, r in enumerate(self.radii):
                p, m = self.plus[i, j], self.minus[i, j]
                out.append((float(T), float(r), float(T - m), float(T + p), bool(np.isnan(p) or np.isnan(m))))
        return out


def fbm_crossing_dataset(
    H: float,
    radii=None,
    n_paths: int = 200,
    anchors_per_path: int = 20,
    rng: RngSpec | int | None = None,
    *,
    n: int | None = None,
    horizon: float | None = None,
    strides=None,
    method: str = "auto",
) -> CrossingDataset:
    """Sample fBM paths and record crossing legs at uniformly drawn anchors.

    Anchors come from the middle half of each path.  Paths are drawn from
    ``rng.spawn(0)`` and anchors from ``rng.spawn(1)``; both are fixed by
    ``rng`` alone.
    """
    n, horizon, r_def, s_def = fbm_design(H, n, horizon)
    if radii is None:
        radii, strides = r_def, s_def
    radii = np.asarray(radii, dtype=float)
    strides = np.ones(len(radii), dtype=int) if strides is None else np.asarray(strides, dtype=int)
    if len(strides) != len(radii) or np.any(strides < 1):
        raise ValueError("need one positive stride per radius")
    dt = horizon / n
    sd = (strides * dt) ** H
    if np.any(radii < UNRELIABLE_FACTOR * sd * (1 - 1e-9)):
        raise ValueError("radius below the grid-resolution guard (10 increment deviations)")
    spec = as_rng_spec(rng)
    agen = spec.spawn(1).generator()
    anchors = agen.integers(n // 4, 3 * n // 4 + 1, size=(n_paths, anchors_per_path))
    paths = (v for _, block in iter_fbm_blocks(H, n, horizon, n_paths, spec.spawn(0), method) for v in block)
    return crossing_dataset(paths, dt, radii, strides, anchors, hurst=H)


def crossing_dataset(paths, dt: float, radii, strides, anchors, hurst: float | None = None) -> CrossingDataset:
    """Crossing legs of given sampled paths at given anchor indices.

    ``paths`` is an iterable of value arrays on a common grid of spacing
    ``dt`` and ``anchors[p]`` lists the anchor indices used on path ``p``.
    """
    radii = np.asarray(radii, dtype=float)
    strides = np.asarray(strides, dtype=int)
    anchors = np.atleast_2d(np.asarray(anchors, dtype=np.int64))
    n_paths, per = anchors.shape
    plus = np.full((n_paths * per, len(radii)), np.nan)
    minus = np.full_like(plus, np.nan)
    count = 0
    for p, v in enumerate(paths):
        if p >= n_paths:
            raise ValueError("more paths than anchor rows")
        count += 1
        for a, k in enumerate(anchors[p]):
            row = p * per + a
            for j, (r, s) in enumerate(zip(radii, strides)):
                (up, _), (dn, _) = anchor_legs(v, int(k), r, int(s), dt)
                plus[row, j], minus[row, j] = up, dn
    if count != n_paths:
        raise ValueError("fewer paths than anchor rows")
    return CrossingDataset(
        hurst=float("nan") if hurst is None else float(hurst),
        radii=radii,
        strides=strides,
        anchors=anchors.ravel() * dt,
        path_index=np.repeat(np.arange(n_paths), per),
        plus=plus,
        minus=minus,
    )


def fbm_graph_walk_curve(H, radii=None, n_paths=200, anchors_per_path=20, rng=None, **kw) -> ExitCurve:
    """Exit-time curve of Brownian motion carried onto an fBM graph."""
    return fbm_crossing_dataset(H, radii, n_paths, anchors_per_path, rng, **kw).curve("product")


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    fit: DimensionFit | None
    infinite: bool = False


def holder_regularity(path: PathSample, t_index: int, radii) -> HolderEstimate:
    """Slope of log max_{|s-t| <= r} |f(s) - f(t)| against log r."""
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 4:
        raise ValueError("need at least four radii")
    t = path.times[t_index]
    if np.any(radii <= 0) or radii.max() > min(t - path.times[0], path.times[-1] - t) + 1e-12:
        raise ValueError("radii must be positive and keep the window inside the path")
    v = path.values
    osc = []
    for r in radii:
        w = int(np.floor(r / path.dt + 1e-9))
        seg = v[t_index - w : t_index + w + 1]
        osc.append(float(np.max(np.abs(seg - v[t_index]))))
    osc = np.array(osc)
    if np.all(osc == 0):
        return HolderEstimate(float("inf"), None, infinite=True)
    if np.any(osc == 0):
        raise ValueError("oscillation vanishes at some radii; path is locally constant")
    slope, intercept, r2 = linear_fit(np.log(radii), np.log(osc))
    return HolderEstimate(slope, DimensionFit(slope, intercept, r2, (float(radii.min()), float(radii.max())), len(radii)))
