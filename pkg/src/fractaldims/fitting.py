"""Least-squares power-law fits on log-log data."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np


@dataclass(frozen=True)
class DimensionFit:
    """Straight-line fit ``log y = slope * log x + intercept``.

    ``window`` is the (low, high) range of the abscissa ``x`` that entered
    the fit, in original (not logarithmic) units.
    """

    slope: float
    intercept: float
    r2: float
    window: tuple[float, float]
    n_points: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def linear_fit(u, v) -> tuple[float, float, float]:
    """Ordinary least squares of ``v`` on ``u``; returns (slope, intercept, r2)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("linear_fit expects two 1-d arrays of equal length")
    if len(u) < 2:
        raise ValueError("need at least two points for a fit")
    um, vm = u.mean(), v.mean()
    du = u - um
    suu = float(du @ du)
    if suu == 0.0:
        raise ValueError("abscissa is constant; slope undefined")
    slope = float(du @ (v - vm)) / suu
    intercept = float(vm - slope * um)
    resid = v - (slope * u + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float((v - vm) @ (v - vm))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return slope, intercept, r2


def loglog_fit(x, y) -> DimensionFit:
    """Fit ``log y`` against ``log x``. All values must be positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    slope, intercept, r2 = linear_fit(np.log(x), np.log(y))
    return DimensionFit(
        slope=slope,
        intercept=intercept,
        r2=r2,
        window=(float(x.min()), float(x.max())),
        n_points=int(len(x)),
    )
