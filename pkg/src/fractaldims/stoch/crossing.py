"""Crossing times of a sampled path through sup-metric balls.

For a graph point ``(T, f(T))`` and radius ``r`` the forward crossing time is
``theta_plus = min(T + r, first t > T with |f(t) - f(T)| >= r)`` and the
backward one is its mirror image; ``(theta_plus - T) * (T - theta_minus)`` is
the mean exit time of Brownian motion carried onto the graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fbm import PathSample

__all__ = ["CrossingTimes", "crossing_times", "crossing_leg", "anchor_legs", "graph_exit_expectation", "UNRELIABLE_FACTOR"]

UNRELIABLE_FACTOR = 10.0


@dataclass(frozen=True)
class CrossingTimes:
    theta_minus: float
    theta_plus: float
    anchor: float
    radius: float
    censored_minus: bool = False
    censored_plus: bool = False
    unreliable: bool = False

    @property
    def censored(self) -> bool:
        return self.censored_minus or self.censored_plus

    @property
    def legs(self) -> tuple[float, float]:
        """``(theta_plus - T, T - theta_minus)``."""
        return self.theta_plus - self.anchor, self.anchor - self.theta_minus


def _first_exit(x: np.ndarray, r: float, limit: int) -> int:
    """Smallest ``j`` in ``1..limit`` with ``|x[j]| >= r``, else -1.

    Scans in geometrically growing chunks, since exits are usually early.
    """
    start, chunk = 1, 64
    while start <= limit:
        end = min(limit + 1, start + chunk)
        hit = np.abs(x[start:end]) >= r
        j = int(hit.argmax())
        if hit[j]:
            return start + j
        start, chunk = end, chunk * 4
    return -1


def crossing_leg(x: np.ndarray, r: float, step: float, cap: float | None = None) -> tuple[float, bool]:
    """Truncated exit time of one leg.

    ``x`` holds the increments ``f(t_j) - f(T)`` along one time direction
    with spacing ``step`` (``x[0] == 0``).  Returns ``(min(cap, exit time),
    censored)`` with ``cap = r`` by default; censored means the data ran out
    before either bound was reached.  ``cap = inf`` gives the plain exit time
    of the value leg.
    """
    cap = r if cap is None else cap
    if np.isfinite(cap):
        need = int(np.ceil(cap / step - 1e-12))
        limit = min(need, len(x) - 1)
    else:
        need, limit = None, len(x) - 1
    j = _first_exit(x, r, limit)
    if j < 0:
        return (cap, False) if need is not None and limit >= need else (float("nan"), True)
    prev, cur = x[j - 1], x[j]
    level = r if cur >= r else -r
    frac = (level - prev) / (cur - prev)
    return min(cap, (j - 1 + frac) * step), False


def anchor_legs(values: np.ndarray, k: int, r: float, stride: int, dt: float):
    """Forward and backward :func:`crossing_leg` results at sample ``k``.

    Only the samples that can matter (time span ``r`` each way) are copied.
    """
    step = stride * dt
    span = stride * (int(np.ceil(r / step - 1e-12)) + 1)
    fwd = values[k : k + span + 1 : stride] - values[k]
    lo = k - span - 1
    bwd = values[k : (lo if lo >= 0 else None) : -stride] - values[k]
    return crossing_leg(fwd, r, step), crossing_leg(bwd, r, step)


def crossing_times(path: PathSample, anchor_index: int, r: float, stride: int = 1) -> CrossingTimes:
    """Crossing times of ``path`` around ``t[anchor_index]`` at radius ``r``.

    With ``stride > 1`` only every ``stride``-th sample is inspected, which
    puts several radii at the same resolution relative to the sampling noise.
    The result is flagged unreliable when ``r`` is below ten standard
    deviations of a (strided) grid increment.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    n = path.n
    if not 0 < anchor_index < n:
        raise ValueError("anchor index must be interior to the grid")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    v = path.values
    k = int(anchor_index)
    step = stride * path.dt
    if path.hurst is not None:
        sd = step**path.hurst
    else:
        inc = np.diff(v[::stride])
        sd = float(np.sqrt(np.mean(inc * inc)))
    T = float(path.times[k])
    (up, cp), (dn, cm) = anchor_legs(v, k, r, stride, path.dt)
    return CrossingTimes(
        theta_minus=T - dn,
        theta_plus=T + up,
        anchor=T,
        radius=float(r),
        censored_minus=cm,
        censored_plus=cp,
        unreliable=bool(r < UNRELIABLE_FACTOR * sd),
    )


def graph_exit_expectation(ct: CrossingTimes) -> float:
    """``(theta_plus - T) * (T - theta_minus)``."""
    if ct.censored:
        raise ValueError("crossing times are censored")
    a, b = ct.legs
    return max(a, 0.0) * max(b, 0.0)
