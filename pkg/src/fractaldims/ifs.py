"""Iterated function systems, Moran dimension and box counting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fitting import DimensionFit, linear_fit

__all__ = [
    "Similitude",
    "IFSystem",
    "BoxCountResult",
    "moran_dimension",
    "chaos_game",
    "box_counting_dimension",
    "graph_box_counting_dimension",
    "sierpinski_ifs",
    "cantor_ifs",
]

SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class Similitude:
    """``x -> ratio * Q @ x + shift`` with ``Q`` orthogonal."""

    ratio: float
    shift: np.ndarray
    rotation: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"contraction ratio must lie in (0, 1), got {self.ratio}")
        b = np.atleast_1d(np.asarray(self.shift, dtype=float))
        q = np.eye(len(b)) if self.rotation is None else np.asarray(self.rotation, dtype=float)
        if q.shape != (len(b), len(b)) or not np.allclose(q.T @ q, np.eye(len(b)), atol=1e-12):
            raise ValueError("rotation part must be an orthogonal matrix matching the shift")
        object.__setattr__(self, "shift", b)
        object.__setattr__(self, "rotation", q)

    @property
    def dim(self) -> int:
        return len(self.shift)

    @property
    def linear(self) -> np.ndarray:
        return self.ratio * self.rotation

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.shift

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(self.dim) - self.linear, self.shift)


@dataclass(frozen=True)
class IFSystem:
    """A finite family of similitudes.

    ``open_set_condition`` is asserted by whoever builds the system; it is
    not checked.
    """

    maps: tuple[Similitude, ...]
    open_set_condition: bool = True

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        if len({m.dim for m in maps}) != 1:
            raise ValueError("all maps must act on the same space")
        object.__setattr__(self, "maps", maps)

    @property
    def ratios(self) -> list[float]:
        return [m.ratio for m in self.maps]

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    def similarity_dimension(self) -> float:
        return moran_dimension(self.ratios)


def sierpinski_ifs() -> IFSystem:
    """The three half-scale maps fixing (0,0), (1,0) and (1/2, sqrt(3)/2)."""
    return IFSystem(
        (
            Similitude(0.5, np.array([0.0, 0.0])),
            Similitude(0.5, np.array([0.5, 0.0])),
            Similitude(0.5, np.array([0.25, SQRT3 / 4])),
        )
    )


def cantor_ifs() -> IFSystem:
    """Middle-third Cantor set on [0, 1]."""
    return IFSystem((Similitude(1 / 3, np.array([0.0])), Similitude(1 / 3, np.array([2 / 3]))))


def moran_dimension(ratios, tol: float = 1e-12) -> float:
    """Unique ``s >= 0`` with ``sum(r_i ** s) == 1``, found by bisection.

    The map ``s -> sum(r_i ** s)`` is strictly decreasing, equals N at 0,
    and drops below 1 before ``log N / log(1 / max r) + 1``.
    """
    r = np.asarray(list(ratios), dtype=float)
    if r.size == 0:
        raise ValueError("need at least one contraction ratio")
    if np.any(~np.isfinite(r)) or np.any(r <= 0) or np.any(r >= 1):
        raise ValueError("contraction ratios must lie in (0, 1)")
    if r.size == 1:
        return 0.0
    logr = np.log(r)

    def excess(s):
        return float(np.exp(s * logr).sum()) - 1.0

    lo, hi = 0.0, np.log(r.size) / -logr.max() + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        e = excess(mid)
        if e > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, hi):
            break
    s = 0.5 * (lo + hi)
    if abs(excess(s)) > tol:
        raise ArithmeticError(f"Moran bisection did not converge (residual {excess(s):.3e})")
    return s


def chaos_game(
    ifs: IFSystem,
    n_points: int,
    seed: int = 0,
    burn_in: int = 100,
    chains: int = 256,
    block_size: int = 1 << 16,
) -> np.ndarray:
    """Sample ``n_points`` points of the attractor by random iteration.

    Points come in blocks of ``block_size``; block ``b`` runs ``chains``
    independent orbits from the origin with its own generator seeded by
    ``(seed, b)``, discarding the first ``burn_in`` iterates of each orbit.
    The output therefore does not depend on how blocks are scheduled.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    A = np.stack([m.linear for m in ifs.maps])
    B = np.stack([m.shift for m in ifs.maps])
    out = []
    remaining = n_points
    b = 0
    while remaining > 0:
        m = min(block_size, remaining)
        out.append(_chaos_block(A, B, m, np.random.default_rng([seed, b]), burn_in, chains))
        remaining -= m
        b += 1
    return np.concatenate(out)


def _chaos_block(A, B, m, rng, burn_in, chains):
    k = min(chains, m)
    steps = -(-m // k)
    x = np.zeros((k, B.shape[1]))
    pts = np.empty((steps, k, B.shape[1]))
    for it in range(burn_in + steps):
        j = rng.integers(0, len(A), size=k)
        x = np.einsum("kij,kj->ki", A[j], x) + B[j]
        if it >= burn_in:
            pts[it - burn_in] = x
    return pts.reshape(-1, B.shape[1])[:m]


@dataclass(frozen=True)
class BoxCountResult:
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    r2: float
    intercept: float = 0.0
    degenerate: bool = False
    full_fit: DimensionFit | None = field(default=None, compare=False)
    trimmed_fit: DimensionFit | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "scales": list(self.scales),
            "counts": list(self.counts),
            "slope": self.slope,
            "r2": self.r2,
            "degenerate": self.degenerate,
            "full_fit": None if self.full_fit is None else self.full_fit.to_dict(),
            "trimmed_fit": None if self.trimmed_fit is None else self.trimmed_fit.to_dict(),
        }


def _check_scales(scales) -> np.ndarray:
    s = np.asarray(scales, dtype=float)
    if s.ndim != 1 or len(s) < 2:
        raise ValueError("need at least two scales")
    if np.any(s <= 0) or np.any(np.diff(s) >= 0):
        raise ValueError("scales must be positive and strictly decreasing")
    return s


def _fit_counts(s: np.ndarray, counts: np.ndarray) -> BoxCountResult:
    if np.all(counts == counts[0]):
        return BoxCountResult(tuple(s.tolist()), tuple(int(c) for c in counts), 0.0, 0.0, degenerate=True)

    def fit(idx):
        sl, ic, r2 = linear_fit(np.log(1.0 / s[idx]), np.log(counts[idx]))
        return DimensionFit(sl, ic, r2, (float(s[idx].min()), float(s[idx].max())), len(idx))

    full = fit(np.arange(len(s)))
    chosen, trimmed = full, None
    if full.r2 < 0.99 and len(s) >= 4:
        trimmed = fit(np.arange(1, len(s) - 1))
        chosen = trimmed
    return BoxCountResult(
        scales=tuple(s.tolist()),
        counts=tuple(int(c) for c in counts),
        slope=chosen.slope,
        r2=chosen.r2,
        intercept=chosen.intercept,
        full_fit=full,
        trimmed_fit=trimmed,
    )


def box_counting_dimension(points, scales) -> BoxCountResult:
    """Count occupied axis-aligned boxes at each scale and fit the log-log slope.

    The box grid is anchored at the coordinatewise minimum of the cloud.  If
    the fit over all scales has r2 < 0.99, the largest and smallest scales are
    dropped and the fit is repeated once; both fits are kept on the result.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if len(P) < 1000:
        raise ValueError("box counting needs at least 1000 points")
    s = _check_scales(scales)
    P = P - P.min(axis=0)
    counts = np.array([len(np.unique(np.floor(P / h).astype(np.int64), axis=0)) for h in s])
    return _fit_counts(s, counts)


def graph_box_counting_dimension(times, values, scales) -> BoxCountResult:
    """Box counting for the graph of a piecewise-linear function.

    For each column of width ``h`` the interpolated path covers the vertical
    range between its column minimum and maximum; the boxes met are counted
    exactly instead of only the boxes holding a sample point.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) < 1000 or len(t) != len(v):
        raise ValueError("need at least 1000 samples with matching times")
    s = _check_scales(scales)
    t = t - t[0]
    v = v - v.min()
    counts = []
    for h in s:
        ncol = int(np.ceil(t[-1] / h - 1e-12))
        edges = np.arange(ncol + 1) * h
        edges[-1] = min(edges[-1], t[-1])
        ev = np.interp(edges, t, v)
        col = np.minimum((t / h).astype(np.int64), ncol - 1)
        starts = np.searchsorted(col, np.arange(ncol))
        present = np.bincount(col, minlength=ncol) > 0
        lo = np.minimum(ev[:-1], ev[1:])
        hi = np.maximum(ev[:-1], ev[1:])
        if present.any():
            idx = starts[present]
            lo[present] = np.minimum(lo[present], np.minimum.reduceat(v, idx)[: present.sum()])
            hi[present] = np.maximum(hi[present], np.maximum.reduceat(v, idx)[: present.sum()])
        n = np.floor(hi / h) - np.floor(lo / h) + 1
        counts.append(int(n.sum()))
    return _fit_counts(s, np.array(counts))
