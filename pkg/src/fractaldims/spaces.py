"""Concrete metric spaces used by the experiments.

Every space is an immutable descriptor exposing a vectorised metric.  Points
are 1-d float arrays (a single coordinate for the line-like spaces, two for
planar ones); stacks of points are arrays whose last axis is the coordinate
axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

__all__ = [
    "SpaceDescriptor",
    "EuclideanDomain",
    "ArctanLine",
    "HolderProduct",
    "FunctionGraphSup",
    "GraphMetric",
    "as_point",
    "distance",
    "ball_exit_radius",
    "graph_of_function_space",
    "space_from_config",
]


def as_point(p, dim: int | None = None) -> np.ndarray:
    """Coerce ``p`` to a finite 1-d float array, optionally checking its length."""
    a = np.atleast_1d(np.asarray(p, dtype=float))
    if a.ndim != 1:
        raise ValueError(f"a point must be 1-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"point has non-finite coordinates: {a}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected a point with {dim} coordinate(s), got {a.shape[0]}")
    return a


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class SpaceDescriptor:
    """Common interface; subclasses are frozen dataclasses."""

    kind: ClassVar[str] = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def distance_array(self, P, Q) -> np.ndarray:
        """Metric evaluated pointwise over stacks of points (broadcasting)."""
        raise NotImplementedError

    def exit_gap(self, center, r: float, X, axes=None):
        """Chart-coordinate distance from each row of ``X`` to the complement of
        the ball ``B(center, r)``, restricted to motion along ``axes``.

        Used for the Brownian-bridge exit correction.  ``None`` means the space
        provides no such bound and exits are only detected on the grid.
        """
        return None

    def _check(self, p) -> np.ndarray:
        a = np.asarray(p, dtype=float)
        if a.shape[-1:] != (self.dim,):
            raise ValueError(
                f"{self.kind} expects points with {self.dim} coordinate(s), "
                f"got shape {a.shape}"
            )
        return a

    def to_dict(self) -> dict:
        return {"kind": self.kind}


_NORMS = ("l2", "l1", "linf")


@dataclass(frozen=True)
class EuclideanDomain(SpaceDescriptor):
    """Open box (or all of R^n when ``bounds`` is None) with a norm metric."""

    n: int
    bounds: tuple[tuple[float, float], ...] | None = None
    norm: str = "l2"
    kind: ClassVar[str] = "euclidean"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.norm not in _NORMS:
            raise ValueError(f"norm must be one of {_NORMS}")
        if self.bounds is not None:
            b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(b) != self.n or any(lo >= hi for lo, hi in b):
                raise ValueError("bounds must give one (lo, hi) pair per axis with lo < hi")
            object.__setattr__(self, "bounds", b)

    @property
    def dim(self) -> int:
        return self.n

    def distance_array(self, P, Q):
        d = np.abs(self._check(P) - self._check(Q))
        if self.norm == "l2":
            return np.sqrt(np.sum(d * d, axis=-1))
        if self.norm == "l1":
            return np.sum(d, axis=-1)
        return np.max(d, axis=-1)

    def exit_gap(self, center, r, X, axes=None):
        d = np.abs(self._check(X) - np.asarray(center, dtype=float))
        if self.norm == "l2":
            return r - np.sqrt(np.sum(d * d, axis=-1))
        if self.norm == "l1":
            # nearest face of the cross-polytope
            return (r - np.sum(d, axis=-1)) / np.sqrt(self.n)
        ax = list(range(self.n)) if axes is None else list(axes)
        return np.min(r - d[..., ax], axis=-1)

    def contains(self, p) -> bool:
        if self.bounds is None:
            return True
        a = as_point(p, self.n)
        return all(lo < x < hi for x, (lo, hi) in zip(a, self.bounds))

    def to_dict(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "bounds": None if self.bounds is None else [list(b) for b in self.bounds],
            "norm": self.norm,
        }


@dataclass(frozen=True)
class ArctanLine(SpaceDescriptor):
    """The real line with ``d(x, y) = |arctan x - arctan y|`` (diameter pi)."""

    kind: ClassVar[str] = "arctan"

    @property
    def dim(self) -> int:
        return 1

    def distance_array(self, P, Q):
        P, Q = self._check(P), self._check(Q)
        return np.abs(np.arctan(P[..., 0]) - np.arctan(Q[..., 0]))

    def exit_gap(self, center, r, X, axes=None):
        # the ball is the interval (tan(a - r), tan(a + r)), a = arctan(center)
        a = float(np.arctan(np.asarray(center, dtype=float)[0]))
        lo = np.tan(a - r) if a - r > -np.pi / 2 else -np.inf
        hi = np.tan(a + r) if a + r < np.pi / 2 else np.inf
        x = self._check(X)[..., 0]
        return np.minimum(x - lo, hi - x)

    def interval(self, center: float, r: float) -> tuple[float, float]:
        """Euclidean endpoints of the open ball ``B(center, r)``."""
        a = float(np.arctan(center))
        lo = float(np.tan(a - r)) if a - r > -np.pi / 2 else -np.inf
        hi = float(np.tan(a + r)) if a + r < np.pi / 2 else np.inf
        return lo, hi


@dataclass(frozen=True)
class HolderProduct(SpaceDescriptor):
    """R^2 with ``d(x, y) = |x1 - y1|**alpha + |x2 - y2|``.

    The first coordinate is snowflaked; alpha = 1 is the l1 metric.
    """

    alpha: float
    kind: ClassVar[str] = "holder_product"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")

    @property
    def dim(self) -> int:
        return 2

    def distance_array(self, P, Q):
        d = np.abs(self._check(P) - self._check(Q))
        return d[..., 0] ** self.alpha + d[..., 1]

    def exit_gap(self, center, r, X, axes=None):
        d = np.abs(self._check(X) - np.asarray(center, dtype=float))
        rest1 = np.maximum(r - d[..., 1], 0.0)
        gaps = {
            0: rest1 ** (1.0 / self.alpha) - d[..., 0],
            1: r - d[..., 0] ** self.alpha - d[..., 1],
        }
        ax = (0, 1) if axes is None else tuple(axes)
        return np.min(np.stack([gaps[a] for a in ax]), axis=0)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True, eq=False)
class FunctionGraphSup(SpaceDescriptor):
    """Graph ``{(t, f(t))}`` of a sampled function with the maximum metric.

    Between samples the function is linearly interpolated, so ``phi`` is
    defined on the whole sampled time range.
    """

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    kind: ClassVar[str] = "function_graph_sup"

    @property
    def dim(self) -> int:
        return 2

    def distance_array(self, P, Q):
        d = np.abs(self._check(P) - self._check(Q))
        return np.maximum(d[..., 0], d[..., 1])

    def exit_gap(self, center, r, X, axes=None):
        d = np.abs(self._check(X) - np.asarray(center, dtype=float))
        return r - np.maximum(d[..., 0], d[..., 1])

    def f(self, t):
        return np.interp(t, self.times, self.values)

    def phi(self, t) -> np.ndarray:
        """Homeomorphism from the time axis onto the graph."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError("time outside the sampled range")
        return np.stack([t, self.f(t)], axis=-1)

    @staticmethod
    def project(p) -> np.ndarray:
        """Inverse of ``phi``: projection onto the time coordinate."""
        return np.asarray(p, dtype=float)[..., 0]

    def param_distance(self, s, t):
        """``d(phi(s), phi(t))`` for time parameters ``s`` and ``t``."""
        return self.distance_array(self.phi(s), self.phi(t))

    def to_dict(self):
        return {"kind": self.kind, "n_samples": int(len(self.times))}


@dataclass(frozen=True, eq=False)
class GraphMetric(SpaceDescriptor):
    """Vertex set of a planar graph with the shortest-path metric.

    Edge lengths are the Euclidean lengths of the embedded edges; a point
    is a one-element array holding the vertex index.
    """

    graph: object = field(repr=False)
    kind: ClassVar[str] = "graph_metric"

    @property
    def dim(self) -> int:
        return 1

    def _adjacency(self):
        g = self.graph
        e = np.asarray(g.edges)
        w = np.linalg.norm(g.vertices[e[:, 0]] - g.vertices[e[:, 1]], axis=1)
        nv = len(g.vertices)
        return coo_matrix((w, (e[:, 0], e[:, 1])), shape=(nv, nv)).tocsr()

    def distance_array(self, P, Q):
        P, Q = self._check(P), self._check(Q)
        P, Q = np.broadcast_arrays(P[..., 0], Q[..., 0])
        ip = P.astype(int).ravel()
        iq = Q.astype(int).ravel()
        nv = len(self.graph.vertices)
        if np.any((ip < 0) | (ip >= nv) | (iq < 0) | (iq >= nv)):
            raise ValueError("vertex index out of range")
        src, inv = np.unique(ip, return_inverse=True)
        table = dijkstra(self._adjacency(), directed=False, indices=src)
        return table[inv, iq].reshape(P.shape)

    def to_dict(self):
        return {"kind": self.kind, "level": getattr(self.graph, "level", None)}


def distance(space: SpaceDescriptor, p, q) -> float:
    """Distance between two single points of ``space``."""
    p = as_point(p, space.dim)
    q = as_point(q, space.dim)
    return float(space.distance_array(p, q))


def ball_exit_radius(space: SpaceDescriptor, center, p) -> float:
    """``distance(center, p)``; a path has left ``B(center, r)`` once this is >= r."""
    return distance(space, center, p)


def graph_of_function_space(times, values) -> FunctionGraphSup:
    """Build the sup-metric graph space of the sampled function ``values(times)``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or v.ndim != 1 or len(t) != len(v):
        raise ValueError("times and values must be 1-d of equal length")
    if len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing with at least two samples")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise ValueError("times and values must be finite")
    return FunctionGraphSup(times=_frozen(t), values=_frozen(v))


def space_from_config(cfg: dict) -> SpaceDescriptor:
    """Build a space from its JSON description (``{"kind": ..., ...}``)."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    allowed = {
        "euclidean": {"n", "bounds", "norm"},
        "arctan": set(),
        "holder_product": {"alpha"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown space kind {kind!r}; expected one of {sorted(allowed)}")
    extra = set(cfg) - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for space {kind!r}: {sorted(extra)}")
    if kind == "euclidean":
        bounds = cfg.get("bounds")
        return EuclideanDomain(
            n=int(cfg.get("n", 1)),
            bounds=None if bounds is None else tuple(tuple(b) for b in bounds),
            norm=cfg.get("norm", "l2"),
        )
    if kind == "arctan":
        return ArctanLine()
    return HolderProduct(alpha=float(cfg["alpha"]))
