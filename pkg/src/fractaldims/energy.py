"""Graph energies, harmonic extension and Dirichlet spectra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .fitting import DimensionFit, linear_fit
from .sg import GraphApprox, refine

__all__ = [
    "VertexFunction",
    "SpectrumResult",
    "energy",
    "energy_form",
    "harmonic_extension",
    "laplacian_matrix",
    "dirichlet_spectrum",
    "grid_dirichlet_spectrum",
    "eigenvalue_counting",
    "spectral_dimension_fit",
    "ENERGY_RENORMALIZATION",
    "DEFAULT_WINDOW",
]

# E_n := (5/3)^n * raw energy keeps harmonic extensions energy-preserving
ENERGY_RENORMALIZATION = 5.0 / 3.0
DEFAULT_WINDOW = (0.0, 0.1)


@dataclass(frozen=True, eq=False)
class VertexFunction:
    level: int | None
    values: np.ndarray = field(repr=False)


def _values(g: GraphApprox, u) -> np.ndarray:
    if isinstance(u, VertexFunction):
        if u.level != g.level:
            raise ValueError(f"function lives on level {u.level}, graph is level {g.level}")
        u = u.values
    u = np.asarray(u, dtype=float)
    if u.shape != (g.n_vertices,):
        raise ValueError(f"expected {g.n_vertices} vertex values, got shape {u.shape}")
    return u


def energy_form(g: GraphApprox, u, v, renormalized: bool = False) -> float:
    """Sum over edges xy of (u(x) - u(y)) (v(x) - v(y))."""
    u, v = _values(g, u), _values(g, v)
    i, j = g.edges[:, 0], g.edges[:, 1]
    e = float(np.dot(u[i] - u[j], v[i] - v[j]))
    if renormalized:
        e *= ENERGY_RENORMALIZATION ** (g.level or 0)
    return e


def energy(g: GraphApprox, u, renormalized: bool = False) -> float:
    """Quadratic energy of ``u`` on ``g``; optionally scaled by (5/3)^level."""
    return energy_form(g, u, u, renormalized)


def harmonic_extension(g: GraphApprox, u) -> VertexFunction:
    """Energy-minimising extension of ``u`` from G_n to G_{n+1}.

    On each n-cell with corner values (a, b, c) the midpoint opposite ``a``
    receives (a + 2b + 2c) / 5, and cyclically.
    """
    if g.level is None or len(g.cells) == 0:
        raise ValueError("harmonic extension needs a gasket graph with cells")
    u = _values(g, u)
    V, _, mid = refine(g.vertices, g.cells)
    out = np.empty(len(V))
    out[: len(u)] = u
    a, b, c = (u[g.cells[:, k]] for k in range(3))
    ab, bc, ac = mid.T
    out[bc] = (a + 2 * b + 2 * c) / 5
    out[ac] = (2 * a + b + 2 * c) / 5
    out[ab] = (2 * a + 2 * b + c) / 5
    return VertexFunction(level=g.level + 1, values=out)


def _default_scale(g: GraphApprox) -> float:
    if g.level is not None:
        return 5.0 ** g.level
    h = np.linalg.norm(g.vertices[g.edges[:, 0]] - g.vertices[g.edges[:, 1]], axis=1).mean()
    return 1.0 / h**2


def laplacian_matrix(g: GraphApprox, boundary=None, scale: float | None = None, sparse: bool = False):
    """Dirichlet graph Laplacian on the interior vertices.

    Row ``i`` has ``deg(i) * scale`` on the diagonal and ``-scale`` for each
    interior neighbour; boundary rows and columns are removed.  The default
    scale is 5^n on G_n and 1/h^2 on a uniform path graph.

    Returns ``(L, interior_indices)``.
    """
    boundary = tuple(g.boundary if boundary is None else boundary)
    nv = g.n_vertices
    if any(not 0 <= b < nv for b in boundary):
        raise ValueError("boundary indices out of range")
    mask = np.ones(nv, dtype=bool)
    mask[list(boundary)] = False
    interior = np.flatnonzero(mask)
    if len(interior) == 0:
        raise ValueError("Dirichlet problem has no interior vertices")
    s = _default_scale(g) if scale is None else float(scale)
    i, j = g.edges[:, 0], g.edges[:, 1]
    A = sp.coo_matrix((np.ones(len(i)), (i, j)), shape=(nv, nv))
    A = (A + A.T).tocsr()
    deg = np.asarray(A.sum(axis=1)).ravel()
    L = (sp.diags(deg) - A)[interior][:, interior] * s
    return (L.tocsr() if sparse else L.toarray()), interior


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray = field(repr=False)
    level: int | None
    normalization: float

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        if len(ev) and ev[0] < -1e-9 * max(1.0, abs(ev[-1])):
            raise ValueError("negative eigenvalue in a Dirichlet spectrum")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self):
        return len(self.eigenvalues)


def dirichlet_spectrum(g: GraphApprox, boundary=None, scale: float | None = None) -> SpectrumResult:
    L, _ = laplacian_matrix(g, boundary, scale)
    s = _default_scale(g) if scale is None else float(scale)
    ev = scipy.linalg.eigh(L, eigvals_only=True, check_finite=False)
    return SpectrumResult(np.sort(ev), g.level, s)


def grid_dirichlet_spectrum(mask: np.ndarray, h: float) -> SpectrumResult:
    """Five-point Dirichlet Laplacian on the grid nodes flagged in ``mask``.

    ``mask`` is a 2-d boolean array of nodes inside the domain; nodes outside
    act as the zero boundary.
    """
    mask = np.asarray(mask, dtype=bool)
    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(mask.sum())
    rows, cols = np.nonzero(mask)
    n = len(rows)
    r, c = [np.arange(n)], [np.arange(n)]
    vals = [np.full(n, 4.0)]
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        rr, cc = rows + dr, cols + dc
        ok = (rr >= 0) & (rr < mask.shape[0]) & (cc >= 0) & (cc < mask.shape[1])
        nb = np.full(n, -1)
        nb[ok] = idx[rr[ok], cc[ok]]
        keep = nb >= 0
        r.append(np.flatnonzero(keep))
        c.append(nb[keep])
        vals.append(-np.ones(keep.sum()))
    L = sp.coo_matrix((np.concatenate(vals), (np.concatenate(r), np.concatenate(c))), shape=(n, n))
    ev = scipy.linalg.eigh(L.toarray() / h**2, eigvals_only=True, check_finite=False)
    return SpectrumResult(np.sort(ev), None, 1.0 / h**2)


def eigenvalue_counting(spec: SpectrumResult, x: float, rtol: float = 1e-9) -> int:
    """``N(x) = #{k : lambda_k <= x}``.

    ``rtol`` absorbs solver noise so that a numerically split multiple
    eigenvalue is counted as a whole once ``x`` reaches it.
    """
    if x < 0:
        raise ValueError("threshold must be nonnegative")
    return int(np.searchsorted(spec.eigenvalues, x * (1 + rtol), side="right"))


def spectral_dimension_fit(spec: SpectrumResult, window=DEFAULT_WINDOW, min_points: int = 20) -> DimensionFit:
    """Least-squares slope of log N(lambda_k) against log lambda_k.

    ``window`` selects indices ``k`` by fraction of the spectrum; the
    default keeps the lowest tenth, where the discrete operator still
    resolves the continuum one.
    """
    lo, hi = window
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError("window must satisfy 0 <= low < high <= 1")
    ev = spec.eigenvalues
    K = len(ev)
    i0, i1 = int(np.floor(lo * K)), int(np.ceil(hi * K))
    lam = ev[i0:i1]
    lam = lam[lam > 0]
    if len(lam) < min_points:
        raise ValueError(f"only {len(lam)} eigenvalues in the fit window; need {min_points}")
    counts = np.searchsorted(ev, lam * (1 + 1e-9), side="right")
    slope, intercept, r2 = linear_fit(np.log(lam), np.log(counts))
    return DimensionFit(slope, intercept, r2, (float(lam[0]), float(lam[-1])), len(lam))
