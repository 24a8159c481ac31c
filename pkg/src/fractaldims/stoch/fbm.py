"""Fractional Brownian motion on a uniform grid."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .rng import RngSpec, as_rng_spec

__all__ = [
    "PathSample",
    "fbm_covariance",
    "fgn_autocovariance",
    "sample_fbm",
    "iter_fbm_blocks",
    "sample_fbm_paths",
    "MAX_CHOLESKY",
    "MAX_CIRCULANT",
]

MAX_CHOLESKY = 2**14
# raised from 2**20 so that H = 0.3 walk curves fit two octaves of radii
MAX_CIRCULANT = 2**22
AUTO_SWITCH = 2**12


@dataclass(frozen=True, eq=False)
class PathSample:
    """A sampled path on the grid ``t_k = k * dt``, ``k = 0..n``."""

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    hurst: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ValueError("times and values must be 1-d of equal length >= 2")
        step = np.diff(t)
        if np.any(step <= 0) or not np.allclose(step, step[0], rtol=1e-9, atol=0):
            raise ValueError("times must form a uniform increasing grid")
        if self.hurst is not None and not 0.0 < self.hurst < 1.0:
            raise ValueError("Hurst index must lie in (0, 1)")
        for a in (t, v):
            a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n(self) -> int:
        return len(self.times) - 1

    @classmethod
    def from_function(cls, f, n: int, horizon: float = 1.0, start: float = 0.0) -> "PathSample":
        t = start + np.arange(n + 1) * (horizon / n)
        return cls(t, np.asarray(f(t), dtype=float))


def fbm_covariance(s, t, H: float):
    """``E[B_s B_t] = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2``."""
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    h2 = 2 * H
    return 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)


def fgn_autocovariance(H: float, n: int) -> np.ndarray:
    """Autocovariance of unit-step fractional Gaussian noise at lags 0..n-1."""
    k = np.arange(n, dtype=float)
    h2 = 2 * H
    return 0.5 * (np.abs(k + 1) ** h2 - 2 * np.abs(k) ** h2 + np.abs(k - 1) ** h2)


@lru_cache(maxsize=4)
def _cholesky_factor(H: float, n: int) -> np.ndarray:
    # n x n doubles: about 2 GB at the 2**14 cap
    C = scipy.linalg.toeplitz(fgn_autocovariance(H, n))
    L = np.linalg.cholesky(C)
    L.setflags(write=False)
    return L


@lru_cache(maxsize=4)
def _circulant_sqrt(H: float, n: int) -> np.ndarray | None:
    g = fgn_autocovariance(H, n + 1)
    row = np.concatenate([g, g[-2:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        return None
    w = np.sqrt(np.maximum(lam, 0.0) / len(row))
    w.setflags(write=False)
    return w


def _check(H, n, method):
    if not 0.0 < H < 1.0:
        raise ValueError("Hurst index must lie in (0, 1)")
    if n < 1:
        raise ValueError("grid size must be >= 1")
    if method == "auto":
        method = "cholesky" if n <= AUTO_SWITCH else "circulant"
    if method == "cholesky" and n > MAX_CHOLESKY:
        raise ValueError(f"cholesky method is limited to n <= {MAX_CHOLESKY}")
    if method == "circulant" and n > MAX_CIRCULANT:
        raise ValueError(f"circulant method is limited to n <= {MAX_CIRCULANT}")
    if method not in ("cholesky", "circulant"):
        raise ValueError(f"unknown method {method!r}")
    if method == "circulant" and _circulant_sqrt(float(H), int(n)) is None:
        if n > MAX_CHOLESKY:
            raise ArithmeticError("circulant embedding is not nonnegative definite and n is too large for cholesky")
        warnings.warn("circulant embedding not nonnegative definite; falling back to cholesky", RuntimeWarning)
        method = "cholesky"
    return method


def _fgn_block(H, n, k, method, gen) -> np.ndarray:
    """``k`` independent unit-step fGn rows of length ``n``."""
    if method == "cholesky":
        L = _cholesky_factor(float(H), int(n))
        return gen.standard_normal((k, n)) @ L.T
    w = _circulant_sqrt(float(H), int(n))
    out = np.empty((k, n))
    # real and imaginary parts of one transform are independent samples
    for i in range(0, k, 2):
        z = gen.standard_normal(len(w)) + 1j * gen.standard_normal(len(w))
        y = np.fft.fft(w * z)[:n]
        out[i] = y.real
        if i + 1 < k:
            out[i + 1] = y.imag
    return out


def _to_fbm(fgn: np.ndarray, dt: float, H: float) -> np.ndarray:
    out = np.zeros((fgn.shape[0], fgn.shape[1] + 1))
    np.cumsum(fgn, axis=1, out=out[:, 1:])
    out *= dt**H
    return out


def sample_fbm(
    H: float,
    n: int,
    horizon: float = 1.0,
    rng: RngSpec | int | None = None,
    method: str = "auto",
) -> PathSample:
    """One fBM path on ``t_k = k * horizon / n``, ``k = 0..n``.

    ``method`` is ``"cholesky"`` (exact factorisation of the increment
    covariance), ``"circulant"`` (Davies-Harte embedding) or ``"auto"``
    (cholesky up to n = 4096).  Both are exact in distribution.
    """
    method = _check(H, n, method)
    dt = horizon / n
    vals = _to_fbm(_fgn_block(H, n, 1, method, as_rng_spec(rng).generator()), dt, H)[0]
    return PathSample(np.arange(n + 1) * dt, vals, float(H))


def iter_fbm_blocks(
    H: float,
    n: int,
    horizon: float,
    n_paths: int,
    rng: RngSpec | int | None = None,
    method: str = "auto",
    block_size: int = 8,
):
    """Yield ``(first_index, values)`` with ``values`` of shape (k, n + 1).

    Block ``b`` draws from ``rng.spawn(b)``, so the stream of paths is fixed
    by ``rng`` alone and large ensembles never have to be held in memory.
    """
    method = _check(H, n, method)
    spec = as_rng_spec(rng)
    dt = horizon / n
    for b, i0 in enumerate(range(0, n_paths, block_size)):
        k = min(block_size, n_paths - i0)
        yield i0, _to_fbm(_fgn_block(H, n, k, method, spec.spawn(b).generator()), dt, H)


def sample_fbm_paths(H, n, horizon=1.0, n_paths=1, rng=None, method="auto", block_size=8) -> np.ndarray:
    """All paths of :func:`iter_fbm_blocks` stacked into one array."""
    return np.concatenate([v for _, v in iter_fbm_blocks(H, n, horizon, n_paths, rng, method, block_size)])
