"""Simple random walk on the gasket graphs and its V_m crossing times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..sg import GraphApprox, build_graph, n_vertices
from .rng import RngSpec, as_rng_spec, map_blocks

__all__ = ["SRWCrossingStats", "exact_crossing_mean", "simulate_crossings", "srw_crossing_stats"]

MAX_FINE_LEVEL = 8


@dataclass(frozen=True)
class SRWCrossingStats:
    """Steps a walk on G_n takes between successive distinct V_m visits."""

    n: int
    m: int
    mean: float
    stderr: float
    exact_mean: float
    n_runs: int

    def __iter__(self):
        return iter((self.mean, self.stderr))


def _check_levels(n, m):
    if not 0 <= m < n <= MAX_FINE_LEVEL:
        raise ValueError(f"need 0 <= m < n <= {MAX_FINE_LEVEL}, got n={n}, m={m}")


def exact_crossing_mean(n: int, m: int, start: int = 0) -> float:
    """Expected steps from ``start`` in V_m until the walk on G_n hits V_m minus ``start``.

    Solves the hitting-time equations ``h = 1 + P h`` on the non-target
    vertices, with ``h = 0`` on the target set.
    """
    _check_levels(n, m)
    nm = n_vertices(m)
    if not 0 <= start < nm:
        raise ValueError("start must be a vertex of V_m")
    g = build_graph(n)
    nv = g.n_vertices
    i, j = g.edges[:, 0], g.edges[:, 1]
    A = sp.coo_matrix((np.ones(2 * len(i)), (np.r_[i, j], np.r_[j, i])), shape=(nv, nv)).tocsr()
    P = sp.diags(1.0 / g.degrees()) @ A
    free = np.ones(nv, dtype=bool)
    free[:nm] = False
    free[start] = True
    U = np.flatnonzero(free)
    M = sp.identity(len(U), format="csc") - P[U][:, U].tocsc()
    h = spla.spsolve(M, np.ones(len(U)))
    return float(h[np.searchsorted(U, start)])


def simulate_crossings(g: GraphApprox, m: int, starts: np.ndarray, gen: np.random.Generator, max_steps: int = 10**8):
    """Run one walker per entry of ``starts`` until it reaches V_m minus its start.

    Returns ``(steps, hit_vertex)`` arrays.
    """
    nbr = g.neighbor_table()
    width = nbr.shape[1]
    nm = n_vertices(m)
    starts = np.asarray(starts, dtype=np.int64)
    pos = starts.copy()
    steps = np.zeros(len(starts), dtype=np.int64)
    hits = np.full(len(starts), -1, dtype=np.int64)
    active = np.arange(len(starts))
    t = 0
    while active.size:
        t += 1
        if t > max_steps:
            raise RuntimeError("random walk exceeded the step cap")
        p = nbr[pos[active], gen.integers(0, width, active.size)]
        pos[active] = p
        done = (p < nm) & (p != starts[active])
        steps[active[done]] = t
        hits[active[done]] = p[done]
        active = active[~done]
    return steps, hits


def srw_crossing_stats(
    n: int,
    m: int,
    rng: RngSpec | int | None = None,
    n_runs: int = 10_000,
    start: int | None = None,
    block_size: int = 4096,
    workers: int = 1,
) -> SRWCrossingStats:
    """Monte Carlo and exact mean of the G_n step count between V_m visits.

    Each run starts at ``start`` or, by default, at a uniformly chosen vertex
    of V_m.  The exact mean is averaged over the same start distribution.
    """
    _check_levels(n, m)
    if n_runs < 2:
        raise ValueError("need at least two runs")
    g = build_graph(n)
    nm = n_vertices(m)
    spec = as_rng_spec(rng)
    n_blocks = -(-n_runs // block_size)

    def run(b):
        k = min(block_size, n_runs - b * block_size)
        gen = spec.spawn(b).generator()
        s = np.full(k, start) if start is not None else gen.integers(0, nm, k)
        return simulate_crossings(g, m, s, gen)[0]

    steps = np.concatenate(map_blocks(run, n_blocks, workers)).astype(float)
    if start is None:
        exact = float(np.mean([exact_crossing_mean(n, m, s) for s in range(nm)]))
    else:
        exact = exact_crossing_mean(n, m, start)
    return SRWCrossingStats(
        n=n,
        m=m,
        mean=float(steps.mean()),
        stderr=float(steps.std(ddof=1) / np.sqrt(len(steps))),
        exact_mean=exact,
        n_runs=int(n_runs),
    )
