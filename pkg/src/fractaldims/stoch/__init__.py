"""Stochastic simulation: Brownian motion, fBM, random walks, crossing times."""

from .brownian import CensoringError, ExitTimeEstimate, bm_exit_time_mc
from .crossing import CrossingTimes, crossing_leg, crossing_times, graph_exit_expectation
from .fbm import PathSample, fbm_covariance, fgn_autocovariance, iter_fbm_blocks, sample_fbm, sample_fbm_paths
from .rng import RngSpec, as_rng_spec
from .srw import SRWCrossingStats, exact_crossing_mean, simulate_crossings, srw_crossing_stats

__all__ = [
    "CensoringError",
    "CrossingTimes",
    "ExitTimeEstimate",
    "PathSample",
    "RngSpec",
    "SRWCrossingStats",
    "as_rng_spec",
    "bm_exit_time_mc",
    "crossing_leg",
    "crossing_times",
    "exact_crossing_mean",
    "fbm_covariance",
    "fgn_autocovariance",
    "graph_exit_expectation",
    "iter_fbm_blocks",
    "sample_fbm",
    "sample_fbm_paths",
    "simulate_crossings",
    "srw_crossing_stats",
]
