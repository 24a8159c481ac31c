"""Reproducible random streams."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngSpec:
    """``(seed, stream)`` plus an optional key path naming a sub-stream.

    Two specs with equal fields produce bit-identical generators.
    """

    seed: int = 0
    stream: int = 0
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if int(self.stream) < 0 or any(int(k) < 0 for k in self.key):
            raise ValueError("stream and key entries must be nonnegative")
        object.__setattr__(self, "key", tuple(int(k) for k in self.key))

    def spawn(self, *key: int) -> "RngSpec":
        return RngSpec(self.seed, self.stream, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),) + self.key)
        return np.random.Generator(np.random.PCG64(ss))


def as_rng_spec(rng) -> RngSpec:
    if isinstance(rng, RngSpec):
        return rng
    if rng is None:
        return RngSpec()
    return RngSpec(seed=int(rng))


def map_blocks(fn, n_blocks: int, workers: int = 1) -> list:
    """``[fn(b) for b in range(n_blocks)]``, optionally on a thread pool.

    Results come back in block order, so reductions over them do not depend
    on ``workers``.
    """
    if workers <= 1 or n_blocks <= 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_blocks)))
