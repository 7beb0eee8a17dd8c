"""Zipf-Mandelbrot content popularity."""

import bisect
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class Workload:
    """Catalog of ``n_objects`` equally sized objects with P(k) proportional to (k + q)^-s."""

    n_objects: int = 100
    q: float = 1.0
    s: float = 2.0
    object_bytes: int = 3_000_000

    def __post_init__(self):
        if self.n_objects < 1:
            raise ConfigError("catalog must hold at least one object")
        if self.object_bytes < 1:
            raise ConfigError("object_bytes must be positive")

    @cached_property
    def pmf(self):
        ranks = np.arange(1, self.n_objects + 1, dtype=float)
        w = (ranks + self.q) ** -self.s
        return w / w.sum()

    @cached_property
    def cdf(self):
        c = np.cumsum(self.pmf)
        c[-1] = 1.0
        return c

    @cached_property
    def _cdf_list(self):
        return self.cdf.tolist()


def sample_popularity(workload, rng, size=None):
    """Rank(s) in 1..N by inverse-CDF sampling from a DeterministicRNG."""
    if size is None:
        return min(bisect.bisect_right(workload._cdf_list, rng.random()), workload.n_objects - 1) + 1
    gen = np.random.default_rng(rng.getrandbits(128))
    idx = np.searchsorted(workload.cdf, gen.random(size), side="right")
    return np.minimum(idx, workload.n_objects - 1) + 1
