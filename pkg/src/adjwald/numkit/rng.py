"""Deterministic random-number streams with independent substreams.

A stream is addressed by ``(seed, stream_id)``.  Streams are backed by
numpy's PCG64 generator keyed through ``SeedSequence([seed, stream_id])``,
so the draws of one stream never depend on whether another stream was
consumed.  Parallel tasks (bootstrap replicates, simulation replicates)
each take their own ``stream_id``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass
class RngStream:
    """Single-owner random stream; do not share across concurrent tasks."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence([int(self.seed), int(self.stream_id)])
        self._gen = np.random.default_rng(ss)

    def substream(self, stream_id):
        """A fresh stream under the same seed with a different id."""
        return RngStream(self.seed, stream_id)

    @property
    def generator(self):
        return self._gen

    def draw_normal(self, mean=0.0, sd=1.0, size=None):
        if np.any(np.asarray(sd) < 0):
            raise DomainError("draw_normal requires sd >= 0")
        return self._gen.normal(mean, sd, size=size)

    def draw_gamma(self, shape, rate=1.0, size=None):
        if np.any(np.asarray(shape) <= 0) or np.any(np.asarray(rate) <= 0):
            raise DomainError("draw_gamma requires shape > 0 and rate > 0")
        return self._gen.gamma(shape, 1.0 / np.asarray(rate, dtype=float), size=size)

    def draw_beta(self, a, b, size=None):
        if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
            raise DomainError("draw_beta requires a > 0 and b > 0")
        return self._gen.beta(a, b, size=size)

    def draw_bernoulli(self, p, size=None):
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise DomainError("draw_bernoulli requires p in [0, 1]")
        return self._gen.binomial(1, p, size=size)

    def draw_binomial(self, n, p, size=None):
        p = np.asarray(p, dtype=float)
        if np.any(np.asarray(n) < 0) or np.any(p < 0) or np.any(p > 1):
            raise DomainError("draw_binomial requires n >= 0 and p in [0, 1]")
        return self._gen.binomial(n, p, size=size)
