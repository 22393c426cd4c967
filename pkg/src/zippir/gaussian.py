"""Discrete Gaussian sampler over the integers.

Table-based inverse CDF restricted to [-6*sigma, 6*sigma], with cumulative
weights in 64-bit fixed point. Tail mass beyond six standard deviations is
below 2^-26 and is folded into the extreme table entries.
"""

import math
import secrets

import numpy as np


class DiscreteGaussian:
    def __init__(self, sigma: float):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.sigma = sigma
        if sigma == 0:
            self.support = np.array([0], dtype=np.int64)
            self.cdf = np.array([2**64 - 1], dtype=np.uint64)
            return
        tail = int(math.ceil(6 * sigma))
        xs = np.arange(-tail, tail + 1, dtype=np.int64)
        w = np.exp(-(xs.astype(np.float64) ** 2) / (2 * sigma * sigma))
        cum = np.cumsum(w / w.sum())
        # clip below 2^64 while still a float (2^64 - 1 is not representable)
        fixed = np.minimum(np.floor(cum * 2.0 ** 64),
                           np.nextafter(2.0 ** 64, 0)).astype(np.uint64)
        fixed[-1] = np.uint64(2**64 - 1)
        self.support = xs
        self.cdf = fixed

    def sample(self, rng=None) -> int:
        rng = rng or secrets.SystemRandom()
        u = rng.randrange(1 << 64)
        i = int(np.searchsorted(self.cdf, np.uint64(u), side="right"))
        i = min(i, len(self.support) - 1)
        return int(self.support[i])

    def sample_vector(self, count: int, rng=None) -> np.ndarray:
        rng = rng or secrets.SystemRandom()
        us = np.array([rng.randrange(1 << 64) for _ in range(count)], dtype=np.uint64)
        idx = np.searchsorted(self.cdf, us, side="right")
        idx = np.minimum(idx, len(self.support) - 1)
        return self.support[idx]
