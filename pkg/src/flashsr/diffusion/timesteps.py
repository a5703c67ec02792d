"""Gaussian-mixture timestep distribution pi(t) on [0, 1] with edge clipping.

Distillation draws its starting timesteps from a few-mode mixture rather than
uniformly; samples outside [0, 1] are clipped, so the edge points carry the
clipped tail mass as atoms. ``interval_prob`` accounts for that, which keeps
goodness-of-fit tests honest.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class TimestepDistribution:
    centers: tuple
    stds: tuple
    weights: tuple

    def __post_init__(self):
        c, s, w = (tuple(float(x) for x in v) for v in (self.centers, self.stds, self.weights))
        if not (len(c) == len(s) == len(w)) or len(c) == 0:
            raise ValueError("centers, stds, weights must be equal-length and non-empty")
        if any(x < 0 for x in s):
            raise ValueError("stds must be non-negative")
        if any(x < 0 for x in w) or not math.isclose(sum(w), 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError(f"weights must be non-negative and sum to 1, got sum {sum(w)}")
        if any(not (0 <= x <= 1) for x in c):
            raise ValueError("centers must lie in [0, 1]")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "stds", s)
        object.__setattr__(self, "weights", w)


def default_few_step() -> TimestepDistribution:
    """Four equal modes at 0.25/0.5/0.75/1.0, std 0.1."""
    return TimestepDistribution(
        centers=(0.25, 0.5, 0.75, 1.0),
        stds=(0.1, 0.1, 0.1, 0.1),
        weights=(0.25, 0.25, 0.25, 0.25),
    )


def sample_timestep(dist: TimestepDistribution, rng: np.random.Generator, size=None):
    """Draw t ~ pi: pick a mode by weight, add Gaussian jitter, clip to [0, 1]."""
    n = 1 if size is None else int(size)
    if n < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    modes = rng.choice(len(dist.centers), size=n, p=np.asarray(dist.weights))
    c = np.asarray(dist.centers)[modes]
    s = np.asarray(dist.stds)[modes]
    t = np.clip(c + s * rng.standard_normal(n), 0.0, 1.0)
    return float(t[0]) if size is None else t


def _phi(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def interval_prob(dist: TimestepDistribution, lo: float, hi: float) -> float:
    """P(t in [lo, hi]) after clipping; lo == 0 / hi == 1 absorb the tails."""
    if not (0 <= lo < hi <= 1):
        raise ValueError(f"need 0 <= lo < hi <= 1, got [{lo}, {hi}]")
    p = 0.0
    for c, s, w in zip(dist.centers, dist.stds, dist.weights):
        if s == 0.0:
            p += w * (1.0 if lo <= c <= hi else 0.0)
            continue
        a = _phi((lo - c) / s)
        b = _phi((hi - c) / s)
        if lo == 0.0:
            a = 0.0
        if hi == 1.0:
            b = 1.0
        p += w * (b - a)
    return p
