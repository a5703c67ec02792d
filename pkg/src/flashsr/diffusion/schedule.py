"""Variance-preserving cosine noise schedule and v-parameterization algebra.

alpha(t) = cos(pi t / 2), sigma(t) = sin(pi t / 2) on t in [0, 1], so
alpha^2 + sigma^2 = 1 exactly at every t. All conversions below are pure
multiplications of the inputs by schedule coefficients and are defined at
both endpoints; only the score conversion divides by sigma and is undefined
at t = 0.

Functions accept numpy arrays or torch tensors; t may be a scalar or a
per-batch 1-D array that broadcasts over leading batch dims.
"""

from __future__ import annotations

import math

import numpy as np
import torch

from ..errors import UndefinedScoreError


class CosineSchedule:
    """cos/sin schedule; stateless, present so alternatives can slot in."""

    def alpha(self, t):
        return _cos_half_pi(t)

    def sigma(self, t):
        return _sin_half_pi(t)

    def __repr__(self):
        return "CosineSchedule()"


def _is_torch(x) -> bool:
    return isinstance(x, torch.Tensor)


def _cos_half_pi(t):
    if _is_torch(t):
        return torch.cos(t * (math.pi / 2))
    return np.cos(np.asarray(t, dtype=np.float64) * (math.pi / 2))


def _sin_half_pi(t):
    if _is_torch(t):
        return torch.sin(t * (math.pi / 2))
    return np.sin(np.asarray(t, dtype=np.float64) * (math.pi / 2))


def _check_t(t):
    if _is_torch(t):
        bad = torch.any(t < 0) or torch.any(t > 1)
    else:
        ta = np.asarray(t)
        bad = np.any(ta < 0) or np.any(ta > 1)
    if bad:
        raise ValueError(f"t must lie in [0, 1], got {t!r}")


def _coef(c, ref):
    """Reshape a per-batch coefficient so it broadcasts against ref."""
    if _is_torch(ref):
        c = torch.as_tensor(c, dtype=ref.dtype, device=ref.device)
        if c.ndim == 0:
            return c
        return c.reshape(c.shape[0], *([1] * (ref.ndim - 1)))
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 0:
        return c
    return c.reshape(c.shape[0], *([1] * (np.asarray(ref).ndim - 1)))


def _pair_check(a, b, name_a, name_b):
    sa = tuple(a.shape) if hasattr(a, "shape") else np.shape(a)
    sb = tuple(b.shape) if hasattr(b, "shape") else np.shape(b)
    if sa != sb:
        raise ValueError(f"{name_a} shape {sa} != {name_b} shape {sb}")


def diffuse_forward(sched: CosineSchedule, z0, t, eps):
    """z_t = alpha(t) z0 + sigma(t) eps."""
    _check_t(t)
    _pair_check(z0, eps, "z0", "eps")
    return _coef(sched.alpha(t), z0) * z0 + _coef(sched.sigma(t), z0) * eps


def v_target(sched: CosineSchedule, z0, eps, t):
    """v = alpha(t) eps - sigma(t) z0."""
    _check_t(t)
    _pair_check(z0, eps, "z0", "eps")
    return _coef(sched.alpha(t), z0) * eps - _coef(sched.sigma(t), z0) * z0


def x0_from_v(sched: CosineSchedule, z_t, v, t):
    """x0 = alpha(t) z_t - sigma(t) v; exact under the VP identity."""
    _check_t(t)
    _pair_check(z_t, v, "z_t", "v")
    return _coef(sched.alpha(t), z_t) * z_t - _coef(sched.sigma(t), z_t) * v


def eps_from_v(sched: CosineSchedule, z_t, v, t):
    """eps = sigma(t) z_t + alpha(t) v; multiplication only, safe at t = 1."""
    _check_t(t)
    _pair_check(z_t, v, "z_t", "v")
    return _coef(sched.sigma(t), z_t) * z_t + _coef(sched.alpha(t), z_t) * v


def score_from_eps(sched: CosineSchedule, eps, t):
    """score = -eps / sigma(t); undefined where sigma(t) == 0."""
    _check_t(t)
    sig = sched.sigma(t)
    tiny = 1e-12
    if _is_torch(sig) and isinstance(sig, torch.Tensor):
        zero = bool(torch.any(torch.abs(sig) < tiny))
    else:
        zero = bool(np.any(np.abs(np.asarray(sig)) < tiny))
    if zero:
        raise UndefinedScoreError(f"score undefined at t={t!r} where sigma(t)=0")
    return -eps / _coef(sig, eps)
