"""Deterministic DDIM stepping and classifier-free guidance combination."""

from __future__ import annotations

import numpy as np
import torch

from .schedule import CosineSchedule, _coef, eps_from_v, x0_from_v


def cfg_combine(v_cond, v_uncond, omega: float):
    """omega * v_cond + (1 - omega) * v_uncond; omega = 1 is conditional only."""
    if not np.isfinite(omega):
        raise ValueError(f"omega must be finite, got {omega}")
    return omega * v_cond + (1.0 - omega) * v_uncond


def ode_step(sched: CosineSchedule, z_t, v_hat, t_from: float, t_to: float):
    """One DDIM step t_from -> t_to (t_to < t_from) from a v prediction.

    Reconstructs (x0, eps) from v at t_from and re-composes the state at
    t_to; exact when v is the true posterior-mean prediction.
    """
    if not (0 <= t_to < t_from <= 1):
        raise ValueError(f"need 0 <= t_to < t_from <= 1, got t_from={t_from}, t_to={t_to}")
    x0 = x0_from_v(sched, z_t, v_hat, t_from)
    eps = eps_from_v(sched, z_t, v_hat, t_from)
    return _coef(sched.alpha(t_to), z_t) * x0 + _coef(sched.sigma(t_to), z_t) * eps


def time_grid(t_start: float, steps: int) -> np.ndarray:
    """Uniform grid from t_start down to 0 with ``steps`` steps (steps+1 knots)."""
    if not (0 < t_start <= 1):
        raise ValueError(f"t_start must be in (0, 1], got {t_start}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    return np.linspace(t_start, 0.0, steps + 1)


def ddim_trajectory(sched: CosineSchedule, v_fn, z_init, t_grid):
    """Run DDIM along a strictly decreasing grid ending at 0.

    ``v_fn(z, t) -> v`` is called once per step; the function holds no state
    and identical inputs give identical outputs.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise ValueError("t_grid must be 1-D with at least two knots")
    if np.any(np.diff(t_grid) >= 0):
        raise ValueError("t_grid must be strictly decreasing")
    if t_grid[-1] != 0.0:
        raise ValueError(f"t_grid must end at 0, ends at {t_grid[-1]}")
    z = z_init
    for i in range(t_grid.size - 1):
        t_from, t_to = float(t_grid[i]), float(t_grid[i + 1])
        v = v_fn(z, t_from)
        z = ode_step(sched, z, v, t_from, t_to)
    return z
