from .schedule import (
    CosineSchedule,
    diffuse_forward,
    eps_from_v,
    score_from_eps,
    v_target,
    x0_from_v,
)
from .timesteps import TimestepDistribution, default_few_step, interval_prob, sample_timestep
from .sampler import cfg_combine, ddim_trajectory, ode_step, time_grid

__all__ = [
    "CosineSchedule", "diffuse_forward", "v_target", "x0_from_v", "eps_from_v",
    "score_from_eps",
    "TimestepDistribution", "default_few_step", "sample_timestep", "interval_prob",
    "cfg_combine", "ode_step", "time_grid", "ddim_trajectory",
]
