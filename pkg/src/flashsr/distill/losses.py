"""Distillation objective pieces: MSE target loss, loss-weight ramp, LSGAN."""

from __future__ import annotations

import torch


def loss_distillation(z_hat_t0: torch.Tensor, z_t0: torch.Tensor) -> torch.Tensor:
    if z_hat_t0.shape != z_t0.shape:
        raise ValueError(f"shape mismatch {tuple(z_hat_t0.shape)} vs {tuple(z_t0.shape)}")
    return torch.mean((z_hat_t0 - z_t0) ** 2)


def lambda_schedule(step: int, lambda_adv_final: float, lambda_dmd_final: float,
                    ramp_period: int, ramp_end: int) -> tuple[float, float]:
    """Staircase from 0 to the final weights in equal increments.

    Weights bump every ``ramp_period`` steps and reach the finals exactly at
    ``ramp_end``; they are constant afterwards.
    """
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    if ramp_period < 1 or ramp_end % ramp_period:
        raise ValueError(f"ramp_end {ramp_end} must be a positive multiple of "
                         f"ramp_period {ramp_period}")
    n = ramp_end // ramp_period
    k = min(step // ramp_period, n)
    return lambda_adv_final * k / n, lambda_dmd_final * k / n


def lsgan_generator(d_fake: torch.Tensor) -> torch.Tensor:
    """mean((d(fake) - 1)^2); norms read as mean of squares."""
    return torch.mean((d_fake - 1.0) ** 2)


def lsgan_discriminator(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    """0.5 (mean(d(fake)^2) + mean((d(real) - 1)^2))."""
    return 0.5 * (torch.mean(d_fake ** 2) + torch.mean((d_real - 1.0) ** 2))
