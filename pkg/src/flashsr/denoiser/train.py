"""Teacher training: v-prediction regression with condition dropout."""

from __future__ import annotations

import numpy as np
import torch

from ..checkpoint import module_to_arrays, save_checkpoint
from ..diffusion.schedule import CosineSchedule, diffuse_forward, v_target
from ..trainlog import TrainLogger
from .model import VPredictor


def train_teacher(batch_fn, model: VPredictor, sched: CosineSchedule, steps: int,
                  batch_size: int, lr: float, cond_dropout: float = 0.1,
                  seed: int = 0, out_dir=None, ckpt_every: int = 0,
                  log_path=None):
    """Minimize E||v_hat - v||^2 over t ~ U(0,1); returns per-step losses.

    ``batch_fn(rng, n)`` must yield (z0, cond) float32 tensors of shape
    [n, C, H, W]. Condition rows are replaced by the learned null latent
    with probability ``cond_dropout`` so CFG has an unconditional pathway.
    """
    if steps < 1 or batch_size < 1:
        raise ValueError("steps and batch_size must be >= 1")
    if not (0.0 <= cond_dropout <= 1.0):
        raise ValueError(f"cond_dropout must be in [0, 1], got {cond_dropout}")
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    opt = torch.optim.AdamW(model.parameters(), lr=lr, weight_decay=1e-4)
    logger = TrainLogger(log_path, ["step", "loss", "wall_s"]) if log_path else None

    history = []
    model.train()
    for step in range(steps):
        z0, cond = batch_fn(rng, batch_size)
        if z0.shape[0] == 0:
            raise ValueError("empty dataset")
        b = z0.shape[0]
        t = torch.from_numpy(rng.uniform(0.0, 1.0, size=b)).float()
        eps = torch.from_numpy(rng.standard_normal(tuple(z0.shape)).astype(np.float32))
        z_t = diffuse_forward(sched, z0, t, eps)
        tgt = v_target(sched, z0, eps, t)
        drop = torch.from_numpy(rng.uniform(size=b) < cond_dropout)
        null = model.null_latent(b, z0.shape[2], z0.shape[3])
        cond_in = torch.where(drop[:, None, None, None], null, cond)
        v_hat = model(z_t, t, cond_in)
        loss = torch.mean((v_hat - tgt) ** 2)
        opt.zero_grad()
        loss.backward()
        opt.step()
        history.append(float(loss.detach()))
        if logger:
            logger.row(step=step, loss=history[-1])
        if out_dir and ckpt_every and (step + 1) % ckpt_every == 0:
            save_teacher_checkpoint(model, out_dir, step + 1)
    model.eval()
    return history


def teacher_config_dict(model: VPredictor) -> dict:
    return {
        "latent_channels": model.latent_channels,
        "widths": list(model.widths),
        "time_dim": model.time_dim,
        "attn_heads": model.attn_heads,
        "groups": model.groups,
        "conditional": model.conditional,
    }


def save_teacher_checkpoint(model: VPredictor, out_dir, step: int) -> str:
    import os
    path = os.path.join(out_dir, f"teacher-step{step:06d}.ckpt")
    save_checkpoint(path, "denoiser", teacher_config_dict(model), module_to_arrays(model))
    return path


def teacher_from_config_dict(cfg: dict) -> VPredictor:
    return VPredictor(cfg["latent_channels"], tuple(cfg["widths"]), cfg["time_dim"],
                      cfg.get("attn_heads", 4), cfg.get("groups", 8),
                      cfg["conditional"])
