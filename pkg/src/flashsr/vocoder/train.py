"""Vocoder training loop: LSGAN with mel and feature-matching terms.

Learning rates follow the closed form lr = base * decay^step, applied to the
optimizer param groups every step, so the schedule is exact regardless of
restarts.
"""

from __future__ import annotations

import os

import numpy as np
import torch

from ..checkpoint import module_to_arrays, save_checkpoint
from ..trainlog import TrainLogger
from .discriminators import MultiPeriodDiscriminator, MultiScaleCqtDiscriminator
from .generator import SrVocoder
from .losses import (
    MultiScaleMelLoss,
    adv_discriminator_loss,
    adv_generator_loss,
    feature_matching_loss,
)


def lr_at_step(base: float, decay: float, step: int) -> float:
    return base * decay ** step


def _set_lr(opt, lr: float) -> None:
    for g in opt.param_groups:
        g["lr"] = lr


def train_vocoder(batch_fn, voc: SrVocoder, mpd: MultiPeriodDiscriminator,
                  mcqt: MultiScaleCqtDiscriminator, mel_loss: MultiScaleMelLoss,
                  steps: int, batch_size: int, lr_gen: float, lr_disc: float,
                  lr_decay: float = 0.9999996, lambda_mel: float = 45.0,
                  lambda_fm: float = 2.0, seed: int = 0, out_dir=None,
                  ckpt_every: int = 0, log_path=None):
    """batch_fn(rng, n) -> (mel [n,F,T], lr_wave [n,1,hop*T], target [n,1,hop*T])."""
    if steps < 1 or batch_size < 1:
        raise ValueError("steps and batch_size must be >= 1")
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    opt_g = torch.optim.AdamW(voc.parameters(), lr=lr_gen, betas=(0.8, 0.99),
                              weight_decay=1e-4)
    opt_d = torch.optim.AdamW(list(mpd.parameters()) + list(mcqt.parameters()),
                              lr=lr_disc, betas=(0.8, 0.99), weight_decay=1e-4)
    logger = None
    if log_path:
        logger = TrainLogger(log_path, ["step", "loss_gen", "loss_disc", "loss_mel",
                                        "loss_fm", "loss_adv", "lr_gen", "wall_s"])
    history = []
    voc.train()
    for step in range(steps):
        _set_lr(opt_g, lr_at_step(lr_gen, lr_decay, step))
        _set_lr(opt_d, lr_at_step(lr_disc, lr_decay, step))
        mel, lr_wave, target = batch_fn(rng, batch_size)
        if mel.shape[0] == 0:
            raise ValueError("empty dataset")
        y_hat = voc(mel, lr_wave)

        # discriminators on detached fake
        sr_p, _ = mpd(target)
        sf_p, _ = mpd(y_hat.detach())
        sr_q, _ = mcqt(target)
        sf_q, _ = mcqt(y_hat.detach())
        loss_d = adv_discriminator_loss(sr_p + sr_q, sf_p + sf_q)
        opt_d.zero_grad()
        loss_d.backward()
        opt_d.step()

        # generator: adversarial + feature matching + mel
        sr_p, fr_p = mpd(target)
        sf_p, ff_p = mpd(y_hat)
        sr_q, fr_q = mcqt(target)
        sf_q, ff_q = mcqt(y_hat)
        l_adv = adv_generator_loss(sf_p + sf_q)
        l_fm = feature_matching_loss(fr_p + fr_q, ff_p + ff_q)
        l_mel = mel_loss(y_hat[:, 0], target[:, 0])
        loss_g = l_adv + lambda_fm * l_fm + lambda_mel * l_mel
        if not torch.isfinite(loss_g):
            raise RuntimeError(f"non-finite generator loss at step {step}")
        opt_g.zero_grad()
        loss_g.backward()
        opt_g.step()

        rec = {"step": step, "loss_gen": float(loss_g.detach()),
               "loss_disc": float(loss_d.detach()), "loss_mel": float(l_mel.detach()),
               "loss_fm": float(l_fm.detach()), "loss_adv": float(l_adv.detach()),
               "lr_gen": lr_at_step(lr_gen, lr_decay, step)}
        history.append(rec)
        if logger:
            logger.row(**rec)
        if out_dir and ckpt_every and (step + 1) % ckpt_every == 0:
            save_vocoder_checkpoint(voc, out_dir, step + 1)
    voc.eval()
    return history


def vocoder_config_dict(voc: SrVocoder) -> dict:
    return {
        "n_mels": voc.n_mels,
        "upsample_factors": list(voc.upsample_factors),
        "base_channels": voc.base_channels,
        "resblock_kernels": list(voc.resblock_kernels),
        "aa_taps": voc.aa_taps,
        "mel_offset": voc.mel_offset,
        "mel_scale": voc.mel_scale,
    }


def save_vocoder_checkpoint(voc: SrVocoder, out_dir, step: int) -> str:
    path = os.path.join(out_dir, f"vocoder-step{step:06d}.ckpt")
    save_checkpoint(path, "vocoder", vocoder_config_dict(voc), module_to_arrays(voc))
    return path


def vocoder_from_config_dict(cfg: dict) -> SrVocoder:
    return SrVocoder(cfg["n_mels"], tuple(cfg["upsample_factors"]), cfg["base_channels"],
                     tuple(cfg["resblock_kernels"]), cfg["aa_taps"],
                     cfg["mel_offset"], cfg["mel_scale"])
