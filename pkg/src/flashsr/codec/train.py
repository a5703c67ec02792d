"""Codec training: L1 reconstruction plus beta-weighted KL."""

from __future__ import annotations

import numpy as np
import torch

from ..checkpoint import module_to_arrays, save_checkpoint
from ..dsp.spectral import MelSpectrogram
from .model import MelCodec


def _stack_batch(codec: MelCodec, mels, idx) -> torch.Tensor:
    xs = []
    for i in idx:
        x, _ = codec._prep_frames(mels[i].values)
        xs.append(x)
    return torch.cat(xs, dim=0)


def kl_term(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    return -0.5 * torch.mean(1 + logvar - mu.pow(2) - logvar.exp())


def train_codec(mels, codec: MelCodec, epochs: int, batch_size: int, lr: float,
                kl_weight: float, seed: int = 0, out_dir=None, log_cb=None):
    """Train in place; returns per-epoch mean total loss.

    All clips must share the codec's mel config and frame count (they are
    stacked into dense batches). After the last epoch ``latent_scale`` is
    refit so encoded training latents have unit standard deviation.
    """
    if len(mels) == 0:
        raise ValueError("empty dataset")
    for m in mels:
        if not isinstance(m, MelSpectrogram) or m.config != codec.mel_cfg:
            raise ValueError("dataset mel configs must match the codec's")
    if epochs < 1 or batch_size < 1:
        raise ValueError("epochs and batch_size must be >= 1")

    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    opt = torch.optim.AdamW(codec.parameters(), lr=lr, weight_decay=1e-4)
    history = []
    codec.train()
    for epoch in range(epochs):
        order = rng.permutation(len(mels))
        losses = []
        for start in range(0, len(order), batch_size):
            idx = order[start: start + batch_size]
            x = _stack_batch(codec, mels, idx)
            recon, mu, logvar = codec(x)
            loss = torch.mean(torch.abs(recon - x)) + kl_weight * kl_term(mu, logvar)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(float(loss.detach()))
        history.append(float(np.mean(losses)))
        if log_cb is not None:
            log_cb(epoch, history[-1])
        if out_dir is not None:
            save_epoch_checkpoint(codec, out_dir, epoch)
    codec.eval()
    fit_latent_scale(codec, mels)
    return history


def fit_latent_scale(codec: MelCodec, mels) -> float:
    """Set latent_scale = 1/std of raw posterior means over the dataset."""
    with torch.no_grad():
        codec.latent_scale.fill_(1.0)
        zs = []
        for m in mels:
            x, _ = codec._prep_frames(m.values)
            mu, _ = codec.encode_raw(x)
            zs.append(mu.reshape(-1))
        std = float(torch.cat(zs).std())
        codec.latent_scale.fill_(1.0 / max(std, 1e-6))
    return std


def codec_config_dict(codec: MelCodec) -> dict:
    mc = codec.mel_cfg
    return {
        "channels": codec.channels,
        "compression": codec.compression,
        "base_width": codec.base_width,
        "mel_offset": codec.mel_offset,
        "mel_scale": codec.mel_scale,
        "mel": {
            "sample_rate": mc.sample_rate, "window_size": mc.window_size,
            "hop_size": mc.hop_size, "n_mels": mc.n_mels,
            "fmin_hz": mc.fmin_hz, "fmax_hz": mc.fmax_hz, "log_floor": mc.log_floor,
        },
    }


def save_epoch_checkpoint(codec: MelCodec, out_dir, epoch: int) -> str:
    import os
    path = os.path.join(out_dir, f"codec-epoch{epoch:04d}.ckpt")
    save_checkpoint(path, "codec", codec_config_dict(codec), module_to_arrays(codec))
    return path


def codec_from_config_dict(cfg: dict) -> MelCodec:
    from ..dsp.spectral import MelConfig
    mel = MelConfig(**cfg["mel"])
    return MelCodec(cfg["channels"], cfg["compression"], cfg["base_width"], mel,
                    cfg["mel_offset"], cfg["mel_scale"])
