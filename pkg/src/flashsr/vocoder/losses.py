"""Vocoder losses: multi-scale mel L1, feature matching, LSGAN heads.

TorchMel reproduces the numpy mel frontend bit-for-near (same framing, same
filterbank, same floor) so loss values can be checked against it directly.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..dsp.spectral import MelConfig, mel_filterbank
from scipy.signal import get_window


class TorchMel(nn.Module):
    """Differentiable log-mel matching dsp.mel_spectrogram's conventions."""

    def __init__(self, cfg: MelConfig):
        super().__init__()
        self.cfg = cfg
        self.register_buffer(
            "window",
            torch.from_numpy(get_window("hann", cfg.window_size, fftbins=True)).float(),
        )
        self.register_buffer(
            "fb", torch.from_numpy(mel_filterbank(cfg)).float()
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """x: [B, L] or [B, 1, L] -> log-mel [B, n_mels, T]."""
        if x.ndim == 3:
            x = x[:, 0]
        cfg = self.cfg
        t = x.shape[-1] // cfg.hop_size
        if t < 1:
            raise ValueError(f"clip shorter than one hop ({cfg.hop_size})")
        xp = torch.nn.functional.pad(x, (0, cfg.window_size))
        frames = xp.unfold(-1, cfg.window_size, cfg.hop_size)[:, :t]
        spec = torch.fft.rfft(frames * self.window, dim=-1)
        mag = torch.sqrt(spec.real ** 2 + spec.imag ** 2 + 1e-24)
        mel = torch.matmul(self.fb, mag.transpose(1, 2))
        return torch.log(torch.clamp(mel, min=cfg.log_floor))


class MultiScaleMelLoss(nn.Module):
    """Mean of L1 log-mel distances over a set of window resolutions."""

    def __init__(self, sample_rate: int, windows, base_n_mels: int, log_floor: float = 1e-5):
        super().__init__()
        if len(windows) == 0:
            raise ValueError("need at least one resolution")
        mels = []
        for w in windows:
            n_mels = min(base_n_mels, w // 8)
            mels.append(TorchMel(MelConfig(sample_rate=sample_rate, window_size=int(w),
                                           hop_size=int(w) // 4, n_mels=n_mels,
                                           log_floor=log_floor)))
        self.mels = nn.ModuleList(mels)

    def forward(self, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")
        total = 0.0
        for mel in self.mels:
            total = total + torch.mean(torch.abs(mel(a) - mel(b)))
        return total / len(self.mels)


def feature_matching_loss(real_feats, fake_feats) -> torch.Tensor:
    """Mean L1 over all intermediate feature maps of all sub-discriminators."""
    terms = []
    for rf, ff in zip(real_feats, fake_feats):
        for r, f in zip(rf, ff):
            terms.append(torch.mean(torch.abs(r.detach() - f)))
    if not terms:
        raise ValueError("no features to match")
    return torch.stack(terms).mean()


def adv_generator_loss(fake_scores) -> torch.Tensor:
    return torch.stack([torch.mean((s - 1.0) ** 2) for s in fake_scores]).mean()


def adv_discriminator_loss(real_scores, fake_scores) -> torch.Tensor:
    terms = [
        0.5 * (torch.mean((r - 1.0) ** 2) + torch.mean(f ** 2))
        for r, f in zip(real_scores, fake_scores)
    ]
    return torch.stack(terms).mean()


def msmel_loss(a: np.ndarray, b: np.ndarray, sample_rate: int, windows,
               base_n_mels: int) -> float:
    """Numpy convenience wrapper over MultiScaleMelLoss."""
    loss = MultiScaleMelLoss(sample_rate, windows, base_n_mels)
    with torch.no_grad():
        va = torch.from_numpy(np.asarray(a, dtype=np.float64)).float()[None]
        vb = torch.from_numpy(np.asarray(b, dtype=np.float64)).float()[None]
        return float(loss(va, vb))
