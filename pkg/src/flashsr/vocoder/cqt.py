"""Constant-Q transform as a fixed conv bank (real + imaginary channels).

Kernels are Hann-windowed complex exponentials with constant Q; they live in
buffers, so the transform is differentiable with respect to its input but has
no trainable parameters. Bins whose bandwidth would cross Nyquist are
rejected at construction.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn


def cqt_frequencies(fmin: float, bins_per_octave: int, n_bins: int) -> np.ndarray:
    return fmin * 2.0 ** (np.arange(n_bins) / bins_per_octave)


def cqt_kernel_bank(sample_rate: int, fmin: float, bins_per_octave: int, n_bins: int):
    """Complex kernels [n_bins x K] (zero-padded to the longest), plus freqs."""
    if fmin <= 0 or n_bins < 1 or bins_per_octave < 1:
        raise ValueError("fmin, n_bins, bins_per_octave must be positive")
    freqs = cqt_frequencies(fmin, bins_per_octave, n_bins)
    q = 1.0 / (2.0 ** (1.0 / bins_per_octave) - 1.0)
    if freqs[-1] * (1.0 + 0.5 / q) >= sample_rate / 2.0:
        raise ValueError(
            f"top CQT bin {freqs[-1]:.1f} Hz too close to Nyquist {sample_rate / 2} Hz"
        )
    lengths = np.ceil(q * sample_rate / freqs).astype(int)
    k_max = int(lengths[0])
    bank = np.zeros((n_bins, k_max), dtype=np.complex128)
    for i, (f, n) in enumerate(zip(freqs, lengths)):
        t = np.arange(n) - (n - 1) / 2.0
        win = np.hanning(n)
        kern = win * np.exp(2j * np.pi * f * t / sample_rate) / n
        start = (k_max - n) // 2
        bank[i, start: start + n] = kern
    return bank, freqs


class CqtTransform(nn.Module):
    def __init__(self, sample_rate: int, fmin: float = 80.0, bins_per_octave: int = 12,
                 n_octaves: int = 6, hop: int = 256):
        super().__init__()
        n_bins = bins_per_octave * n_octaves
        bank, freqs = cqt_kernel_bank(sample_rate, fmin, bins_per_octave, n_bins)
        self.n_bins = n_bins
        self.hop = hop
        self.freqs = freqs
        w = np.concatenate([bank.real, bank.imag], axis=0)[:, None, :]
        self.register_buffer("weight", torch.from_numpy(w.astype(np.float32)))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """x: [B, 1, L] -> [B, 2, n_bins, frames] (real, imag planes)."""
        k = self.weight.shape[-1]
        y = F.conv1d(x, self.weight, stride=self.hop, padding=k // 2)
        b = x.shape[0]
        return y.view(b, 2, self.n_bins, -1)


def cqt_magnitude(t: CqtTransform, x: torch.Tensor) -> torch.Tensor:
    y = t(x)
    return torch.sqrt(y[:, 0] ** 2 + y[:, 1] ** 2 + 1e-12)
