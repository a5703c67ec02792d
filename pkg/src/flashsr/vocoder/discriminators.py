"""Waveform discriminators: multi-period and sub-band CQT.

Every sub-discriminator returns (score_map, feature_list); the multi heads
return parallel lists. Plain convolutions with LeakyReLU; least-squares GAN
objectives live in losses.py.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .cqt import CqtTransform


class PeriodDiscriminator(nn.Module):
    def __init__(self, period: int, widths=(16, 32, 64, 64)):
        super().__init__()
        self.period = period
        convs = []
        c_in = 1
        for w in widths:
            convs.append(nn.Conv2d(c_in, w, (5, 1), stride=(3, 1), padding=(2, 0)))
            c_in = w
        self.convs = nn.ModuleList(convs)
        self.post = nn.Conv2d(c_in, 1, (3, 1), padding=(1, 0))

    def forward(self, x: torch.Tensor):
        b, c, l = x.shape
        if l % self.period:
            pad = self.period - l % self.period
            x = F.pad(x, (0, pad), mode="reflect")
            l = l + pad
        x = x.view(b, c, l // self.period, self.period)
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), 0.1)
            feats.append(x)
        score = self.post(x)
        return score, feats


class MultiPeriodDiscriminator(nn.Module):
    def __init__(self, periods=(2, 3, 5, 7, 11)):
        super().__init__()
        self.subs = nn.ModuleList([PeriodDiscriminator(p) for p in periods])

    def forward(self, x: torch.Tensor):
        scores, feats = [], []
        for sub in self.subs:
            s, f = sub(x)
            scores.append(s)
            feats.append(f)
        return scores, feats


class SubBandBlock(nn.Module):
    def __init__(self, width: int = 32):
        super().__init__()
        self.convs = nn.ModuleList([
            nn.Conv2d(2, width, (3, 9), padding=(1, 4)),
            nn.Conv2d(width, width, (3, 9), stride=(1, 2), padding=(1, 4)),
            nn.Conv2d(width, width, (3, 9), stride=(1, 2), padding=(1, 4)),
        ])
        self.post = nn.Conv2d(width, 1, (3, 3), padding=(1, 1))

    def forward(self, x: torch.Tensor):
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), 0.1)
            feats.append(x)
        return self.post(x), feats


class CqtSubBandDiscriminator(nn.Module):
    """Fixed CQT front end, learnable conv stack per octave-band group."""

    def __init__(self, sample_rate: int, fmin: float = 80.0, bins_per_octave: int = 12,
                 n_octaves: int = 6, hop: int = 256, n_bands: int = 3, width: int = 32):
        super().__init__()
        self.cqt = CqtTransform(sample_rate, fmin, bins_per_octave, n_octaves, hop)
        n_bins = self.cqt.n_bins
        if n_bins % n_bands:
            raise ValueError(f"{n_bins} CQT bins not divisible into {n_bands} bands")
        self.n_bands = n_bands
        self.band_size = n_bins // n_bands
        self.bands = nn.ModuleList([SubBandBlock(width) for _ in range(n_bands)])

    def forward(self, x: torch.Tensor):
        spec = self.cqt(x)  # [B, 2, bins, frames]
        scores, feats = [], []
        for i, band in enumerate(self.bands):
            lo = i * self.band_size
            s, f = band(spec[:, :, lo: lo + self.band_size])
            scores.append(s)
            feats.append(f)
        return scores, feats


class MultiScaleCqtDiscriminator(nn.Module):
    """One CQT discriminator per time scale (scale k = avg-pool by k)."""

    def __init__(self, sample_rate: int, scales=(1,), **kw):
        super().__init__()
        self.scales = tuple(int(s) for s in scales)
        self.subs = nn.ModuleList([
            CqtSubBandDiscriminator(sample_rate // s, **kw) for s in self.scales
        ])

    def forward(self, x: torch.Tensor):
        scores, feats = [], []
        for s, sub in zip(self.scales, self.subs):
            xs = x if s == 1 else F.avg_pool1d(x, s, stride=s)
            sc, ft = sub(xs)
            scores.extend(sc)
            feats.extend(ft)
        return scores, feats
