"""Waveform generator conditioned on mel frames and the low-res waveform.

The synthesis stack is a chain of transposed-conv upsampling stages, each
followed by residual blocks built on an anti-aliased periodic activation
(2x upsample, snake, filtered 2x downsample). A parallel encoder runs the
low-resolution waveform through strided 1-D convolutions whose stage shapes
mirror the generator's; its features are added to the generator features
right after each upsampling, before the residual blocks.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from scipy.signal import firwin
from torch import nn

from ..dsp.io import Waveform
from ..dsp.spectral import MelSpectrogram


def _up_kernel(u: int) -> tuple[int, int]:
    # transposed conv sizes giving exact x u length
    k = 2 * u + (u % 2)
    p = (k - u) // 2
    return k, p


class Snake(nn.Module):
    """x + sin^2(alpha x)/alpha with per-channel alpha stored in log space."""

    def __init__(self, channels: int):
        super().__init__()
        self.log_alpha = nn.Parameter(torch.zeros(1, channels, 1))

    def forward(self, x):
        alpha = torch.exp(self.log_alpha)
        return x + torch.sin(alpha * x) ** 2 / (alpha + 1e-9)


class AntiAliasedSnake(nn.Module):
    """Upsample 2x, apply snake, low-pass and decimate back down."""

    def __init__(self, channels: int, taps: int = 12):
        super().__init__()
        self.snake = Snake(channels)
        self.taps = taps
        filt = torch.from_numpy(firwin(taps, 0.5, window=("kaiser", 6.0)).astype(np.float32))
        self.register_buffer("filt", filt)

    def forward(self, x):
        b, c, l = x.shape
        w = self.filt[None, None].expand(c, 1, self.taps)
        up = F.conv_transpose1d(x, 2.0 * w, stride=2, groups=c)
        crop = (self.taps - 2) // 2
        up = up[:, :, crop: crop + 2 * l]
        y = self.snake(up)
        return F.conv1d(y, w, stride=2, padding=(self.taps - 2) // 2, groups=c)


class AmpBlock(nn.Module):
    def __init__(self, channels: int, kernel: int, dilations=(1, 3), taps: int = 12):
        super().__init__()
        self.convs = nn.ModuleList([
            nn.Conv1d(channels, channels, kernel, dilation=d,
                      padding=(kernel - 1) * d // 2)
            for d in dilations
        ])
        self.acts = nn.ModuleList([AntiAliasedSnake(channels, taps) for _ in dilations])

    def forward(self, x):
        for conv, act in zip(self.convs, self.acts):
            x = x + conv(act(x))
        return x


class LrEncoder(nn.Module):
    """Strided 1-D conv chain over the lr waveform, one feature per stage."""

    def __init__(self, upsample_factors, stage_channels):
        super().__init__()
        self.n = len(upsample_factors)
        self.conv_in = nn.Conv1d(1, stage_channels[-1], 15, padding=7)
        downs = []
        for i in range(self.n - 1, 0, -1):
            s = upsample_factors[i]
            k = 2 * s + (s % 2)
            downs.append(nn.Conv1d(stage_channels[i], stage_channels[i - 1], k,
                                   stride=s, padding=(k - s) // 2))
        self.downs = nn.ModuleList(downs)

    def forward(self, lr: torch.Tensor):
        feats = [None] * self.n
        h = self.conv_in(lr)
        feats[self.n - 1] = h
        for idx, conv in enumerate(self.downs):
            h = conv(F.leaky_relu(h, 0.1))
            feats[self.n - 2 - idx] = h
        return feats


class SrVocoder(nn.Module):
    def __init__(self, n_mels: int, upsample_factors=(5, 4, 4, 2), base_channels: int = 96,
                 resblock_kernels=(3, 7), aa_taps: int = 12,
                 mel_offset: float = -6.0, mel_scale: float = 3.0):
        super().__init__()
        self.n_mels = n_mels
        self.upsample_factors = tuple(int(u) for u in upsample_factors)
        self.base_channels = base_channels
        self.resblock_kernels = tuple(resblock_kernels)
        self.aa_taps = aa_taps
        self.hop = int(np.prod(self.upsample_factors))
        self.mel_offset = float(mel_offset)
        self.mel_scale = float(mel_scale)

        n = len(self.upsample_factors)
        stage_channels = [max(4, base_channels // (2 ** (i + 1))) for i in range(n)]
        self.stage_channels = stage_channels
        self.conv_pre = nn.Conv1d(n_mels, base_channels, 7, padding=3)
        ups, blocks = [], []
        c_in = base_channels
        for i, u in enumerate(self.upsample_factors):
            k, p = _up_kernel(u)
            ups.append(nn.ConvTranspose1d(c_in, stage_channels[i], k, stride=u, padding=p))
            blocks.append(nn.ModuleList([
                AmpBlock(stage_channels[i], kk, taps=aa_taps) for kk in self.resblock_kernels
            ]))
            c_in = stage_channels[i]
        self.ups = nn.ModuleList(ups)
        self.blocks = nn.ModuleList(blocks)
        self.act_post = Snake(stage_channels[-1])
        self.conv_post = nn.Conv1d(stage_channels[-1], 1, 7, padding=3)
        self.lr_encoder = LrEncoder(self.upsample_factors, stage_channels)

    def lr_encode(self, lr: torch.Tensor):
        return self.lr_encoder(lr)

    def synthesize(self, mel: torch.Tensor, lr_feats=None) -> torch.Tensor:
        """mel: [B, F, T] log-domain; lr_feats: per-stage list or None."""
        x = self.conv_pre((mel - self.mel_offset) / self.mel_scale)
        for i in range(len(self.ups)):
            x = self.ups[i](x)
            if lr_feats is not None and lr_feats[i] is not None:
                if lr_feats[i].shape != x.shape:
                    raise ValueError(
                        f"stage {i} lr feature shape {tuple(lr_feats[i].shape)} "
                        f"!= generator {tuple(x.shape)}"
                    )
                x = x + lr_feats[i]
            acc = None
            for block in self.blocks[i]:
                y = block(x)
                acc = y if acc is None else acc + y
            x = acc / len(self.blocks[i])
        return torch.tanh(self.conv_post(self.act_post(x)))

    def forward(self, mel: torch.Tensor, lr: torch.Tensor | None = None) -> torch.Tensor:
        feats = None
        if lr is not None:
            want = mel.shape[-1] * self.hop
            if lr.shape[-1] != want:
                raise ValueError(f"lr length {lr.shape[-1]} != hop*T = {want}")
            feats = self.lr_encode(lr)
        return self.synthesize(mel, feats)


def generate_waveform(voc: SrVocoder, mel: MelSpectrogram, lr: Waveform) -> Waveform:
    """Numpy surface: one clip in, one clip out at the mel config's rate."""
    if lr.sample_rate != mel.config.sample_rate:
        raise ValueError(
            f"lr rate {lr.sample_rate} != target rate {mel.config.sample_rate}"
        )
    want = mel.n_frames * voc.hop
    if len(lr) != want:
        raise ValueError(f"lr length {len(lr)} != hop*T = {want}")
    if mel.config.n_mels != voc.n_mels:
        raise ValueError(f"mel bins {mel.config.n_mels} != vocoder bins {voc.n_mels}")
    m = torch.from_numpy(mel.values).float()[None]
    x = torch.from_numpy(lr.samples).float()[None, None]
    with torch.no_grad():
        y = voc(m, x)
    return Waveform(y[0, 0].numpy().astype(np.float64), mel.config.sample_rate)
