"""Convolutional VAE compressing log-mel spectrograms to latent grids.

Latents are laid out [C x T/r x F/r] (time rows, frequency columns). The
compression factor r must be a power of two; log2(r) strided stages each
halve both axes. Frequency must divide by r exactly; time frames are
reflect-padded up to a multiple of r on encode and cropped back on decode.

Mel values are affinely normalized before the encoder and denormalized after
the decoder; a scalar ``latent_scale`` buffer (fit after training) brings
encoded latents to roughly unit variance for the diffusion stage.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import torch
from torch import nn

from ..dsp.spectral import MelConfig, MelSpectrogram


@dataclasses.dataclass(frozen=True)
class LatentGrid:
    """Latent array [C x H x W]; n_frames remembers pre-padding T for decode."""

    values: np.ndarray
    n_frames: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3:
            raise ValueError(f"latent must be 3-D [C x H x W], got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("latent contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


def _stages(compression: int) -> int:
    n = int(compression)
    if n < 2 or n & (n - 1):
        raise ValueError(f"compression must be a power of two >= 2, got {compression}")
    return n.bit_length() - 1


class MelCodec(nn.Module):
    def __init__(self, channels: int, compression: int, base_width: int,
                 mel_cfg: MelConfig, mel_offset: float = -6.0, mel_scale: float = 3.0):
        super().__init__()
        n = _stages(compression)
        if mel_cfg.n_mels % compression:
            raise ValueError(
                f"n_mels {mel_cfg.n_mels} not divisible by compression {compression}"
            )
        self.channels = channels
        self.compression = compression
        self.base_width = base_width
        self.mel_cfg = mel_cfg
        self.mel_offset = float(mel_offset)
        self.mel_scale = float(mel_scale)
        widths = [base_width * (2 ** i) for i in range(n)]

        enc = [nn.Conv2d(1, widths[0], 3, padding=1)]
        for i in range(n):
            w_in = widths[i]
            w_out = widths[min(i + 1, n - 1)]
            enc += [
                nn.GroupNorm(min(8, w_in), w_in),
                nn.SiLU(),
                nn.Conv2d(w_in, w_out, 4, stride=2, padding=1),
            ]
        enc += [nn.GroupNorm(min(8, widths[-1]), widths[-1]), nn.SiLU(),
                nn.Conv2d(widths[-1], 2 * channels, 3, padding=1)]
        self.encoder = nn.Sequential(*enc)

        dec = [nn.Conv2d(channels, widths[-1], 3, padding=1)]
        for i in reversed(range(n)):
            w_in = widths[min(i + 1, n - 1)]
            w_out = widths[i]
            dec += [
                nn.GroupNorm(min(8, w_in), w_in),
                nn.SiLU(),
                nn.ConvTranspose2d(w_in, w_out, 4, stride=2, padding=1),
            ]
        dec += [nn.GroupNorm(min(8, widths[0]), widths[0]), nn.SiLU(),
                nn.Conv2d(widths[0], 1, 3, padding=1)]
        self.decoder = nn.Sequential(*dec)
        self.register_buffer("latent_scale", torch.ones(()))

    # -- torch paths used by training --------------------------------------

    def normalize(self, mel: torch.Tensor) -> torch.Tensor:
        return (mel - self.mel_offset) / self.mel_scale

    def denormalize(self, x: torch.Tensor) -> torch.Tensor:
        return x * self.mel_scale + self.mel_offset

    def encode_raw(self, x: torch.Tensor):
        """x: [B, 1, T, F] normalized -> (mu, logvar), each [B, C, T/r, F/r]."""
        h = self.encoder(x)
        mu, logvar = torch.chunk(h, 2, dim=1)
        return mu, torch.clamp(logvar, -30.0, 20.0)

    def decode_raw(self, z: torch.Tensor) -> torch.Tensor:
        return self.decoder(z)

    def forward(self, x: torch.Tensor):
        mu, logvar = self.encode_raw(x)
        eps = torch.randn_like(mu)
        z = mu + torch.exp(0.5 * logvar) * eps
        return self.decode_raw(z), mu, logvar

    # -- numpy surface ------------------------------------------------------

    def _prep_frames(self, values: np.ndarray) -> tuple[torch.Tensor, int]:
        f, t = values.shape
        r = self.compression
        pad = (-t) % r
        x = values.T  # [T, F]
        if pad:
            x = np.pad(x, ((0, pad), (0, 0)), mode="reflect")
        xt = torch.from_numpy(np.ascontiguousarray(x)).float()[None, None]
        return self.normalize(xt), t


def encode(codec: MelCodec, mel: MelSpectrogram, mode: str = "mean",
           rng: np.random.Generator | None = None) -> LatentGrid:
    """Encode a mel spectrogram; mean of the posterior unless mode='sample'."""
    if mel.config != codec.mel_cfg:
        raise ValueError("mel config does not match the codec's")
    if mode not in ("mean", "sample"):
        raise ValueError(f"mode must be 'mean' or 'sample', got {mode!r}")
    x, t = codec._prep_frames(mel.values)
    with torch.no_grad():
        mu, logvar = codec.encode_raw(x)
        z = mu
        if mode == "sample":
            rng = np.random.default_rng() if rng is None else rng
            eps = torch.from_numpy(
                rng.standard_normal(tuple(mu.shape)).astype(np.float32)
            )
            z = mu + torch.exp(0.5 * logvar) * eps
        z = z * codec.latent_scale
    return LatentGrid(z[0].numpy().astype(np.float64), n_frames=t)


def decode(codec: MelCodec, z: LatentGrid) -> MelSpectrogram:
    """Decode a latent grid back to a mel spectrogram, cropping pad frames."""
    c, h, w = z.shape
    if c != codec.channels or w * codec.compression != codec.mel_cfg.n_mels:
        raise ValueError(
            f"latent shape {z.shape} inconsistent with codec "
            f"(C={codec.channels}, F/r={codec.mel_cfg.n_mels // codec.compression})"
        )
    zt = torch.from_numpy(np.ascontiguousarray(z.values)).float()[None]
    with torch.no_grad():
        x = codec.decode_raw(zt / codec.latent_scale)
        x = codec.denormalize(x)
    vals = x[0, 0].numpy().astype(np.float64).T  # [F, T_padded]
    t = z.n_frames if z.n_frames is not None else h * codec.compression
    if t > vals.shape[1]:
        raise ValueError(f"n_frames {t} exceeds decoded frame count {vals.shape[1]}")
    floor = np.log(codec.mel_cfg.log_floor)
    return MelSpectrogram(np.maximum(vals[:, :t], floor), codec.mel_cfg)
