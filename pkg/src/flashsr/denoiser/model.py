"""Conditional v-prediction network shared by teacher and student.

Three-level U-shape on latent grids with self-attention at the bottom and a
sinusoidal time embedding. Conditioning is channel concatenation of the
low-resolution latent with the noisy latent (2C input channels); the
unconditional pathway substitutes a learned null latent. Attention
projections are plain nn.Linear named q_proj/k_proj/v_proj/out_proj so
adapters can target them by name.
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..codec.model import LatentGrid


def time_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Sinusoidal features of t in [0,1]; t is scaled so frequencies vary."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=t.dtype, device=t.device) / half
    )
    ang = t[:, None] * 1000.0 * freqs[None, :]
    emb = torch.cat([torch.sin(ang), torch.cos(ang)], dim=1)
    if dim % 2:
        emb = F.pad(emb, (0, 1))
    return emb


class ResBlock(nn.Module):
    def __init__(self, w_in, w_out, time_dim, groups):
        super().__init__()
        self.norm1 = nn.GroupNorm(min(groups, w_in), w_in)
        self.conv1 = nn.Conv2d(w_in, w_out, 3, padding=1)
        self.temb = nn.Linear(time_dim, w_out)
        self.norm2 = nn.GroupNorm(min(groups, w_out), w_out)
        self.conv2 = nn.Conv2d(w_out, w_out, 3, padding=1)
        self.skip = nn.Conv2d(w_in, w_out, 1) if w_in != w_out else nn.Identity()

    def forward(self, x, emb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.temb(emb)[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class SelfAttention2d(nn.Module):
    def __init__(self, width, heads, groups):
        super().__init__()
        if width % heads:
            raise ValueError(f"width {width} not divisible by heads {heads}")
        self.heads = heads
        self.norm = nn.GroupNorm(min(groups, width), width)
        self.q_proj = nn.Linear(width, width)
        self.k_proj = nn.Linear(width, width)
        self.v_proj = nn.Linear(width, width)
        self.out_proj = nn.Linear(width, width)

    def forward(self, x):
        b, c, h, w = x.shape
        y = self.norm(x).reshape(b, c, h * w).transpose(1, 2)  # [B, HW, C]
        q = self.q_proj(y).view(b, -1, self.heads, c // self.heads).transpose(1, 2)
        k = self.k_proj(y).view(b, -1, self.heads, c // self.heads).transpose(1, 2)
        v = self.v_proj(y).view(b, -1, self.heads, c // self.heads).transpose(1, 2)
        a = F.scaled_dot_product_attention(q, k, v)
        a = a.transpose(1, 2).reshape(b, h * w, c)
        return x + self.out_proj(a).transpose(1, 2).reshape(b, c, h, w)


class VPredictor(nn.Module):
    def __init__(self, latent_channels: int = 16, widths=(32, 64, 96),
                 time_dim: int = 128, attn_heads: int = 4, groups: int = 8,
                 conditional: bool = True):
        super().__init__()
        if len(widths) != 3:
            raise ValueError(f"expected 3 level widths, got {widths}")
        self.latent_channels = latent_channels
        self.widths = tuple(widths)
        self.time_dim = time_dim
        self.attn_heads = attn_heads
        self.groups = groups
        self.conditional = conditional
        w0, w1, w2 = widths
        self.time_mlp = nn.Sequential(
            nn.Linear(time_dim, time_dim), nn.SiLU(), nn.Linear(time_dim, time_dim)
        )
        in_ch = latent_channels * (2 if conditional else 1)
        self.null_cond = nn.Parameter(torch.zeros(latent_channels, 1, 1))
        self.conv_in = nn.Conv2d(in_ch, w0, 3, padding=1)
        self.down_block1 = ResBlock(w0, w0, time_dim, groups)
        self.down1 = nn.Conv2d(w0, w1, 4, stride=2, padding=1)
        self.down_block2 = ResBlock(w1, w1, time_dim, groups)
        self.down2 = nn.Conv2d(w1, w2, 4, stride=2, padding=1)
        self.mid_block1 = ResBlock(w2, w2, time_dim, groups)
        self.mid_attn = SelfAttention2d(w2, attn_heads, groups)
        self.mid_block2 = ResBlock(w2, w2, time_dim, groups)
        self.up2 = nn.Conv2d(w2, w1, 3, padding=1)
        self.up_block2 = ResBlock(2 * w1, w1, time_dim, groups)
        self.up1 = nn.Conv2d(w1, w0, 3, padding=1)
        self.up_block1 = ResBlock(2 * w0, w0, time_dim, groups)
        self.norm_out = nn.GroupNorm(min(groups, w0), w0)
        self.conv_out = nn.Conv2d(w0, latent_channels, 3, padding=1)
        nn.init.zeros_(self.conv_out.weight)
        nn.init.zeros_(self.conv_out.bias)

    def null_latent(self, b: int, h: int, w: int) -> torch.Tensor:
        return self.null_cond[None].expand(b, -1, h, w)

    def forward(self, z_t: torch.Tensor, t, cond: torch.Tensor | None = None):
        b, c, h, w = z_t.shape
        if c != self.latent_channels:
            raise ValueError(f"expected {self.latent_channels} channels, got {c}")
        if not torch.is_tensor(t):
            t = torch.full((b,), float(t), dtype=z_t.dtype, device=z_t.device)
        elif t.ndim == 0:
            t = t.expand(b).to(z_t.dtype)
        if t.shape != (b,):
            raise ValueError(f"t must be scalar or [batch], got shape {tuple(t.shape)}")

        if self.conditional:
            if cond is None:
                cond = self.null_latent(b, h, w)
            if cond.shape != z_t.shape:
                raise ValueError(f"cond shape {tuple(cond.shape)} != z_t {tuple(z_t.shape)}")
            x = torch.cat([z_t, cond], dim=1)
        else:
            if cond is not None:
                raise ValueError("unconditional model got a cond input")
            x = z_t

        # pad to a multiple of 4 for the two downsamplings, crop at the end
        ph, pw = (-h) % 4, (-w) % 4
        if ph or pw:
            x = F.pad(x, (0, pw, 0, ph), mode="replicate")

        emb = self.time_mlp(time_embedding(t, self.time_dim))
        h0 = self.down_block1(self.conv_in(x), emb)
        h1 = self.down_block2(self.down1(h0), emb)
        h2 = self.mid_block1(self.down2(h1), emb)
        h2 = self.mid_attn(h2)
        h2 = self.mid_block2(h2, emb)
        u2 = F.interpolate(h2, size=h1.shape[-2:], mode="nearest")
        u2 = self.up_block2(torch.cat([self.up2(u2), h1], dim=1), emb)
        u1 = F.interpolate(u2, size=h0.shape[-2:], mode="nearest")
        u1 = self.up_block1(torch.cat([self.up1(u1), h0], dim=1), emb)
        out = self.conv_out(F.silu(self.norm_out(u1)))
        return out[:, :, :h, :w]


def predict_v(model: VPredictor, z_t: LatentGrid, t: float,
              cond: LatentGrid | None = None) -> LatentGrid:
    """Single-item numpy wrapper around the network forward pass."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must be in [0, 1], got {t}")
    zt = torch.from_numpy(np.ascontiguousarray(z_t.values)).float()[None]
    ct = None
    if cond is not None:
        if cond.shape != z_t.shape:
            raise ValueError(f"cond shape {cond.shape} != z_t shape {z_t.shape}")
        ct = torch.from_numpy(np.ascontiguousarray(cond.values)).float()[None]
    with torch.no_grad():
        v = model(zt, float(t), ct)
    return LatentGrid(v[0].numpy().astype(np.float64), n_frames=z_t.n_frames)
