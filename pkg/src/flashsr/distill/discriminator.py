"""Latent-space discriminator: three conv blocks, SiLU, group norm.

It scores the teacher's v-output grid, not raw latents; the output is a
patch map (one scalar per spatial patch) rather than a single logit.
"""

from __future__ import annotations

import torch
from torch import nn


class LatentDiscriminator(nn.Module):
    def __init__(self, in_channels: int = 16, width: int = 64, groups: int = 8):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(in_channels, width, 3, padding=1),
            nn.GroupNorm(min(groups, width), width),
            nn.SiLU(),
            nn.Conv2d(width, width, 4, stride=2, padding=1),
            nn.GroupNorm(min(groups, width), width),
            nn.SiLU(),
            nn.Conv2d(width, width, 4, stride=2, padding=1),
            nn.GroupNorm(min(groups, width), width),
            nn.SiLU(),
        )
        self.head = nn.Conv2d(width, 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.net(x))
