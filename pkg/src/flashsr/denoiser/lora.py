"""Low-rank adapters on named Linear layers.

Adapters start at zero (B is zero-initialized), so a freshly wrapped student
is functionally identical to its teacher. ``merge``/``unmerge`` fold the
update into the base weight and back out exactly; ``strip_lora`` restores
plain Linears.
"""

from __future__ import annotations

import copy
import dataclasses

import torch
from torch import nn

DEFAULT_TARGETS = ("q_proj", "k_proj", "v_proj", "out_proj")


@dataclasses.dataclass(frozen=True)
class LoraConfig:
    rank: int = 8
    scale: float = 1.0
    targets: tuple = DEFAULT_TARGETS

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if len(self.targets) == 0:
            raise ValueError("targets must be non-empty")


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, rank: int, scale: float):
        super().__init__()
        self.base = base
        self.rank = rank
        self.scale = scale
        self.merged = False
        self.lora_a = nn.Parameter(torch.randn(rank, base.in_features) / rank)
        self.lora_b = nn.Parameter(torch.zeros(base.out_features, rank))

    def delta_weight(self) -> torch.Tensor:
        return self.scale * (self.lora_b @ self.lora_a)

    def forward(self, x):
        y = self.base(x)
        if not self.merged:
            y = y + self.scale * torch.nn.functional.linear(
                torch.nn.functional.linear(x, self.lora_a), self.lora_b
            )
        return y

    def merge(self):
        if not self.merged:
            with torch.no_grad():
                self.base.weight += self.delta_weight()
            self.merged = True

    def unmerge(self):
        if self.merged:
            with torch.no_grad():
                self.base.weight -= self.delta_weight()
            self.merged = False


def _named_lora(module: nn.Module):
    for name, child in module.named_modules():
        if isinstance(child, LoraLinear):
            yield name, child


def apply_lora(teacher: nn.Module, cfg: LoraConfig) -> nn.Module:
    """Deep-copy the teacher and wrap target Linears; only adapters train."""
    student = copy.deepcopy(teacher)
    hits = 0
    for name, child in list(student.named_modules()):
        for attr in cfg.targets:
            sub = getattr(child, attr, None)
            if isinstance(sub, nn.Linear):
                setattr(child, attr, LoraLinear(sub, cfg.rank, cfg.scale))
                hits += 1
    if hits == 0:
        raise ValueError(f"no Linear layers matched targets {cfg.targets}")
    for p in student.parameters():
        p.requires_grad_(False)
    for _, ll in _named_lora(student):
        ll.lora_a.requires_grad_(True)
        ll.lora_b.requires_grad_(True)
    return student


def lora_parameters(module: nn.Module):
    for _, ll in _named_lora(module):
        yield ll.lora_a
        yield ll.lora_b


def merge_lora(module: nn.Module) -> None:
    for _, ll in _named_lora(module):
        ll.merge()


def unmerge_lora(module: nn.Module) -> None:
    for _, ll in _named_lora(module):
        ll.unmerge()


def _replace_with_base(module: nn.Module) -> nn.Module:
    for name, ll in list(_named_lora(module)):
        parent = module
        parts = name.split(".")
        for p in parts[:-1]:
            parent = getattr(parent, p)
        setattr(parent, parts[-1], ll.base)
    return module


def strip_lora(module: nn.Module) -> nn.Module:
    """Replace every LoraLinear with its base Linear (must be unmerged)."""
    for name, ll in _named_lora(module):
        if ll.merged:
            raise ValueError(f"{name} is merged; unmerge before stripping")
    return _replace_with_base(module)


def bake_lora(module: nn.Module) -> nn.Module:
    """Fold adapters into the base weights and drop the wrappers.

    The result is a plain module computing the adapted function; the inverse
    (recovering the original weights) is gone, unlike merge/unmerge.
    """
    merge_lora(module)
    return _replace_with_base(module)


def lora_arrays(module: nn.Module, prefix: str = "lora/") -> dict:
    out = {}
    for name, ll in _named_lora(module):
        out[f"{prefix}{name}.a"] = ll.lora_a.detach().cpu().numpy()
        out[f"{prefix}{name}.b"] = ll.lora_b.detach().cpu().numpy()
    return out


def load_lora_arrays(module: nn.Module, arrays: dict, prefix: str = "lora/") -> None:
    import numpy as np
    for name, ll in _named_lora(module):
        ka, kb = f"{prefix}{name}.a", f"{prefix}{name}.b"
        if ka not in arrays or kb not in arrays:
            raise KeyError(f"missing adapter arrays for {name}")
        with torch.no_grad():
            ll.lora_a.copy_(torch.from_numpy(np.ascontiguousarray(arrays[ka])))
            ll.lora_b.copy_(torch.from_numpy(np.ascontiguousarray(arrays[kb])))
