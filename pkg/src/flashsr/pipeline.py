"""End-to-end inference: lr waveform in, restored hr waveform out.

Bundles the three trained parts (mel codec, one-step student, SR vocoder)
and runs the fixed chain: upsample -> mel -> encode -> one-step latent
restoration from pure noise -> decode -> vocode conditioned on the
upsampled waveform. A multi-step DDIM path is kept for comparisons.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import torch

from .checkpoint import (arrays_to_module, load_checkpoint, module_to_arrays,
                         save_checkpoint)
from .codec.model import LatentGrid, MelCodec, decode, encode
from .codec.train import codec_config_dict, codec_from_config_dict
from .denoiser.model import VPredictor
from .denoiser.train import teacher_config_dict, teacher_from_config_dict
from .diffusion.sampler import ddim_trajectory, time_grid
from .diffusion.schedule import CosineSchedule, x0_from_v
from .dsp.io import Waveform
from .dsp.resample import resample_sinc
from .errors import CheckpointError
from .dsp.spectral import mel_spectrogram
from .vocoder.generator import SrVocoder, generate_waveform
from .vocoder.train import vocoder_config_dict, vocoder_from_config_dict

_PART_KINDS = {"codec": "codec", "student": "denoiser", "vocoder": "vocoder"}


@dataclass
class FlashSRModel:
    codec: MelCodec
    student: VPredictor
    vocoder: SrVocoder
    schedule: CosineSchedule

    def __post_init__(self):
        self.codec.eval()
        self.student.eval()
        self.vocoder.eval()

    @property
    def sample_rate(self) -> int:
        return self.codec.mel_cfg.sample_rate


def upsample_and_restore(model: FlashSRModel, wave: Waveform, seed: int = 0,
                         steps: int = 1) -> Waveform:
    """Restore a low-resolution waveform to the model's sample rate.

    steps=1 is the production path (single network call); larger values run
    a DDIM trajectory with the same student, for quality/speed comparisons.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    mel_cfg = model.codec.mel_cfg
    if wave.sample_rate != mel_cfg.sample_rate:
        wave = resample_sinc(wave, mel_cfg.sample_rate)
    n = len(wave)
    if n < mel_cfg.window_size:
        raise ValueError(
            f"clip too short: {n} samples < one window ({mel_cfg.window_size})")

    mel_lr = mel_spectrogram(wave, mel_cfg)
    grid_l = encode(model.codec, mel_lr)
    z_l = torch.from_numpy(grid_l.values.astype(np.float32))[None]

    rng = np.random.default_rng(seed)
    noise = torch.from_numpy(
        rng.standard_normal(z_l.shape).astype(np.float32))

    with torch.no_grad():
        if steps == 1:
            t = torch.ones(1)
            v = model.student(noise, t, z_l)
            z0 = x0_from_v(model.schedule, noise, v, t)
        else:
            def v_fn(z, t):
                return model.student(z, t, z_l)

            z0 = ddim_trajectory(model.schedule, v_fn, noise,
                                 time_grid(1.0, steps))

    grid_hr = LatentGrid(z0[0].numpy().astype(np.float64), grid_l.n_frames)
    mel_hr = decode(model.codec, grid_hr)

    t_frames = mel_hr.n_frames
    usable = t_frames * model.vocoder.hop
    lr_for_voc = Waveform(wave.samples[:usable], mel_cfg.sample_rate)
    out = generate_waveform(model.vocoder, mel_hr, lr_for_voc)

    x = out.samples
    if x.size < n:
        x = np.concatenate([x, np.zeros(n - x.size)])
    return Waveform(x[:n], mel_cfg.sample_rate)


def save_bundle(model: FlashSRModel, out_dir) -> dict:
    """Write codec/student/vocoder checkpoints; returns part -> path."""
    os.makedirs(out_dir, exist_ok=True)
    parts = {
        "codec": (model.codec, codec_config_dict(model.codec)),
        "student": (model.student, teacher_config_dict(model.student)),
        "vocoder": (model.vocoder, vocoder_config_dict(model.vocoder)),
    }
    paths = {}
    for name, (module, cfg) in parts.items():
        path = os.path.join(out_dir, f"{name}.ckpt")
        save_checkpoint(path, _PART_KINDS[name], cfg, module_to_arrays(module))
        paths[name] = path
    return paths


def _load_part(bundle_dir, name: str, builder):
    path = os.path.join(bundle_dir, f"{name}.ckpt")
    ckpt = load_checkpoint(path)
    if ckpt.kind != _PART_KINDS[name]:
        raise CheckpointError(
            f"{path}: kind {ckpt.kind!r}, expected {_PART_KINDS[name]!r}")
    module = builder(ckpt.config)
    arrays_to_module(ckpt.arrays, module)
    return module


def load_bundle(bundle_dir) -> FlashSRModel:
    codec = _load_part(bundle_dir, "codec", codec_from_config_dict)
    student = _load_part(bundle_dir, "student", teacher_from_config_dict)
    vocoder = _load_part(bundle_dir, "vocoder", vocoder_from_config_dict)
    return FlashSRModel(codec, student, vocoder, CosineSchedule())
