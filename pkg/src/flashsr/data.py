"""Synthetic corpus generation, clip loading, and training batch sources.

The synthetic clips are deliberately full-band (harmonic stacks, chirps, and
tilted noise reach near Nyquist) so lowpass simulation genuinely removes
content. Batch sources precompute per-clip tensors once and sample with the
caller's rng; latent pairs can be cached under $FLASHSR_CACHE.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np
import torch

from .codec.model import MelCodec, encode
from .dsp.filters import SimConfig, simulate_lr
from .dsp.io import Waveform, read_wav, write_wav
from .dsp.resample import resample_sinc
from .dsp.spectral import MelConfig, mel_spectrogram

CATEGORIES = ("harmonic", "chirp", "noisy")


def _harmonic_clip(rng, n, rate):
    t = np.arange(n) / rate
    f0 = rng.uniform(110.0, 392.0)
    decay = rng.uniform(0.5, 1.2)
    x = np.zeros(n)
    k_max = int(0.95 * rate / 2 / f0)
    for k in range(1, max(2, k_max) + 1):
        x += np.sin(2 * np.pi * k * f0 * t + rng.uniform(0, 2 * np.pi)) / k ** decay
    am = 1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(2.0, 5.0) * t)
    noise = rng.standard_normal(n) * 10 ** (-30 / 20)
    return x * am + noise


def _chirp_clip(rng, n, rate):
    t = np.arange(n) / rate
    dur = n / rate
    f0 = rng.uniform(100.0, 300.0)
    f1 = rng.uniform(0.3, 0.9) * rate / 2
    phase = 2 * np.pi * f0 * dur / np.log(f1 / f0) * (np.exp(t / dur * np.log(f1 / f0)) - 1)
    x = np.sin(phase)
    x += 0.5 * np.sin(2 * phase + rng.uniform(0, 2 * np.pi))
    return x + rng.standard_normal(n) * 10 ** (-30 / 20)


def _noisy_clip(rng, n, rate):
    spec = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    tilt_db = rng.uniform(-12.0, 0.0)
    shape = 10 ** (tilt_db / 20 * np.log2(np.maximum(freqs, 20.0) / 100.0))
    x = np.fft.irfft(spec * shape, n)
    x /= np.std(x) + 1e-12
    tone = 0.8 * np.sin(2 * np.pi * rng.uniform(200, 1000) * np.arange(n) / rate)
    return x + tone


_MAKERS = {"harmonic": _harmonic_clip, "chirp": _chirp_clip, "noisy": _noisy_clip}


def synthetic_clip(rng: np.random.Generator, sample_rate: int, clip_seconds: float,
                   category: str) -> Waveform:
    if category not in _MAKERS:
        raise ValueError(f"unknown category {category!r}, expected one of {CATEGORIES}")
    n = int(round(sample_rate * clip_seconds))
    x = _MAKERS[category](rng, n, sample_rate)
    x = 0.7 * x / (np.max(np.abs(x)) + 1e-12)
    return Waveform(x, sample_rate)


def make_synthetic_corpus(out_dir, n_clips: int, sample_rate: int, clip_seconds: float,
                          seed: int = 0) -> list:
    """Write n WAV clips cycling through the categories; returns paths."""
    if n_clips < 1:
        raise ValueError("n_clips must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_clips):
        cat = CATEGORIES[i % len(CATEGORIES)]
        wave = synthetic_clip(rng, sample_rate, clip_seconds, cat)
        path = os.path.join(out_dir, f"{cat}-{i:03d}.wav")
        write_wav(path, wave, encoding="float32")
        paths.append(path)
    return paths


def load_clip_dir(path, sample_rate: int, clip_seconds: float, max_clips: int = 0) -> list:
    """Load WAVs as (item_id, category, Waveform) at a fixed rate and length.

    Category is the filename prefix before the first '-' (or 'unknown').
    Clips are resampled if needed, then center-cropped or zero-padded.
    """
    names = sorted(f for f in os.listdir(path) if f.lower().endswith(".wav"))
    if max_clips:
        names = names[:max_clips]
    if not names:
        raise ValueError(f"no wav files under {path}")
    n = int(round(sample_rate * clip_seconds))
    out = []
    for fname in names:
        wave = read_wav(os.path.join(path, fname))
        if wave.sample_rate != sample_rate:
            wave = resample_sinc(wave, sample_rate)
        x = wave.samples
        if x.size > n:
            start = (x.size - n) // 2
            x = x[start: start + n]
        elif x.size < n:
            x = np.concatenate([x, np.zeros(n - x.size)])
        item_id = os.path.splitext(fname)[0]
        category = item_id.split("-")[0] if "-" in item_id else "unknown"
        out.append((item_id, category, Waveform(x, sample_rate)))
    return out


def _cache_path(tag: str, key: str):
    root = os.environ.get("FLASHSR_CACHE", "")
    if not root:
        return None
    os.makedirs(root, exist_ok=True)
    return os.path.join(root, f"{tag}-{key}.npz")


class LatentPairs:
    """Precomputed (z_h, z_l) tensors for teacher training and distillation."""

    def __init__(self, z_h: torch.Tensor, z_l: torch.Tensor):
        if z_h.shape != z_l.shape:
            raise ValueError("z_h and z_l shapes differ")
        self.z_h = z_h
        self.z_l = z_l

    def __len__(self):
        return self.z_h.shape[0]

    def batch_fn(self, rng: np.random.Generator, n: int):
        idx = rng.integers(0, len(self), size=n)
        return self.z_h[idx], self.z_l[idx]


def build_latent_pairs(dataset, codec: MelCodec, sim_cfg: SimConfig, seed: int = 0,
                       draws_per_clip: int = 3) -> LatentPairs:
    """Encode each clip and several degraded versions of it.

    The degraded path matches inference: simulate, then take the mel/latent
    of the upsampled low-resolution waveform.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    key_src = f"{seed}-{draws_per_clip}-{len(dataset)}-{sim_cfg}"
    key = hashlib.sha256(key_src.encode()).hexdigest()[:12]
    cache = _cache_path("latents", key)
    if cache and os.path.exists(cache):
        z = np.load(cache)
        return LatentPairs(torch.from_numpy(z["z_h"]), torch.from_numpy(z["z_l"]))

    mel_cfg = codec.mel_cfg
    zh, zl = [], []
    for idx, (_id, _cat, wave) in enumerate(dataset):
        z_clean = encode(codec, mel_spectrogram(wave, mel_cfg)).values
        for d in range(draws_per_clip):
            rng = np.random.default_rng([seed, idx, d])
            lr, _spec = simulate_lr(wave, sim_cfg, rng)
            z_lr = encode(codec, mel_spectrogram(lr, mel_cfg)).values
            zh.append(z_clean)
            zl.append(z_lr)
    z_h = torch.from_numpy(np.stack(zh).astype(np.float32))
    z_l = torch.from_numpy(np.stack(zl).astype(np.float32))
    if cache:
        np.savez(cache, z_h=z_h.numpy(), z_l=z_l.numpy())
    return LatentPairs(z_h, z_l)


class VocoderBatches:
    """Mel + lr-waveform + target tuples with random segment cropping."""

    def __init__(self, dataset, mel_cfg: MelConfig, sim_cfg: SimConfig, hop: int,
                 seed: int = 0, draws_per_clip: int = 2):
        if len(dataset) == 0:
            raise ValueError("empty dataset")
        self.hop = hop
        mels, lrs, tgts = [], [], []
        for idx, (_id, _cat, wave) in enumerate(dataset):
            mel = mel_spectrogram(wave, mel_cfg)
            t = mel.n_frames
            n = t * hop
            for d in range(draws_per_clip):
                rng = np.random.default_rng([seed, idx, d])
                lr, _spec = simulate_lr(wave, sim_cfg, rng)
                mels.append(mel.values)
                lrs.append(lr.samples[:n])
                tgts.append(wave.samples[:n])
        self.mel = torch.from_numpy(np.stack(mels).astype(np.float32))
        self.lr = torch.from_numpy(np.stack(lrs).astype(np.float32))[:, None]
        self.target = torch.from_numpy(np.stack(tgts).astype(np.float32))[:, None]

    def __len__(self):
        return self.mel.shape[0]

    def batch_fn(self, segment_frames: int):
        t_total = self.mel.shape[-1]
        seg = min(segment_frames, t_total)

        def fn(rng: np.random.Generator, n: int):
            idx = rng.integers(0, len(self), size=n)
            offs = rng.integers(0, t_total - seg + 1, size=n)
            mel = torch.stack([self.mel[i, :, o: o + seg] for i, o in zip(idx, offs)])
            lr = torch.stack([
                self.lr[i, :, o * self.hop: (o + seg) * self.hop]
                for i, o in zip(idx, offs)
            ])
            tgt = torch.stack([
                self.target[i, :, o * self.hop: (o + seg) * self.hop]
                for i, o in zip(idx, offs)
            ])
            return mel, lr, tgt

        return fn
