"""STFT magnitude and log-mel spectrogram frontend.

Frames are left-aligned: frame i covers samples [i*hop, i*hop + window) of the
zero-padded signal, and the frame count is floor(n / hop), so spectrogram
width is determined by length alone. Mel filters use the HTK frequency map
with rows normalized to unit sum; log is natural with a hard floor.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np
from scipy.signal import get_window

from .io import Waveform


@dataclasses.dataclass(frozen=True)
class MelConfig:
    sample_rate: int
    window_size: int = 2048
    hop_size: int = 480
    n_mels: int = 256
    fmin_hz: float = 0.0
    fmax_hz: float | None = None
    log_floor: float = 1e-5

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not (0 < self.hop_size <= self.window_size):
            raise ValueError("need 0 < hop_size <= window_size")
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        fmax = self.sample_rate / 2.0 if self.fmax_hz is None else self.fmax_hz
        if not (0 <= self.fmin_hz < fmax <= self.sample_rate / 2.0):
            raise ValueError("need 0 <= fmin < fmax <= Nyquist")

    @property
    def fmax(self) -> float:
        return self.sample_rate / 2.0 if self.fmax_hz is None else float(self.fmax_hz)

    @property
    def n_bins(self) -> int:
        return self.window_size // 2 + 1


@dataclasses.dataclass(frozen=True)
class MelSpectrogram:
    """Log-mel values [n_mels x frames] plus the config that produced them."""

    values: np.ndarray
    config: MelConfig

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != self.config.n_mels:
            raise ValueError(
                f"values must be [{self.config.n_mels} x T], got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("mel values contain non-finite entries")
        lo = np.log(self.config.log_floor)
        if v.min() < lo - 1e-9:
            raise ValueError(f"mel values fall below log floor {lo:.6f}")
        object.__setattr__(self, "values", v)

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def frame_count(n_samples: int, hop_size: int) -> int:
    return n_samples // hop_size


def stft_mag(wave: Waveform, window_size: int, hop_size: int) -> np.ndarray:
    """Magnitude STFT, shape [window//2+1 x floor(n/hop)], periodic Hann."""
    if not (0 < hop_size <= window_size):
        raise ValueError("need 0 < hop_size <= window_size")
    x = wave.samples
    t = frame_count(x.size, hop_size)
    if t < 1:
        raise ValueError(f"clip of {x.size} samples is shorter than one hop ({hop_size})")
    xp = np.concatenate([x, np.zeros(window_size)])
    idx = np.arange(t)[:, None] * hop_size + np.arange(window_size)[None, :]
    frames = xp[idx] * get_window("hann", window_size, fftbins=True)[None, :]
    return np.abs(np.fft.rfft(frames, axis=1)).T


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@functools.lru_cache(maxsize=16)
def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular HTK-scale filterbank [n_mels x n_bins], rows sum to 1."""
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    freqs = np.fft.rfftfreq(cfg.window_size, 1.0 / cfg.sample_rate)
    fb = np.zeros((cfg.n_mels, freqs.size))
    for i in range(cfg.n_mels):
        lo, ctr, hi = edges[i], edges[i + 1], edges[i + 2]
        up = (freqs - lo) / max(ctr - lo, 1e-12)
        down = (hi - freqs) / max(hi - ctr, 1e-12)
        fb[i] = np.maximum(0.0, np.minimum(up, down))
        s = fb[i].sum()
        if s <= 0:
            raise ValueError(
                f"mel row {i} is empty; n_mels={cfg.n_mels} too high for "
                f"window {cfg.window_size} at rate {cfg.sample_rate}"
            )
        fb[i] /= s
    return fb


@functools.lru_cache(maxsize=16)
def mel_center_freqs(cfg: MelConfig) -> np.ndarray:
    """Center frequency in Hz of each mel row."""
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    return edges[1:-1]


def mel_spectrogram(wave: Waveform, cfg: MelConfig) -> MelSpectrogram:
    """Log-mel spectrogram of a clip at the config's sample rate."""
    if wave.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"waveform rate {wave.sample_rate} != config rate {cfg.sample_rate}"
        )
    mag = stft_mag(wave, cfg.window_size, cfg.hop_size)
    mel = mel_filterbank(cfg) @ mag
    return MelSpectrogram(np.log(np.maximum(mel, cfg.log_floor)), cfg)
