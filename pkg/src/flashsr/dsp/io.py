"""WAV read/write and the Waveform container.

All audio inside the package is float64 mono in [-1, 1] (soft range; values
outside are allowed but writers clip for PCM targets). Files are read with
``scipy.io.wavfile``; multi-channel input is downmixed by averaging.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.io import wavfile

_PCM_SCALE = {np.dtype(np.int16): 2.0 ** 15, np.dtype(np.int32): 2.0 ** 31}


@dataclasses.dataclass(frozen=True)
class Waveform:
    """Mono audio clip: float64 samples plus the sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise ValueError(f"samples must be 1-D and non-empty, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples contain non-finite values")
        if not (isinstance(self.sample_rate, (int, np.integer)) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be a positive int, got {self.sample_rate!r}")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size


def read_wav(path) -> Waveform:
    """Read a WAV file, downmix to mono, and normalize PCM to float64."""
    rate, data = wavfile.read(path)
    data = np.atleast_1d(data)
    if data.ndim == 2:
        data = data.mean(axis=1)
    if data.dtype in _PCM_SCALE:
        data = data.astype(np.float64) / _PCM_SCALE[data.dtype]
    elif data.dtype == np.uint8:
        data = (data.astype(np.float64) - 128.0) / 128.0
    else:
        data = data.astype(np.float64)
    return Waveform(data, int(rate))


def write_wav(path, wave: Waveform, encoding: str = "pcm16") -> None:
    """Write a Waveform as PCM16 (clipped) or float32."""
    if encoding == "pcm16":
        x = np.clip(wave.samples, -1.0, 1.0 - 1.0 / 32768.0)
        wavfile.write(path, wave.sample_rate, (x * 32768.0).astype(np.int16))
    elif encoding == "float32":
        wavfile.write(path, wave.sample_rate, wave.samples.astype(np.float32))
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
