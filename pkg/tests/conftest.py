import numpy as np
import pytest

from flashsr.dsp.io import Waveform
from flashsr.dsp.spectral import MelConfig


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def mel16k():
    # desk-profile analysis settings
    return MelConfig(sample_rate=16000, window_size=640, hop_size=160,
                     n_mels=64, fmin_hz=0.0, fmax_hz=8000.0, log_floor=1e-5)


def make_tone(freq_hz: float, sample_rate: int = 16000, seconds: float = 1.0,
              amp: float = 0.5) -> Waveform:
    n = int(round(sample_rate * seconds))
    t = np.arange(n, dtype=np.float64) / sample_rate
    return Waveform(samples=amp * np.sin(2 * np.pi * freq_hz * t), sample_rate=sample_rate)


def make_noise(sample_rate: int = 16000, seconds: float = 1.0, seed: int = 0,
               amp: float = 0.5) -> Waveform:
    n = int(round(sample_rate * seconds))
    x = np.random.default_rng(seed).standard_normal(n)
    x *= amp / max(np.max(np.abs(x)), 1e-9)
    return Waveform(samples=x, sample_rate=sample_rate)


@pytest.fixture
def tone16k():
    return make_tone(440.0)


@pytest.fixture
def noise16k():
    return make_noise()
