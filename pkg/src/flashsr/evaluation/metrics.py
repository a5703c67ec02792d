"""Objective metrics: log-spectral distance and spectrogram L1 distance.

LSD follows the base-10 convention on magnitude-squared spectra with a hard
floor: mean over frames of the RMS log10 difference across bins. A x10
amplitude scale therefore reads as exactly 2.0.
"""

from __future__ import annotations

import numpy as np

from ..dsp.io import Waveform
from ..dsp.spectral import stft_mag

LSD_FLOOR = 1e-10


def _check_pair(ref: Waveform, est: Waveform) -> None:
    if ref.sample_rate != est.sample_rate:
        raise ValueError(f"sample rates differ: {ref.sample_rate} vs {est.sample_rate}")
    if len(ref) != len(est):
        raise ValueError(f"lengths differ: {len(ref)} vs {len(est)}")


def lsd(ref: Waveform, est: Waveform, window: int = 2048, hop: int = 512) -> float:
    """Log-spectral distance on floored magnitude-squared STFTs."""
    _check_pair(ref, est)
    s_ref = np.maximum(stft_mag(ref, window, hop) ** 2, LSD_FLOOR)
    s_est = np.maximum(stft_mag(est, window, hop) ** 2, LSD_FLOOR)
    d = np.log10(s_ref) - np.log10(s_est)
    return float(np.mean(np.sqrt(np.mean(d ** 2, axis=0))))


def stft_distance(ref: Waveform, est: Waveform, window: int = 2048, hop: int = 512) -> float:
    """Mean L1 distance between magnitude STFTs."""
    _check_pair(ref, est)
    return float(np.mean(np.abs(stft_mag(ref, window, hop) - stft_mag(est, window, hop))))
