"""Low-frequency replacement: splice trusted input content under the cutoff.

The generated spectrogram keeps only content above the cutoff; rows/bins
below it are copied verbatim from the input representation. To hide the seam,
generated high-band magnitudes are rescaled so that mean linear-magnitude
energy matches the input inside a narrow band straddling the cutoff (10 mel
rows; the equivalent Hz span for the STFT). Ratios are computed per
representation.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .spectral import MelConfig, MelSpectrogram, mel_center_freqs

BAND_ROWS = 10  # mel rows in the energy-matching band, half below/half above


@dataclasses.dataclass(frozen=True)
class LfrResult:
    mel: MelSpectrogram
    stft: np.ndarray
    mel_scale: float
    stft_scale: float
    degenerate: bool  # a band had zero energy, scale forced to 1


def _band_rows(cfg: MelConfig, cutoff_hz: float) -> tuple[np.ndarray, np.ndarray]:
    centers = mel_center_freqs(cfg)
    low = centers < cutoff_hz
    k = int(low.sum())
    half = BAND_ROWS // 2
    lo = max(0, k - half)
    hi = min(cfg.n_mels, k + half)
    return low, np.arange(lo, hi)


def lfr_postprocess(
    gen_mel: MelSpectrogram,
    input_mel: MelSpectrogram,
    gen_stft: np.ndarray,
    input_stft: np.ndarray,
    cutoff_hz: float,
) -> LfrResult:
    """Replace sub-cutoff content with the input's and rescale the rest.

    Mel values are log-domain (scaling adds log(scale), clamped back to the
    log floor); STFT magnitudes are linear. Both generated/input pairs must
    be shape-aligned. A zero-energy matching band on either side forces the
    corresponding scale to 1 and sets ``degenerate``.
    """
    cfg = gen_mel.config
    if input_mel.config != cfg:
        raise ValueError("mel configs differ between generated and input")
    if gen_mel.values.shape != input_mel.values.shape:
        raise ValueError("mel shapes differ between generated and input")
    if gen_stft.shape != input_stft.shape:
        raise ValueError("stft shapes differ between generated and input")
    if not (0 < cutoff_hz < cfg.fmax):
        raise ValueError(f"cutoff {cutoff_hz} Hz outside (0, {cfg.fmax})")

    low, band = _band_rows(cfg, cutoff_hz)
    degenerate = False

    # mel: energies as mean linear magnitude over the band
    g_lin = np.exp(gen_mel.values[band])
    i_lin = np.exp(input_mel.values[band])
    e_gen, e_in = float(g_lin.mean()), float(i_lin.mean())
    if e_gen <= cfg.log_floor * (1 + 1e-9) or e_in <= cfg.log_floor * (1 + 1e-9):
        mel_scale = 1.0
        degenerate = True
    else:
        mel_scale = e_in / e_gen
    out_mel = gen_mel.values.copy()
    out_mel[~low] = np.maximum(out_mel[~low] + np.log(mel_scale), np.log(cfg.log_floor))
    out_mel[low] = input_mel.values[low]

    # stft: same recipe on linear magnitudes; band is the Hz span of the mel band
    freqs = np.fft.rfftfreq(cfg.window_size, 1.0 / cfg.sample_rate)
    centers = mel_center_freqs(cfg)
    lo_hz = centers[band[0]] if band.size else cutoff_hz
    hi_hz = centers[band[-1]] if band.size else cutoff_hz
    sb = (freqs >= lo_hz) & (freqs <= hi_hz)
    if not sb.any():
        sb = np.argmin(np.abs(freqs - cutoff_hz)) == np.arange(freqs.size)
    e_gen_s = float(gen_stft[sb].mean())
    e_in_s = float(input_stft[sb].mean())
    if e_gen_s <= 0 or e_in_s <= 0:
        stft_scale = 1.0
        degenerate = True
    else:
        stft_scale = e_in_s / e_gen_s
    low_bins = freqs < cutoff_hz
    out_stft = gen_stft * stft_scale
    out_stft[low_bins] = input_stft[low_bins]

    return LfrResult(MelSpectrogram(out_mel, cfg), out_stft, mel_scale, stft_scale, degenerate)
