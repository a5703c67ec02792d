"""Randomized lowpass degradation for simulating low-resolution inputs.

Four classic IIR families designed via scipy (bilinear transform, SOS form)
with randomized order and cutoff. ``simulate_lr`` applies a sampled filter
and optionally round-trips the result through 2x-cutoff resampling so the
degraded signal has genuinely lost its upper band.

``STOPBAND_ATTEN_DB`` records measured worst-case attenuation (mean power in
[1.5 fc, Nyquist) relative to mean power in (0, 0.8 fc]) over dense cutoff
grids at both working rates (0.7-5 kHz at 16 kHz; 2-15.9 kHz at 48 kHz),
minus a 1 dB safety margin. Tests assert designs stay above these bounds.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import signal

from ..errors import FilterRealizationError
from .io import Waveform
from .resample import resample_sinc

FAMILIES = ("butterworth", "chebyshev", "bessel", "elliptic")

# ripple/attenuation parameters for the families that take them
_CHEBY_RIPPLE_DB = 1.0
_ELLIP_RIPPLE_DB = 1.0
_ELLIP_STOP_DB = 60.0

# frozen from measurement (see module docstring); keys are (family, order)
STOPBAND_ATTEN_DB = {
    ("butterworth", 2): 16.4, ("butterworth", 3): 22.3, ("butterworth", 4): 27.6,
    ("butterworth", 5): 32.6, ("butterworth", 6): 37.3, ("butterworth", 7): 41.9,
    ("butterworth", 8): 46.3, ("butterworth", 9): 50.6, ("butterworth", 10): 54.8,
    ("chebyshev", 2): 15.2, ("chebyshev", 3): 25.8, ("chebyshev", 4): 36.1,
    ("chebyshev", 5): 46.0, ("chebyshev", 6): 55.6, ("chebyshev", 7): 65.1,
    ("chebyshev", 8): 74.3, ("chebyshev", 9): 83.5, ("chebyshev", 10): 92.6,
    ("bessel", 2): 13.5, ("bessel", 3): 16.1, ("bessel", 4): 17.5,
    ("bessel", 5): 18.0, ("bessel", 6): 18.1, ("bessel", 7): 17.9,
    ("bessel", 8): 17.7, ("bessel", 9): 17.5, ("bessel", 10): 17.4,
    ("elliptic", 2): 15.3, ("elliptic", 3): 26.6, ("elliptic", 4): 40.8,
    ("elliptic", 5): 60.0, ("elliptic", 6): 58.4, ("elliptic", 7): 60.8,
    ("elliptic", 8): 58.4, ("elliptic", 9): 60.7, ("elliptic", 10): 58.4,
}

PASSBAND_EDGE = 0.8  # passband measured over (0, 0.8 fc]
STOPBAND_EDGE = 1.5  # stopband measured over [1.5 fc, Nyquist)


@dataclasses.dataclass(frozen=True)
class FilterSpec:
    family: str
    order: int
    cutoff_hz: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if not (2 <= int(self.order) <= 10):
            raise ValueError(f"order must be in [2, 10], got {self.order}")
        if not (self.cutoff_hz > 0 and np.isfinite(self.cutoff_hz)):
            raise ValueError(f"cutoff_hz must be positive and finite, got {self.cutoff_hz}")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "cutoff_hz", float(self.cutoff_hz))


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """Degradation sampler settings: cutoff/order ranges and family pool."""

    cutoff_lo_hz: float = 2000.0
    cutoff_hi_hz: float = 16000.0
    order_lo: int = 2
    order_hi: int = 10
    families: tuple = FAMILIES
    rate_roundtrip: bool = True

    def __post_init__(self):
        if not (0 < self.cutoff_lo_hz <= self.cutoff_hi_hz):
            raise ValueError("cutoff range must satisfy 0 < lo <= hi")
        if not (2 <= self.order_lo <= self.order_hi <= 10):
            raise ValueError("order range must satisfy 2 <= lo <= hi <= 10")
        if len(self.families) == 0:
            raise ValueError("families must be non-empty")
        for f in self.families:
            if f not in FAMILIES:
                raise ValueError(f"unknown family {f!r}")


def sample_filter(cfg: SimConfig, rng: np.random.Generator) -> FilterSpec:
    """Draw (family, order, cutoff) uniformly from the configured ranges."""
    family = cfg.families[int(rng.integers(len(cfg.families)))]
    order = int(rng.integers(cfg.order_lo, cfg.order_hi + 1))
    cutoff = float(rng.uniform(cfg.cutoff_lo_hz, cfg.cutoff_hi_hz))
    return FilterSpec(family, order, cutoff)


def design_sos(spec: FilterSpec, sample_rate: int) -> np.ndarray:
    """Design the lowpass as second-order sections at the given rate."""
    nyq = sample_rate / 2.0
    if spec.cutoff_hz >= nyq:
        raise ValueError(
            f"cutoff {spec.cutoff_hz} Hz must be below Nyquist {nyq} Hz"
        )
    wn = spec.cutoff_hz / nyq
    if spec.family == "butterworth":
        return signal.butter(spec.order, wn, btype="low", output="sos")
    if spec.family == "chebyshev":
        return signal.cheby1(spec.order, _CHEBY_RIPPLE_DB, wn, btype="low", output="sos")
    if spec.family == "bessel":
        return signal.bessel(spec.order, wn, btype="low", norm="mag", output="sos")
    return signal.ellip(spec.order, _ELLIP_RIPPLE_DB, _ELLIP_STOP_DB, wn, btype="low", output="sos")


def lowpass_apply(wave: Waveform, spec: FilterSpec) -> Waveform:
    """Apply the causal lowpass; non-finite output raises FilterRealizationError."""
    sos = design_sos(spec, wave.sample_rate)
    y = signal.sosfilt(sos, wave.samples)
    if not np.all(np.isfinite(y)):
        raise FilterRealizationError(
            f"filter produced non-finite output: {spec.family} order={spec.order} "
            f"fc={spec.cutoff_hz:.1f} Hz at rate {wave.sample_rate}"
        )
    return Waveform(y, wave.sample_rate)


def measure_attenuation_db(spec: FilterSpec, sample_rate: int, nfft: int = 16384) -> float:
    """Mean passband power over mean stopband power of the realized design, in dB."""
    sos = design_sos(spec, sample_rate)
    imp = np.zeros(nfft)
    imp[0] = 1.0
    h = np.abs(np.fft.rfft(signal.sosfilt(sos, imp))) ** 2
    freqs = np.fft.rfftfreq(nfft, 1.0 / sample_rate)
    pb = (freqs > 0) & (freqs <= PASSBAND_EDGE * spec.cutoff_hz)
    # Nyquist excluded: the bilinear transform pins a zero there for most
    # families, which would let a single 0-power bin fake infinite attenuation
    sb = (freqs >= STOPBAND_EDGE * spec.cutoff_hz) & (freqs < sample_rate / 2.0)
    if not pb.any() or not sb.any():
        raise ValueError("cutoff leaves an empty passband or stopband measurement region")
    return float(10.0 * np.log10(h[pb].mean() / h[sb].mean()))


def simulate_lr(wave: Waveform, cfg: SimConfig, rng: np.random.Generator):
    """Degrade a clip: sampled lowpass, then optional 2x-cutoff rate round trip.

    Returns (degraded Waveform at the input rate and length, FilterSpec used).
    The round-trip rate is 2*cutoff rounded to a multiple of 100 Hz so the
    intermediate rate stays a tidy integer.
    """
    nyq = wave.sample_rate / 2.0
    if cfg.cutoff_hi_hz >= nyq:
        raise ValueError(
            f"cutoff range reaches {cfg.cutoff_hi_hz} Hz but Nyquist is {nyq} Hz"
        )
    spec = sample_filter(cfg, rng)
    out = lowpass_apply(wave, spec)
    if cfg.rate_roundtrip:
        lr_rate = max(200, int(round(2.0 * spec.cutoff_hz / 100.0)) * 100)
        lr_rate = min(lr_rate, wave.sample_rate)
        down = resample_sinc(out, lr_rate)
        up = resample_sinc(down, wave.sample_rate)
        n = wave.samples.size
        y = up.samples
        if y.size >= n:
            y = y[:n]
        else:
            y = np.concatenate([y, np.zeros(n - y.size)])
        out = Waveform(y, wave.sample_rate)
    return out, spec
