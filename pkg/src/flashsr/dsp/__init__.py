from .io import Waveform, read_wav, write_wav
from .resample import resample_sinc
from .filters import (
    FAMILIES,
    FilterSpec,
    SimConfig,
    STOPBAND_ATTEN_DB,
    design_sos,
    lowpass_apply,
    measure_attenuation_db,
    sample_filter,
    simulate_lr,
)
from .spectral import (
    MelConfig,
    MelSpectrogram,
    frame_count,
    mel_center_freqs,
    mel_filterbank,
    mel_spectrogram,
    stft_mag,
)
from .lfr import BAND_ROWS, LfrResult, lfr_postprocess

__all__ = [
    "Waveform", "read_wav", "write_wav", "resample_sinc",
    "FAMILIES", "FilterSpec", "SimConfig", "STOPBAND_ATTEN_DB",
    "design_sos", "lowpass_apply", "measure_attenuation_db",
    "sample_filter", "simulate_lr",
    "MelConfig", "MelSpectrogram", "frame_count", "mel_center_freqs",
    "mel_filterbank", "mel_spectrogram", "stft_mag",
    "BAND_ROWS", "LfrResult", "lfr_postprocess",
]
