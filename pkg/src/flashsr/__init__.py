"""FlashSR: one-step latent-diffusion audio super resolution.

Subpackages: dsp (waveforms, resampling, filters, spectrograms), diffusion
(schedule and samplers), codec (mel VAE), denoiser (v-prediction teacher and
adapters), distill (one-step student training), vocoder (waveform GAN),
evaluation (LSD / STFT-D / RTF). The pipeline module glues trained parts
into an inference model; cli is the operator surface.
"""

from .config import RunConfig, config_hash, desk_profile, paper_profile
from .dsp.io import Waveform, read_wav, write_wav
from .errors import (
    CheckpointError,
    ConfigError,
    FilterRealizationError,
    FlashSRError,
    UndefinedScoreError,
)
from .pipeline import FlashSRModel, load_bundle, save_bundle, upsample_and_restore

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ConfigError",
    "FilterRealizationError",
    "FlashSRError",
    "FlashSRModel",
    "RunConfig",
    "UndefinedScoreError",
    "Waveform",
    "config_hash",
    "desk_profile",
    "load_bundle",
    "paper_profile",
    "read_wav",
    "save_bundle",
    "upsample_and_restore",
    "write_wav",
    "__version__",
]
