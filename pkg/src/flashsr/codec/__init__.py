from .model import LatentGrid, MelCodec, decode, encode
from .train import (
    codec_config_dict,
    codec_from_config_dict,
    fit_latent_scale,
    kl_term,
    train_codec,
)

__all__ = [
    "LatentGrid", "MelCodec", "encode", "decode",
    "train_codec", "fit_latent_scale", "kl_term",
    "codec_config_dict", "codec_from_config_dict",
]
