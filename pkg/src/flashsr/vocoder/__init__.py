from .generator import AmpBlock, AntiAliasedSnake, LrEncoder, Snake, SrVocoder, generate_waveform
from .cqt import CqtTransform, cqt_frequencies, cqt_kernel_bank, cqt_magnitude
from .discriminators import (
    CqtSubBandDiscriminator,
    MultiPeriodDiscriminator,
    MultiScaleCqtDiscriminator,
    PeriodDiscriminator,
)
from .losses import (
    MultiScaleMelLoss,
    TorchMel,
    adv_discriminator_loss,
    adv_generator_loss,
    feature_matching_loss,
    msmel_loss,
)
from .train import (
    lr_at_step,
    save_vocoder_checkpoint,
    train_vocoder,
    vocoder_config_dict,
    vocoder_from_config_dict,
)

__all__ = [
    "SrVocoder", "Snake", "AntiAliasedSnake", "AmpBlock", "LrEncoder",
    "generate_waveform",
    "CqtTransform", "cqt_kernel_bank", "cqt_frequencies", "cqt_magnitude",
    "PeriodDiscriminator", "MultiPeriodDiscriminator",
    "CqtSubBandDiscriminator", "MultiScaleCqtDiscriminator",
    "TorchMel", "MultiScaleMelLoss", "feature_matching_loss",
    "adv_generator_loss", "adv_discriminator_loss", "msmel_loss",
    "train_vocoder", "lr_at_step", "vocoder_config_dict",
    "save_vocoder_checkpoint", "vocoder_from_config_dict",
]
