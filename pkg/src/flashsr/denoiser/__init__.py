from .model import SelfAttention2d, VPredictor, predict_v, time_embedding
from .lora import (
    DEFAULT_TARGETS,
    LoraConfig,
    LoraLinear,
    apply_lora,
    load_lora_arrays,
    lora_arrays,
    lora_parameters,
    merge_lora,
    strip_lora,
    unmerge_lora,
)
from .train import (
    save_teacher_checkpoint,
    teacher_config_dict,
    teacher_from_config_dict,
    train_teacher,
)

__all__ = [
    "VPredictor", "SelfAttention2d", "predict_v", "time_embedding",
    "LoraConfig", "LoraLinear", "DEFAULT_TARGETS", "apply_lora",
    "lora_parameters", "merge_lora", "unmerge_lora", "strip_lora",
    "lora_arrays", "load_lora_arrays",
    "train_teacher", "teacher_config_dict", "save_teacher_checkpoint",
    "teacher_from_config_dict",
]
