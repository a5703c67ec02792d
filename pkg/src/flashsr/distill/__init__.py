from .discriminator import LatentDiscriminator
from .losses import lambda_schedule, loss_distillation, lsgan_discriminator, lsgan_generator
from .trainer import (
    DistillReport,
    DistillState,
    adversarial_losses,
    distill_step,
    dmd_gradient,
    one_step_prediction,
    run_distill,
    snap_to_grid,
    teacher_target,
)

__all__ = [
    "LatentDiscriminator",
    "loss_distillation", "lambda_schedule", "lsgan_generator", "lsgan_discriminator",
    "DistillState", "DistillReport", "distill_step", "run_distill",
    "teacher_target", "one_step_prediction", "dmd_gradient", "adversarial_losses",
    "snap_to_grid",
]
