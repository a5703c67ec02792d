"""One-step student training: distillation, DMD, and adversarial objectives.

The step body mirrors the training algorithm exactly: diffuse the clean
latent at t_i drawn from pi(t), let the student jump to t=0 in one
prediction, walk the frozen teacher down the solver grid for the target,
then update the student on the weighted three-part loss and the
discriminator on its own LSGAN loss.

t_i is drawn once per batch (the teacher inner loop needs a single grid for
the whole batch) and snapped to the nearest solver grid point, never below
the first one.
"""

from __future__ import annotations

import dataclasses
import os

import numpy as np
import torch

from ..checkpoint import module_to_arrays, save_checkpoint
from ..config import DistillSection
from ..denoiser.lora import lora_arrays, lora_parameters
from ..diffusion.sampler import cfg_combine, ode_step
from ..diffusion.schedule import (
    CosineSchedule,
    diffuse_forward,
    eps_from_v,
    score_from_eps,
    x0_from_v,
)
from ..diffusion.timesteps import TimestepDistribution, sample_timestep
from ..trainlog import TrainLogger
from .discriminator import LatentDiscriminator
from .losses import lambda_schedule, loss_distillation, lsgan_discriminator, lsgan_generator


def _rand(rng: np.random.Generator, shape) -> torch.Tensor:
    return torch.from_numpy(rng.standard_normal(shape).astype(np.float32))


def snap_to_grid(t: float, solver_steps: int) -> float:
    """Nearest grid point i/S with i >= 1."""
    i = int(round(t * solver_steps))
    return max(1, min(i, solver_steps)) / solver_steps


def one_step_prediction(student, sched: CosineSchedule, z_ti: torch.Tensor,
                        t_i: float, z_l: torch.Tensor) -> torch.Tensor:
    """z_hat_t0 = alpha z_ti - sigma f_theta(z_ti, t_i, z_l)."""
    return x0_from_v(sched, z_ti, student(z_ti, t_i, z_l), t_i)


def teacher_target(teacher, sched: CosineSchedule, z_ti: torch.Tensor, t_i: float,
                   z_l: torch.Tensor, omega: float, solver_steps: int) -> torch.Tensor:
    """Walk the frozen teacher from t_i down the uniform grid to t=0 with CFG."""
    i = round(t_i * solver_steps)
    if abs(t_i * solver_steps - i) > 1e-9 or i < 1:
        raise ValueError(f"t_i={t_i} is not on the {solver_steps}-point solver grid")
    z = z_ti
    with torch.no_grad():
        for j in range(i - 1, -1, -1):
            t_from = (j + 1) / solver_steps
            v_c = teacher(z, t_from, z_l)
            v_u = teacher(z, t_from, None)
            v_hat = cfg_combine(v_c, v_u, omega)
            z = ode_step(sched, z, v_hat, t_from, j / solver_steps)
    return z


def dmd_gradient(student, teacher, sched: CosineSchedule, z_hat_t0: torch.Tensor,
                 z_l: torch.Tensor, omega: float, rng: np.random.Generator,
                 normalize: bool = True):
    """Surrogate loss whose gradient injects -(s_eta - s_theta) at the
    re-noised sample, plus the mean score gap for logging.

    The generated latent is perturbed at t' ~ U(0,1); both scores are taken
    at that point (teacher with fixed-omega CFG, student conditional) with no
    gradient through the score networks. Backprop reaches the student only
    through z_hat_t0 inside the perturbed sample.
    """
    b = z_hat_t0.shape[0]
    t = rng.uniform(0.0, 1.0, size=b)
    while np.any(t <= 0.0):
        t[t <= 0.0] = rng.uniform(0.0, 1.0, size=int(np.sum(t <= 0.0)))
    t_t = torch.from_numpy(t).to(z_hat_t0.dtype)
    eps = _rand(rng, tuple(z_hat_t0.shape)).to(z_hat_t0.dtype)
    x_t = diffuse_forward(sched, z_hat_t0, t_t, eps)
    with torch.no_grad():
        v_c = teacher(x_t, t_t, z_l)
        v_u = teacher(x_t, t_t, None)
        v_teacher = cfg_combine(v_c, v_u, omega)
        s_teacher = score_from_eps(sched, eps_from_v(sched, x_t, v_teacher, t_t), t_t)
        v_student = student(x_t, t_t, z_l)
        s_student = score_from_eps(sched, eps_from_v(sched, x_t, v_student, t_t), t_t)
        gap = s_teacher - s_student
        g = -gap
        if normalize:
            norm = gap.abs().mean(dim=tuple(range(1, gap.ndim)), keepdim=True) + 1e-8
            g = g / norm
    surrogate = 0.5 * ((x_t - (x_t - g).detach()) ** 2).sum() / b
    return surrogate, float(gap.abs().mean())


def adversarial_losses(disc: LatentDiscriminator, teacher, sched: CosineSchedule,
                       z_h: torch.Tensor, z_hat_t0: torch.Tensor, z_l: torch.Tensor,
                       t_set, rng: np.random.Generator):
    """LSGAN losses on teacher v-outputs of perturbed real/generated latents.

    Returns (L_adv, L_disc, t_double_prime). L_adv keeps the graph through
    the student; L_disc sees the generated path detached.
    """
    t_dp = float(t_set[int(rng.integers(len(t_set)))])
    eps_f = _rand(rng, tuple(z_hat_t0.shape)).to(z_hat_t0.dtype)
    eps_r = _rand(rng, tuple(z_h.shape)).to(z_h.dtype)
    x_fake = diffuse_forward(sched, z_hat_t0, t_dp, eps_f)
    v_fake = teacher(x_fake, t_dp, z_l)
    with torch.no_grad():
        x_real = diffuse_forward(sched, z_h, t_dp, eps_r)
        v_real = teacher(x_real, t_dp, z_l)
    l_adv = lsgan_generator(disc(v_fake))
    l_disc = lsgan_discriminator(disc(v_real), disc(v_fake.detach()))
    return l_adv, l_disc, t_dp


@dataclasses.dataclass
class DistillReport:
    step: int
    loss_total: float
    loss_distil: float
    loss_dmd: float
    loss_adv: float
    loss_disc: float
    lambda_adv: float
    lambda_dmd: float
    t_i: float


class DistillState:
    """Owns the student/discriminator optimizers and the step counter."""

    def __init__(self, teacher, student, disc: LatentDiscriminator,
                 sched: CosineSchedule, pi: TimestepDistribution,
                 cfg: DistillSection, out_dir=None):
        self.teacher = teacher
        self.student = student
        self.disc = disc
        self.sched = sched
        self.pi = pi
        self.cfg = cfg
        self.out_dir = out_dir
        self.step = 0
        self.teacher.eval()
        for p in self.teacher.parameters():
            p.requires_grad_(False)
        params = list(lora_parameters(student))
        if not params:
            params = [p for p in student.parameters() if p.requires_grad]
        if not params:
            raise ValueError("student has no trainable parameters")
        self.opt_student = torch.optim.AdamW(params, lr=cfg.lr, weight_decay=1e-2)
        self.opt_disc = torch.optim.AdamW(disc.parameters(), lr=cfg.disc_lr,
                                          weight_decay=1e-2)

    def snapshot(self, tag: str) -> str | None:
        if self.out_dir is None:
            return None
        arrays = lora_arrays(self.student)
        if not arrays:
            arrays = module_to_arrays(self.student, "student/")
        arrays.update(module_to_arrays(self.disc, "disc/"))
        cfg = dataclasses.asdict(self.cfg)
        cfg["step"] = self.step
        path = os.path.join(self.out_dir, f"distill-{tag}.ckpt")
        save_checkpoint(path, "distill", cfg, arrays)
        return path


def distill_step(state: DistillState, batch, rng: np.random.Generator) -> DistillReport:
    """One full student + discriminator update on a (z_h, z_l) batch."""
    z_h, z_l = batch
    if z_h.shape != z_l.shape:
        raise ValueError(f"z_h shape {tuple(z_h.shape)} != z_l shape {tuple(z_l.shape)}")
    cfg = state.cfg
    sched = state.sched

    t_i = snap_to_grid(sample_timestep(state.pi, rng), cfg.solver_steps)
    eps = _rand(rng, tuple(z_h.shape)).to(z_h.dtype)
    z_ti = diffuse_forward(sched, z_h, t_i, eps)

    z_hat_t0 = one_step_prediction(state.student, sched, z_ti, t_i, z_l)
    z_t0 = teacher_target(state.teacher, sched, z_ti, t_i, z_l, cfg.omega,
                          cfg.solver_steps)
    l_distil = loss_distillation(z_hat_t0, z_t0)

    lam_adv, lam_dmd = lambda_schedule(state.step, cfg.lambda_adv_final,
                                       cfg.lambda_dmd_final, cfg.ramp_period,
                                       cfg.ramp_end)
    dmd_metric = 0.0
    loss_total = l_distil
    if lam_dmd > 0:
        surrogate, dmd_metric = dmd_gradient(state.student, state.teacher, sched,
                                             z_hat_t0, z_l, cfg.omega, rng,
                                             cfg.dmd_normalize)
        loss_total = loss_total + lam_dmd * surrogate

    l_adv_val = 0.0
    if lam_adv > 0:
        l_adv, l_disc_gen_path, _ = adversarial_losses(
            state.disc, state.teacher, sched, z_h, z_hat_t0, z_l,
            cfg.t_double_prime_set, rng)
        loss_total = loss_total + lam_adv * l_adv
        l_adv_val = float(l_adv.detach())
    else:
        l_disc_gen_path = None

    if not torch.isfinite(loss_total):
        path = state.snapshot(f"nan-step{state.step:06d}")
        raise RuntimeError(
            f"non-finite student loss at step {state.step} "
            f"(distil={float(l_distil):.4g}); snapshot: {path}"
        )
    state.opt_student.zero_grad()
    loss_total.backward()
    state.opt_student.step()

    # discriminator trains every step, also before the adversarial ramp
    if l_disc_gen_path is None:
        _, l_disc, _ = adversarial_losses(
            state.disc, state.teacher, sched, z_h, z_hat_t0.detach(), z_l,
            cfg.t_double_prime_set, rng)
    else:
        l_disc = l_disc_gen_path
    if not torch.isfinite(l_disc):
        path = state.snapshot(f"nan-step{state.step:06d}")
        raise RuntimeError(f"non-finite discriminator loss at step {state.step}; "
                           f"snapshot: {path}")
    state.opt_disc.zero_grad()
    l_disc.backward()
    state.opt_disc.step()

    report = DistillReport(
        step=state.step,
        loss_total=float(loss_total.detach()),
        loss_distil=float(l_distil.detach()),
        loss_dmd=dmd_metric,
        loss_adv=l_adv_val,
        loss_disc=float(l_disc.detach()),
        lambda_adv=lam_adv,
        lambda_dmd=lam_dmd,
        t_i=t_i,
    )
    state.step += 1
    return report


def run_distill(state: DistillState, batch_fn, steps: int, rng: np.random.Generator,
                log_path=None, ckpt_every: int = 0):
    """Run ``steps`` updates; batch_fn(rng, n) -> (z_h, z_l) float tensors."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    logger = None
    if log_path:
        logger = TrainLogger(log_path, ["step", "loss_total", "loss_distil",
                                        "loss_dmd", "loss_adv", "loss_disc",
                                        "lambda_adv", "lambda_dmd", "wall_s"])
    reports = []
    for _ in range(steps):
        batch = batch_fn(rng, state.cfg.batch_size)
        rep = distill_step(state, batch, rng)
        reports.append(rep)
        if logger:
            logger.row(step=rep.step, loss_total=rep.loss_total,
                       loss_distil=rep.loss_distil, loss_dmd=rep.loss_dmd,
                       loss_adv=rep.loss_adv, loss_disc=rep.loss_disc,
                       lambda_adv=rep.lambda_adv, lambda_dmd=rep.lambda_dmd)
        if ckpt_every and state.out_dir and rep.step % ckpt_every == 0:
            state.snapshot(f"step{rep.step:06d}")
    return reports
