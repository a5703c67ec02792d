"""Command-line operator surface.

One command per process. Every command resolves a RunConfig (profile or
config file plus flag overrides), does its work under --out-dir, and writes
a deterministic JSON manifest recording the seed, the config hash, and
git-blob content hashes of every checkpoint it read or wrote. Artifacts
follow the {command}-{step}-{confighash8} naming scheme.

Exit codes: 0 success, 2 checkpoint problems, 3 config problems, 1 anything
else that raises a clean error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import torch

from .checkpoint import (arrays_to_module, content_hash, load_checkpoint,
                         module_to_arrays, save_checkpoint)
from .codec.model import MelCodec
from .codec.train import codec_config_dict, codec_from_config_dict, train_codec
from .config import (RunConfig, config_hash, desk_profile, from_file,
                     paper_profile)
from .data import (VocoderBatches, build_latent_pairs, load_clip_dir,
                   make_synthetic_corpus)
from .denoiser.lora import LoraConfig, apply_lora, bake_lora
from .denoiser.model import VPredictor
from .denoiser.train import (teacher_config_dict, teacher_from_config_dict,
                             train_teacher)
from .diffusion.schedule import CosineSchedule
from .diffusion.timesteps import TimestepDistribution
from .distill.discriminator import LatentDiscriminator
from .distill.trainer import DistillState, run_distill
from .dsp.filters import SimConfig, simulate_lr
from .dsp.io import read_wav, write_wav
from .dsp.spectral import MelConfig, mel_spectrogram
from .errors import CheckpointError, ConfigError, FlashSRError
from .evaluation.harness import eval_suite
from .pipeline import FlashSRModel, upsample_and_restore
from .trainlog import TrainLogger
from .vocoder.discriminators import (MultiPeriodDiscriminator,
                                     MultiScaleCqtDiscriminator)
from .vocoder.generator import SrVocoder
from .vocoder.losses import MultiScaleMelLoss
from .vocoder.train import (train_vocoder, vocoder_config_dict,
                            vocoder_from_config_dict)

_PROFILES = {"desk": desk_profile, "paper": paper_profile}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file; run.profile inside selects the base")
    p.add_argument("--profile", choices=sorted(_PROFILES),
                   help="built-in profile (when no --config)")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--out-dir", help="override run.out_dir")
    p.add_argument("--device", help="override run.device")
    p.add_argument("--steps", type=int,
                   help="override step/epoch count (infer: sampler NFE)")


def _resolve_config(args) -> RunConfig:
    if args.config:
        if args.profile:
            raise ConfigError("--profile conflicts with --config; "
                              "set run.profile inside the file instead")
        cfg = from_file(args.config)
    else:
        cfg = _PROFILES[args.profile or "desk"]()
    if args.seed is not None:
        cfg.run.seed = args.seed
    if args.out_dir:
        cfg.run.out_dir = args.out_dir
    if args.device:
        cfg.run.device = args.device
    if cfg.run.device != "cpu":
        raise ConfigError(f"run.device: only 'cpu' is supported, got {cfg.run.device!r}")
    # Commands build modules before the train loops reseed; without this the
    # init weights float on ambient RNG state and reruns stop being
    # reproducible.
    torch.manual_seed(cfg.run.seed)
    return cfg


def _mel_cfg(cfg: RunConfig) -> MelConfig:
    d = cfg.dsp
    return MelConfig(d.sample_rate, d.window_size, d.hop_size, d.n_mels,
                     log_floor=d.log_floor)


def _sim_cfg(cfg: RunConfig) -> SimConfig:
    s = cfg.sim
    return SimConfig(s.cutoff_lo_hz, s.cutoff_hi_hz, s.order_lo, s.order_hi,
                     tuple(s.families), s.rate_roundtrip)


def _write_manifest(out_dir, command: str, step: int, cfg: RunConfig,
                    checkpoints: dict, extra: dict | None = None) -> str:
    h = config_hash(cfg)
    payload = {
        "command": command,
        "seed": cfg.run.seed,
        "config_hash": h,
        "checkpoints": {name: content_hash(p) for name, p in sorted(checkpoints.items())},
    }
    if extra:
        payload.update(extra)
    path = os.path.join(out_dir, f"{command}-{step:06d}-{h}.json")
    os.makedirs(out_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    return path


def _load_part(path, kind: str, builder):
    ckpt = load_checkpoint(path)
    if ckpt.kind != kind:
        raise CheckpointError(f"{path}: kind {ckpt.kind!r}, expected {kind!r}")
    module = builder(ckpt.config)
    arrays_to_module(ckpt.arrays, module)
    module.eval()
    return module


def _load_dataset(cfg: RunConfig, data_dir):
    return load_clip_dir(data_dir, cfg.dsp.sample_rate, cfg.dsp.clip_seconds)


# -- commands ---------------------------------------------------------------


def cmd_make_data(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    paths = make_synthetic_corpus(out, args.clips, cfg.dsp.sample_rate,
                                  cfg.dsp.clip_seconds, cfg.run.seed)
    _write_manifest(out, "make-data", len(paths), cfg, {},
                    {"clips": [os.path.basename(p) for p in paths]})
    print(f"wrote {len(paths)} clips to {out}")
    return 0


def cmd_simulate_lr(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    dataset = _load_dataset(cfg, args.in_dir)
    sim = _sim_cfg(cfg)
    os.makedirs(out, exist_ok=True)
    items = []
    for idx, (item_id, _cat, wave) in enumerate(dataset):
        rng = np.random.default_rng([cfg.run.seed, idx])
        lr, spec = simulate_lr(wave, sim, rng)
        write_wav(os.path.join(out, f"{item_id}-lr.wav"), lr, encoding="float32")
        items.append({"item_id": item_id, "family": spec.family,
                      "order": spec.order, "cutoff_hz": spec.cutoff_hz})
    _write_manifest(out, "simulate-lr", len(items), cfg, {}, {"items": items})
    print(f"degraded {len(items)} clips into {out}")
    return 0


def cmd_train_codec(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    h = config_hash(cfg)
    mel_cfg = _mel_cfg(cfg)
    dataset = _load_dataset(cfg, args.data_dir)
    mels = [mel_spectrogram(w, mel_cfg) for _, _, w in dataset]
    codec = MelCodec(cfg.codec.channels, cfg.codec.compression, cfg.codec.base_width,
                     mel_cfg, cfg.codec.mel_offset, cfg.codec.mel_scale)
    epochs = args.steps or cfg.codec.epochs
    os.makedirs(out, exist_ok=True)
    logger = TrainLogger(os.path.join(out, f"train-codec-{h}.csv"),
                         ["epoch", "loss", "wall_s"])
    history = train_codec(mels, codec, epochs, cfg.codec.batch_size, cfg.codec.lr,
                          cfg.codec.kl_weight, seed=cfg.run.seed,
                          log_cb=lambda e, l: logger.row(epoch=e, loss=l))
    ckpt = os.path.join(out, f"train-codec-{epochs:06d}-{h}.ckpt")
    save_checkpoint(ckpt, "codec", codec_config_dict(codec), module_to_arrays(codec))
    _write_manifest(out, "train-codec", epochs, cfg, {"codec": ckpt})
    print(f"codec trained for {epochs} epochs, final loss {history[-1]:.6f}; {ckpt}")
    return 0


def cmd_train_teacher(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    h = config_hash(cfg)
    codec = _load_part(args.codec, "codec", codec_from_config_dict)
    dataset = _load_dataset(cfg, args.data_dir)
    pairs = build_latent_pairs(dataset, codec, _sim_cfg(cfg), cfg.run.seed)
    dn = cfg.denoiser
    model = VPredictor(cfg.codec.channels, tuple(dn.widths), dn.time_dim,
                       dn.attn_heads, dn.groups, conditional=True)
    steps = args.steps or dn.steps
    os.makedirs(out, exist_ok=True)
    history = train_teacher(pairs.batch_fn, model, CosineSchedule(), steps,
                            dn.batch_size, dn.lr, dn.cond_dropout, cfg.run.seed,
                            log_path=os.path.join(out, f"train-teacher-{h}.csv"))
    ckpt = os.path.join(out, f"train-teacher-{steps:06d}-{h}.ckpt")
    save_checkpoint(ckpt, "denoiser", teacher_config_dict(model),
                    module_to_arrays(model))
    _write_manifest(out, "train-teacher", steps, cfg,
                    {"codec": args.codec, "teacher": ckpt})
    print(f"teacher trained {steps} steps, final loss {history[-1]:.6f}; {ckpt}")
    return 0


def cmd_distill(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    h = config_hash(cfg)
    codec = _load_part(args.codec, "codec", codec_from_config_dict)
    teacher = _load_part(args.teacher, "denoiser", teacher_from_config_dict)
    dataset = _load_dataset(cfg, args.data_dir)
    pairs = build_latent_pairs(dataset, codec, _sim_cfg(cfg), cfg.run.seed)

    dc = cfg.distill
    student = apply_lora(teacher, LoraConfig(dc.lora_rank, dc.lora_scale))
    disc = LatentDiscriminator(cfg.codec.channels, dc.disc_width)
    pi = TimestepDistribution(cfg.timesteps.centers, cfg.timesteps.stds,
                              cfg.timesteps.weights)
    state = DistillState(teacher, student, disc, CosineSchedule(), pi, dc, out)
    steps = args.steps or dc.steps
    os.makedirs(out, exist_ok=True)
    run_distill(state, pairs.batch_fn, steps, np.random.default_rng(cfg.run.seed),
                log_path=os.path.join(out, f"distill-{h}.csv"))
    adapters = state.snapshot(f"{steps:06d}-{h}")

    plain = bake_lora(student)
    student_ckpt = os.path.join(out, f"student-{steps:06d}-{h}.ckpt")
    save_checkpoint(student_ckpt, "denoiser", teacher_config_dict(plain),
                    module_to_arrays(plain))
    _write_manifest(out, "distill", steps, cfg,
                    {"codec": args.codec, "teacher": args.teacher,
                     "adapters": adapters, "student": student_ckpt})
    print(f"distilled {steps} steps; adapters {adapters}; student {student_ckpt}")
    return 0


def cmd_train_vocoder(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    h = config_hash(cfg)
    mel_cfg = _mel_cfg(cfg)
    vc = cfg.vocoder
    voc = SrVocoder(cfg.dsp.n_mels, tuple(vc.upsample_factors), vc.base_channels,
                    tuple(vc.resblock_kernels), vc.aa_taps,
                    cfg.codec.mel_offset, cfg.codec.mel_scale)
    if voc.hop != cfg.dsp.hop_size:
        raise ConfigError(
            f"vocoder.upsample_factors: product {voc.hop} != dsp.hop_size "
            f"{cfg.dsp.hop_size}")
    mpd = MultiPeriodDiscriminator(tuple(vc.periods))
    mcqt = MultiScaleCqtDiscriminator(cfg.dsp.sample_rate, tuple(vc.cqt_scales),
                                      fmin=vc.cqt_fmin_hz,
                                      bins_per_octave=vc.cqt_bins_per_octave,
                                      n_octaves=vc.cqt_octaves)
    mel_loss = MultiScaleMelLoss(cfg.dsp.sample_rate, tuple(vc.mel_resolutions),
                                 cfg.dsp.n_mels, cfg.dsp.log_floor)
    dataset = _load_dataset(cfg, args.data_dir)
    batches = VocoderBatches(dataset, mel_cfg, _sim_cfg(cfg), voc.hop, cfg.run.seed)
    steps = args.steps or vc.steps
    os.makedirs(out, exist_ok=True)
    history = train_vocoder(batches.batch_fn(vc.segment_frames), voc, mpd, mcqt,
                            mel_loss, steps, vc.batch_size, vc.lr_gen, vc.lr_disc,
                            vc.lr_decay, vc.lambda_mel, vc.lambda_fm, cfg.run.seed,
                            log_path=os.path.join(out, f"train-vocoder-{h}.csv"))
    ckpt = os.path.join(out, f"train-vocoder-{steps:06d}-{h}.ckpt")
    save_checkpoint(ckpt, "vocoder", vocoder_config_dict(voc), module_to_arrays(voc))
    _write_manifest(out, "train-vocoder", steps, cfg, {"vocoder": ckpt})
    print(f"vocoder trained {steps} steps, final gen loss "
          f"{history[-1]['loss_gen']:.6f}; {ckpt}")
    return 0


def _load_model(args) -> tuple[FlashSRModel, dict]:
    parts = {"codec": args.codec, "student": args.student, "vocoder": args.vocoder}
    codec = _load_part(args.codec, "codec", codec_from_config_dict)
    student = _load_part(args.student, "denoiser", teacher_from_config_dict)
    vocoder = _load_part(args.vocoder, "vocoder", vocoder_from_config_dict)
    return FlashSRModel(codec, student, vocoder, CosineSchedule()), parts


def cmd_infer(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    model, parts = _load_model(args)
    wave = read_wav(args.input)
    steps = args.steps or 1
    restored = upsample_and_restore(model, wave, seed=cfg.run.seed, steps=steps)
    dest = args.output
    if not dest:
        os.makedirs(out, exist_ok=True)
        stem = os.path.splitext(os.path.basename(args.input))[0]
        dest = os.path.join(out, f"{stem}-restored.wav")
    write_wav(dest, restored, encoding="float32")
    _write_manifest(os.path.dirname(dest) or ".", "infer", steps, cfg, parts,
                    {"input": os.path.basename(args.input),
                     "output": os.path.basename(dest)})
    print(f"restored {args.input} -> {dest} "
          f"({restored.duration:.2f} s @ {restored.sample_rate} Hz, {steps} NFE)")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    out = cfg.run.out_dir
    h = config_hash(cfg)
    dataset = _load_dataset(cfg, args.data_dir)
    parts = {}
    if args.identity:
        def model_fn(w):
            return w
    else:
        for flag in ("codec", "student", "vocoder"):
            if not getattr(args, flag):
                raise CheckpointError(
                    f"--{flag} is required unless --identity is given")
        model, parts = _load_model(args)

        def model_fn(w):
            return upsample_and_restore(model, w, seed=cfg.run.seed)

    name = "evaluate-identity" if args.identity else "evaluate"
    report = eval_suite(model_fn, dataset, tuple(cfg.eval.cutoffs_hz), _sim_cfg(cfg),
                        cfg.run.seed, cfg.eval.lsd_window, cfg.eval.lsd_hop,
                        out_dir=out, name=f"{name}-{h}")
    _write_manifest(out, name, len(report.rows), cfg, parts,
                    {"overall": report.overall})
    print(f"evaluated {len(dataset)} clips x {len(cfg.eval.cutoffs_hz)} cutoffs: "
          f"LSD {report.overall['lsd']:.4f}, STFT-D {report.overall['stft_d']:.4f}")
    return 0


# -- parser / entry ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flashsr",
                                     description="one-step audio super resolution")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-data", help="write a synthetic full-band corpus")
    p.add_argument("--clips", type=int, default=12)
    _add_common(p)
    p.set_defaults(fn=cmd_make_data)

    p = sub.add_parser("simulate-lr", help="degrade a corpus with random lowpass")
    p.add_argument("--in-dir", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_simulate_lr)

    p = sub.add_parser("train-codec", help="train the mel VAE")
    p.add_argument("--data-dir", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_train_codec)

    p = sub.add_parser("train-teacher", help="train the latent v-prediction teacher")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--codec", required=True, help="codec checkpoint")
    _add_common(p)
    p.set_defaults(fn=cmd_train_teacher)

    p = sub.add_parser("distill", help="distill the teacher into a one-step student")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--codec", required=True)
    p.add_argument("--teacher", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_distill)

    p = sub.add_parser("train-vocoder", help="train the waveform generator")
    p.add_argument("--data-dir", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_train_vocoder)

    p = sub.add_parser("infer", help="restore one wav file")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--codec", required=True)
    p.add_argument("--student", required=True)
    p.add_argument("--vocoder", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("evaluate", help="LSD / STFT-D over a corpus")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--codec")
    p.add_argument("--student")
    p.add_argument("--vocoder")
    p.add_argument("--identity", action="store_true",
                   help="score the unprocessed degraded inputs")
    _add_common(p)
    p.set_defaults(fn=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3
    except CheckpointError as e:
        print(f"checkpoint error: {e}", file=sys.stderr)
        return 2
    except (FlashSRError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
