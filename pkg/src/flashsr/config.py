"""Run configuration: dataclass schema, two built-in profiles, INI round trip.

The file format is flat ``[section]`` blocks of ``key = value`` pairs, one
section per sub-config. Parsing is schema-driven: unknown sections or keys
are rejected with the offending path, values are converted by the declared
field type, and ``to_text`` -> ``from_text`` is lossless (floats are written
with repr, which round-trips exactly).

``config_hash`` is the first 8 hex chars of sha256 over the canonical text,
used to tag checkpoints and manifests.
"""

from __future__ import annotations

import dataclasses
import hashlib
import typing

from .errors import ConfigError


@dataclasses.dataclass
class RunSection:
    profile: str = "desk"
    seed: int = 0
    device: str = "cpu"
    out_dir: str = "runs"


@dataclasses.dataclass
class DspSection:
    sample_rate: int = 16000
    clip_seconds: float = 1.0
    window_size: int = 640
    hop_size: int = 160
    n_mels: int = 64
    log_floor: float = 1e-5


@dataclasses.dataclass
class SimSection:
    cutoff_lo_hz: float = 700.0
    cutoff_hi_hz: float = 5000.0
    order_lo: int = 2
    order_hi: int = 10
    families: tuple[str, ...] = ("butterworth", "chebyshev", "bessel", "elliptic")
    rate_roundtrip: bool = True


@dataclasses.dataclass
class CodecSection:
    channels: int = 16
    compression: int = 8
    base_width: int = 32
    kl_weight: float = 1e-4
    epochs: int = 30
    batch_size: int = 4
    lr: float = 2e-3
    mel_offset: float = -6.0
    mel_scale: float = 3.0


@dataclasses.dataclass
class DenoiserSection:
    widths: tuple[int, ...] = (32, 64, 96)
    time_dim: int = 128
    attn_heads: int = 4
    groups: int = 8
    cond_dropout: float = 0.1
    steps: int = 2000
    batch_size: int = 8
    lr: float = 1e-3


@dataclasses.dataclass
class TimestepSection:
    centers: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    stds: tuple[float, ...] = (0.1, 0.1, 0.1, 0.1)
    weights: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)


@dataclasses.dataclass
class DistillSection:
    omega: float = 4.0
    lambda_adv_final: float = 0.3
    lambda_dmd_final: float = 0.7
    ramp_period: int = 5000
    ramp_end: int = 20000
    t_double_prime_set: tuple[float, ...] = (0.01, 0.25, 0.5, 0.75)
    solver_steps: int = 8
    steps: int = 1000
    batch_size: int = 4
    lr: float = 1e-4
    disc_width: int = 64
    disc_lr: float = 1e-4
    dmd_normalize: bool = True
    lora_rank: int = 8
    lora_scale: float = 1.0


@dataclasses.dataclass
class VocoderSection:
    upsample_factors: tuple[int, ...] = (5, 4, 4, 2)
    base_channels: int = 96
    resblock_kernels: tuple[int, ...] = (3, 7)
    periods: tuple[int, ...] = (2, 3, 5, 7, 11)
    cqt_bins_per_octave: int = 12
    cqt_octaves: int = 6
    cqt_fmin_hz: float = 80.0
    cqt_scales: tuple[int, ...] = (1,)
    aa_taps: int = 12
    lambda_mel: float = 45.0
    lambda_fm: float = 2.0
    mel_resolutions: tuple[int, ...] = (256, 640, 1024)
    steps: int = 2000
    batch_size: int = 2
    lr_gen: float = 1e-4
    lr_disc: float = 1e-4
    lr_decay: float = 0.9999996
    segment_frames: int = 48


@dataclasses.dataclass
class EvalSection:
    cutoffs_hz: tuple[float, ...] = (1333.0, 2667.0, 4000.0)
    lsd_window: int = 2048
    lsd_hop: int = 512
    rtf_repeats: int = 5


@dataclasses.dataclass
class RunConfig:
    run: RunSection = dataclasses.field(default_factory=RunSection)
    dsp: DspSection = dataclasses.field(default_factory=DspSection)
    sim: SimSection = dataclasses.field(default_factory=SimSection)
    codec: CodecSection = dataclasses.field(default_factory=CodecSection)
    denoiser: DenoiserSection = dataclasses.field(default_factory=DenoiserSection)
    timesteps: TimestepSection = dataclasses.field(default_factory=TimestepSection)
    distill: DistillSection = dataclasses.field(default_factory=DistillSection)
    vocoder: VocoderSection = dataclasses.field(default_factory=VocoderSection)
    eval: EvalSection = dataclasses.field(default_factory=EvalSection)


def desk_profile() -> RunConfig:
    """Small 16 kHz profile sized to train on one CPU in minutes."""
    return RunConfig()


def paper_profile() -> RunConfig:
    """48 kHz profile with the published hyperparameters."""
    cfg = RunConfig()
    cfg.run.profile = "paper"
    cfg.dsp = DspSection(sample_rate=48000, clip_seconds=5.12, window_size=2048,
                         hop_size=480, n_mels=256)
    cfg.sim = SimSection(cutoff_lo_hz=2000.0, cutoff_hi_hz=16000.0)
    cfg.codec.base_width = 64
    cfg.denoiser = DenoiserSection(widths=(64, 128, 192), steps=100000, batch_size=16,
                                   lr=1e-4)
    cfg.distill = DistillSection(steps=30000, batch_size=16, lr=1e-5, disc_lr=1e-5)
    cfg.vocoder = VocoderSection(upsample_factors=(5, 4, 4, 3, 2), base_channels=256,
                                 steps=2500000, batch_size=4, lr_gen=5e-5, lr_disc=1e-4,
                                 cqt_octaves=7, cqt_scales=(1, 2),
                                 mel_resolutions=(512, 1024, 2048),
                                 segment_frames=64)
    cfg.eval = EvalSection(cutoffs_hz=(4000.0, 8000.0, 12000.0))
    return cfg


_PROFILES = {"desk": desk_profile, "paper": paper_profile}


def _field_types(cls) -> dict:
    return typing.get_type_hints(cls)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    return str(v)


def _parse_value(text: str, ftype, path: str):
    text = text.strip()
    try:
        if ftype is bool:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a bool: {text!r}")
        if ftype is int:
            return int(text)
        if ftype is float:
            return float(text)
        if ftype is str:
            return text
        if typing.get_origin(ftype) is tuple:
            elem = typing.get_args(ftype)[0]
            if text == "":
                return ()
            return tuple(_parse_value(p, elem, path) for p in text.split(","))
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e
    raise ConfigError(f"{path}: unsupported field type {ftype!r}")


def to_text(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        section = getattr(cfg, f.name)
        lines.append(f"[{f.name}]")
        for sf in dataclasses.fields(section):
            lines.append(f"{sf.name} = {_format_value(getattr(section, sf.name))}")
        lines.append("")
    return "\n".join(lines)


def from_text(text: str) -> RunConfig:
    """Parse config text; starts from the profile named inside, then overrides."""
    sections: dict[str, dict[str, str]] = {}
    current = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {ln}: key outside any [section]")
        key, val = line.split("=", 1)
        sections[current][key.strip()] = val.strip()

    profile = sections.get("run", {}).get("profile", "desk")
    if profile not in _PROFILES:
        raise ConfigError(f"run.profile: unknown profile {profile!r}")
    cfg = _PROFILES[profile]()

    section_names = {f.name for f in dataclasses.fields(cfg)}
    for sec, kv in sections.items():
        if sec not in section_names:
            raise ConfigError(f"unknown section [{sec}]")
        target = getattr(cfg, sec)
        types = _field_types(type(target))
        known = {f.name for f in dataclasses.fields(target)}
        for key, val in kv.items():
            if key not in known:
                raise ConfigError(f"{sec}.{key}: unknown key")
            setattr(target, key, _parse_value(val, types[key], f"{sec}.{key}"))
    return cfg


def to_file(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_text(cfg))


def from_file(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return from_text(text)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(to_text(cfg).encode("utf-8")).hexdigest()[:8]
