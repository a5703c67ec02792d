"""Config schema: profiles, INI round trip, error paths, hashing."""

import dataclasses

import pytest

from flashsr.config import (
    RunConfig,
    config_hash,
    desk_profile,
    from_file,
    from_text,
    paper_profile,
    to_file,
    to_text,
)
from flashsr.errors import ConfigError


def test_desk_defaults():
    cfg = desk_profile()
    assert cfg.run.profile == "desk"
    assert cfg.dsp.sample_rate == 16000
    assert cfg.dsp.window_size == 640 and cfg.dsp.hop_size == 160
    assert cfg.dsp.n_mels == 64
    assert cfg.vocoder.upsample_factors == (5, 4, 4, 2)
    # vocoder hop must equal the dsp hop
    prod = 1
    for u in cfg.vocoder.upsample_factors:
        prod *= u
    assert prod == cfg.dsp.hop_size


def test_paper_profile_values():
    cfg = paper_profile()
    assert cfg.run.profile == "paper"
    assert cfg.dsp.sample_rate == 48000
    assert cfg.dsp.window_size == 2048 and cfg.dsp.hop_size == 480
    assert cfg.dsp.n_mels == 256
    assert cfg.dsp.clip_seconds == 5.12
    assert cfg.vocoder.upsample_factors == (5, 4, 4, 3, 2)
    assert cfg.distill.omega == 4.0
    assert cfg.distill.lambda_adv_final == 0.3
    assert cfg.distill.lambda_dmd_final == 0.7
    assert cfg.vocoder.lambda_mel == 45.0
    assert cfg.vocoder.lr_decay == 0.9999996
    assert cfg.eval.cutoffs_hz == (4000.0, 8000.0, 12000.0)


def test_text_round_trip_lossless():
    cfg = desk_profile()
    cfg.distill.lr = 3.7e-5
    cfg.sim.families = ("elliptic",)
    cfg.vocoder.lr_decay = 0.123456789012345
    text = to_text(cfg)
    back = from_text(text)
    assert back == cfg
    assert to_text(back) == text


def test_paper_round_trip():
    text = to_text(paper_profile())
    assert from_text(text) == paper_profile()


def test_profile_seeding_with_overrides():
    cfg = from_text("[run]\nprofile = paper\n\n[distill]\nsteps = 5\n")
    assert cfg.dsp.sample_rate == 48000  # paper base
    assert cfg.distill.steps == 5  # override applied
    assert cfg.distill.omega == 4.0  # untouched default survives


def test_unknown_profile():
    with pytest.raises(ConfigError):
        from_text("[run]\nprofile = server\n")


def test_unknown_section_and_key_paths():
    with pytest.raises(ConfigError, match=r"\[optimizer\]"):
        from_text("[optimizer]\nlr = 1\n")
    with pytest.raises(ConfigError, match="distill.momentum"):
        from_text("[distill]\nmomentum = 0.9\n")


def test_bad_value_reports_path():
    with pytest.raises(ConfigError, match="distill.steps"):
        from_text("[distill]\nsteps = soon\n")
    with pytest.raises(ConfigError, match="sim.rate_roundtrip"):
        from_text("[sim]\nrate_roundtrip = maybe\n")


def test_syntax_errors():
    with pytest.raises(ConfigError, match="line 1"):
        from_text("key_without_section = 1\n")
    with pytest.raises(ConfigError):
        from_text("[run]\njust some words\n")


def test_bool_and_tuple_parsing():
    cfg = from_text("[sim]\nrate_roundtrip = false\nfamilies = bessel, elliptic\n")
    assert cfg.sim.rate_roundtrip is False
    assert cfg.sim.families == ("bessel", "elliptic")
    cfg2 = from_text("[timesteps]\ncenters = 0.5\nstds = 0.0\nweights = 1.0\n")
    assert cfg2.timesteps.centers == (0.5,)


def test_file_round_trip(tmp_path):
    p = tmp_path / "run.ini"
    cfg = desk_profile()
    cfg.run.seed = 7
    to_file(cfg, p)
    assert from_file(p) == cfg


def test_missing_file():
    with pytest.raises(ConfigError):
        from_file("/nonexistent/path/run.ini")


def test_config_hash_stability():
    a = desk_profile()
    b = desk_profile()
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 8
    b.distill.steps += 1
    assert config_hash(a) != config_hash(b)


def test_all_sections_present_in_text():
    text = to_text(desk_profile())
    for f in dataclasses.fields(RunConfig):
        assert f"[{f.name}]" in text
