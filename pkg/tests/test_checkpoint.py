"""Checkpoint container: round trips, corruption handling, content hashing."""

import json
import os
import subprocess

import numpy as np
import pytest
import torch

from flashsr.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    arrays_to_module,
    content_hash,
    load_checkpoint,
    module_to_arrays,
    save_checkpoint,
)
from flashsr.errors import CheckpointError


def _sample_arrays(rng):
    return {
        "w": rng.standard_normal((3, 4)).astype(np.float32),
        "b": rng.standard_normal(4),
        "step": np.array(17, dtype=np.int64),  # 0-d must survive
        "flag": np.array([1, 0, 1], dtype=np.int32),
    }


def test_round_trip(tmp_path, rng):
    p = tmp_path / "m.ckpt"
    arrays = _sample_arrays(rng)
    cfg = {"lr": 1e-4, "widths": [32, 64]}
    save_checkpoint(p, "codec", cfg, arrays)
    ck = load_checkpoint(p)
    assert ck.kind == "codec"
    assert ck.config == cfg
    assert ck.version == FORMAT_VERSION
    assert set(ck.arrays) == set(arrays)
    for k in arrays:
        assert ck.arrays[k].dtype == arrays[k].dtype
        assert ck.arrays[k].shape == arrays[k].shape
        np.testing.assert_array_equal(ck.arrays[k], arrays[k])


def test_zero_dim_array_shape(tmp_path):
    p = tmp_path / "z.ckpt"
    save_checkpoint(p, "x", {}, {"s": np.array(2.5)})
    back = load_checkpoint(p).arrays["s"]
    assert back.shape == ()
    assert back == 2.5


def test_noncontiguous_input(tmp_path, rng):
    p = tmp_path / "nc.ckpt"
    a = rng.standard_normal((6, 6)).T  # Fortran-ordered view
    assert not a.flags["C_CONTIGUOUS"]
    save_checkpoint(p, "x", {}, {"a": a})
    np.testing.assert_array_equal(load_checkpoint(p).arrays["a"], a)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "nope.ckpt")


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.ckpt"
    p.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_truncated_header(tmp_path):
    p = tmp_path / "t.ckpt"
    p.write_bytes(MAGIC + (10**6).to_bytes(8, "little") + b"{}")
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_corrupt_json(tmp_path):
    hdr = b"{not json"
    p = tmp_path / "j.ckpt"
    p.write_bytes(MAGIC + len(hdr).to_bytes(8, "little") + hdr)
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_unsupported_version(tmp_path):
    hdr = json.dumps({"version": 99, "kind": "x", "config": {}, "arrays": []}).encode()
    p = tmp_path / "v.ckpt"
    p.write_bytes(MAGIC + len(hdr).to_bytes(8, "little") + hdr)
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_truncated_array(tmp_path, rng):
    p = tmp_path / "a.ckpt"
    save_checkpoint(p, "x", {}, {"w": rng.standard_normal(64)})
    data = p.read_bytes()
    p.write_bytes(data[:-16])
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_no_temp_left_behind(tmp_path, rng):
    p = tmp_path / "clean.ckpt"
    save_checkpoint(p, "x", {}, {"w": rng.standard_normal(4)})
    names = os.listdir(tmp_path)
    assert names == ["clean.ckpt"]


def test_content_hash_matches_git(tmp_path, rng):
    p = tmp_path / "h.ckpt"
    save_checkpoint(p, "x", {"a": 1}, {"w": rng.standard_normal(8)})
    ours = content_hash(p)
    git = subprocess.run(["git", "hash-object", str(p)],
                         capture_output=True, text=True)
    if git.returncode == 0:
        assert ours == git.stdout.strip()
    # stable across identical rewrites
    save_checkpoint(tmp_path / "h2.ckpt", "x", {"a": 1},
                    {"w": load_checkpoint(p).arrays["w"]})
    assert content_hash(tmp_path / "h2.ckpt") == ours


def test_module_arrays_round_trip():
    torch.manual_seed(0)
    m = torch.nn.Sequential(torch.nn.Linear(4, 3), torch.nn.Linear(3, 2))
    arrays = module_to_arrays(m, prefix="net/")
    m2 = torch.nn.Sequential(torch.nn.Linear(4, 3), torch.nn.Linear(3, 2))
    arrays_to_module(arrays, m2, prefix="net/")
    for a, b in zip(m.parameters(), m2.parameters()):
        assert torch.equal(a, b)


def test_arrays_to_module_strictness():
    m = torch.nn.Linear(4, 3)
    arrays = module_to_arrays(m)
    del arrays["bias"]
    with pytest.raises(CheckpointError):
        arrays_to_module(arrays, torch.nn.Linear(4, 3))
    arrays = module_to_arrays(m)
    arrays["ghost"] = np.zeros(1)
    with pytest.raises(CheckpointError):
        arrays_to_module(arrays, torch.nn.Linear(4, 3))
    arrays = module_to_arrays(m)
    arrays["weight"] = arrays["weight"][:, :2]
    with pytest.raises(CheckpointError):
        arrays_to_module(arrays, torch.nn.Linear(4, 3))
