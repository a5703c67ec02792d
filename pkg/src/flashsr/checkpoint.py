"""Single-file checkpoint container and content hashing.

Layout: 8-byte magic, little-endian uint64 header length, UTF-8 JSON header,
then raw array bytes back to back. The header carries a format version, a
``kind`` tag (codec / denoiser / vocoder / ...), the producing config as a
JSON object, and an index of array name/dtype/shape/offset. Arrays are
written in C order, little-endian.

``content_hash`` is the git blob convention (sha1 over "blob {size}\\0" +
bytes) so hashes can be cross-checked with ``git hash-object``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os

import numpy as np
import torch

from .errors import CheckpointError

MAGIC = b"FSRCKPT1"
FORMAT_VERSION = 1


@dataclasses.dataclass
class Checkpoint:
    kind: str
    config: dict
    arrays: dict  # name -> np.ndarray
    version: int = FORMAT_VERSION


def save_checkpoint(path, kind: str, config: dict, arrays: dict) -> None:
    """Write a checkpoint atomically (temp file + rename)."""
    index = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        a = np.asarray(arrays[name])
        if not a.flags["C_CONTIGUOUS"]:  # ascontiguousarray would 1-D-ify 0-d arrays
            a = np.ascontiguousarray(a)
        if a.dtype.byteorder == ">":
            a = a.astype(a.dtype.newbyteorder("<"))
        b = a.tobytes()
        index.append({
            "name": name,
            "dtype": a.dtype.str,
            "shape": list(a.shape),
            "offset": offset,
            "nbytes": len(b),
        })
        blobs.append(b)
        offset += len(b)
    header = json.dumps(
        {"version": FORMAT_VERSION, "kind": kind, "config": config, "arrays": index},
        sort_keys=True,
    ).encode("utf-8")
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(len(header).to_bytes(8, "little"))
        f.write(header)
        for b in blobs:
            f.write(b)
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    """Read and validate a checkpoint; malformed files raise CheckpointError."""
    if not os.path.exists(path):
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a checkpoint file")
    hlen = int.from_bytes(data[len(MAGIC): len(MAGIC) + 8], "little")
    start = len(MAGIC) + 8
    if start + hlen > len(data):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(data[start: start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable header: {e}") from e
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported version {header.get('version')!r}")
    body = data[start + hlen:]
    arrays = {}
    for ent in header["arrays"]:
        end = ent["offset"] + ent["nbytes"]
        if end > len(body):
            raise CheckpointError(f"{path}: truncated array {ent['name']!r}")
        a = np.frombuffer(body[ent["offset"]: end], dtype=np.dtype(ent["dtype"]))
        arrays[ent["name"]] = a.reshape(ent["shape"]).copy()
    return Checkpoint(header["kind"], header["config"], arrays, header["version"])


def content_hash(path) -> str:
    """Git-blob sha1 of a file's bytes."""
    with open(path, "rb") as f:
        data = f.read()
    h = hashlib.sha1()
    h.update(f"blob {len(data)}\0".encode("ascii"))
    h.update(data)
    return h.hexdigest()


def module_to_arrays(module: torch.nn.Module, prefix: str = "") -> dict:
    """Flatten a module state dict to name -> numpy array."""
    out = {}
    for k, v in module.state_dict().items():
        out[prefix + k] = v.detach().cpu().numpy()
    return out


def arrays_to_module(arrays: dict, module: torch.nn.Module, prefix: str = "") -> None:
    """Load name -> numpy arrays back into a module (strict key match)."""
    sd = module.state_dict()
    want = {prefix + k for k in sd}
    have = {k for k in arrays if k.startswith(prefix)}
    if want != have:
        missing = sorted(want - have)[:4]
        extra = sorted(have - want)[:4]
        raise CheckpointError(f"state mismatch: missing {missing}, unexpected {extra}")
    new_sd = {}
    for k, v in sd.items():
        a = arrays[prefix + k]
        if tuple(a.shape) != tuple(v.shape):
            raise CheckpointError(f"shape mismatch for {k}: {a.shape} vs {tuple(v.shape)}")
        new_sd[k] = torch.from_numpy(np.ascontiguousarray(a)).to(v.dtype)
    module.load_state_dict(new_sd)
