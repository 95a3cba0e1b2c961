"""Versioned binary checkpoints for network parameters.

Layout (little-endian):

    magic   4s  b"CHGM"
    version u16
    hdrlen  u32  length of the JSON header that follows
    header  JSON: network config, free-form metadata, optimizer scalars,
            and an array manifest (name, dtype, shape) in storage order
    arrays  raw bytes of each manifest entry, C-order, little-endian

Optimizer accumulators are stored under "opt.G/<param>" and
"opt.D/<param>" names so training can resume exactly.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .adadelta import AdadeltaState
from .network import Network, NetworkConfig

MAGIC = b"CHGM"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")


class CheckpointError(Exception):
    """A checkpoint file that cannot be read; message names the file."""


def _le_dtype(array: np.ndarray) -> np.dtype:
    return array.dtype.newbyteorder("<")


def save_checkpoint(
    path: str | Path,
    network: Network,
    meta: dict | None = None,
    optimizer: AdadeltaState | None = None,
) -> Path:
    """Write atomically (temp then rename); returns the final path."""
    path = Path(path)
    arrays: list[tuple[str, np.ndarray]] = sorted(network.params.items())
    opt_header = None
    if optimizer is not None:
        opt_header = {"gamma": optimizer.gamma, "epsilon": optimizer.epsilon}
        arrays += sorted(
            (f"opt.G/{name}", acc) for name, acc in optimizer.grad_acc.items()
        )
        arrays += sorted(
            (f"opt.D/{name}", acc) for name, acc in optimizer.update_acc.items()
        )
    manifest = [
        {"name": name, "dtype": _le_dtype(a).str, "shape": list(a.shape)}
        for name, a in arrays
    ]
    header = {
        "config": network.config.to_dict(),
        "meta": meta or {},
        "optimizer": opt_header,
        "arrays": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as f:
            f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
            f.write(header_bytes)
            for _, a in arrays:
                f.write(np.ascontiguousarray(a, dtype=_le_dtype(a)).tobytes())
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    return path


def load_checkpoint(
    path: str | Path,
) -> tuple[Network, dict, AdadeltaState | None]:
    """Read a checkpoint; returns (network, metadata, optimizer or None)."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _PREFIX.size:
        raise CheckpointError(f"{path}: truncated prefix")
    magic, version, hdrlen = _PREFIX.unpack(raw[: _PREFIX.size])
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    try:
        header = json.loads(raw[_PREFIX.size : _PREFIX.size + hdrlen])
    except ValueError as exc:
        raise CheckpointError(f"{path}: bad header: {exc}") from exc
    offset = _PREFIX.size + hdrlen
    loaded: dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * dtype.itemsize
        if offset + nbytes > len(raw):
            raise CheckpointError(f"{path}: truncated array {entry['name']}")
        loaded[entry["name"]] = (
            np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
            .reshape(shape)
            .copy()
        )
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")

    config = NetworkConfig.from_dict(header["config"])
    params = {k: v for k, v in loaded.items() if not k.startswith("opt.")}
    network = Network(config, params)
    optimizer = None
    if header.get("optimizer") is not None:
        optimizer = AdadeltaState(
            gamma=header["optimizer"]["gamma"],
            epsilon=header["optimizer"]["epsilon"],
            grad_acc={
                k[len("opt.G/") :]: v
                for k, v in loaded.items()
                if k.startswith("opt.G/")
            },
            update_acc={
                k[len("opt.D/") :]: v
                for k, v in loaded.items()
                if k.startswith("opt.D/")
            },
        )
    return network, header.get("meta", {}), optimizer
