"""Versioned model checkpoint files.

Layout: an 8-byte little-endian header length, a UTF-8 JSON header, then
all arrays concatenated as little-endian float64 in header order. The
header carries the model kind, layer specs, array directory and the
training-set normalization statistics.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import Model

CHECKPOINT_FORMAT = "fbssvep-checkpoint/1"


def save_checkpoint(path, model: Model, norm_stats=None, meta: dict | None = None):
    arrays = model.named_arrays()
    directory = []
    offset = 0
    for name, arr in arrays:
        directory.append(dict(name=name, shape=list(arr.shape), offset=offset))
        offset += arr.size
    header = dict(
        format=CHECKPOINT_FORMAT,
        model_kind=model.kind,
        n_classes=model.n_classes,
        feature_kind=model.feature_kind,
        input_shape=list(model.input_shape),
        layer_specs=model.layer_specs(),
        norm_stats=list(norm_stats) if norm_stats is not None else None,
        arrays=directory,
        meta=meta or {},
    )
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: unsupported checkpoint format {header.get('format')!r}")
    return header


def load_checkpoint(path, builder) -> tuple[Model, tuple | None, dict]:
    """Rebuild a model from a checkpoint.

    builder(model_kind, n_classes) must return a freshly constructed Model;
    its layer specs are verified against the stored ones before parameters
    are copied in.
    """
    path = Path(path)
    header = read_header(path)
    model = builder(header["model_kind"], header["n_classes"])
    if model.layer_specs() != header["layer_specs"]:
        raise ValueError(f"{path}: layer specs do not match a fresh {header['model_kind']} build")
    with open(path, "rb") as fh:
        (hlen,) = struct.unpack("<Q", fh.read(8))
        fh.seek(8 + hlen)
        blob = np.frombuffer(fh.read(), dtype="<f8")
    live = dict(model.named_arrays())
    for entry in header["arrays"]:
        arr = live.get(entry["name"])
        if arr is None or list(arr.shape) != entry["shape"]:
            raise ValueError(f"{path}: array {entry['name']} missing or wrong shape")
        start = entry["offset"]
        arr[...] = blob[start:start + arr.size].reshape(arr.shape)
    stats = tuple(header["norm_stats"]) if header["norm_stats"] is not None else None
    return model, stats, header.get("meta", {})
