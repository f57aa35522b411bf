"""Single-file checkpoint container.

Layout: magic, 8-byte big-endian header length, JSON header (format
version, model kind, feature-layout version, normalization statistics,
model/train config, ordered parameter manifest), then the raw
little-endian parameter blobs in manifest order.  Byte-stable for
identical models.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Union

import numpy as np
import torch

from wahls.errors import CorruptCheckpoint, VersionMismatch
from wahls.featurize import FEATURE_LAYOUT_VERSION, NormStats
from wahls.surrogates.models import build_model
from wahls.surrogates.train import TrainedModel

MAGIC = b"WAHLSCKPT\n"
FORMAT_VERSION = 1

_DTYPES = {"float32": np.float32, "float64": np.float64, "int64": np.int64}


def save_checkpoint(model: TrainedModel) -> bytes:
    state = model.module.state_dict()
    manifest = []
    blobs = []
    for name, tensor in state.items():
        array = tensor.detach().cpu().numpy()
        if array.dtype.name not in _DTYPES:
            raise ValueError(f"unsupported parameter dtype {array.dtype} for {name}")
        manifest.append({"name": name, "shape": list(array.shape), "dtype": array.dtype.name})
        blobs.append(np.ascontiguousarray(array).astype(array.dtype.newbyteorder("<")).tobytes())
    header = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "feature_layout_version": model.feature_layout_version,
        "cost_model_version": model.cost_model_version,
        "norm_stats": model.norm_stats.to_dict(),
        "part_vocab": list(model.part_vocab),
        "model_config": model.model_config,
        "train_config": model.train_config,
        "history": model.history,
        "params": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return MAGIC + len(header_bytes).to_bytes(8, "big") + header_bytes + b"".join(blobs)


def load_checkpoint(data: bytes) -> TrainedModel:
    """Rebuild a trained model; its predictions match the saved one exactly.

    Raises :class:`CorruptCheckpoint` on truncated or malformed bytes and
    :class:`VersionMismatch` on an incompatible format or feature layout.
    """
    if not data.startswith(MAGIC):
        raise CorruptCheckpoint("bad magic bytes")
    try:
        header_len = int.from_bytes(data[len(MAGIC) : len(MAGIC) + 8], "big")
        header_start = len(MAGIC) + 8
        header = json.loads(data[header_start : header_start + header_len])
    except (ValueError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict) or "params" not in header:
        raise CorruptCheckpoint("header missing parameter manifest")

    if header.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"checkpoint format {header.get('format_version')} != supported {FORMAT_VERSION}"
        )
    layout = header.get("feature_layout_version")
    if layout != FEATURE_LAYOUT_VERSION:
        raise VersionMismatch(
            f"checkpoint feature layout {layout!r} != current {FEATURE_LAYOUT_VERSION!r}"
        )

    module = build_model(header["kind"], header["model_config"])
    state = {}
    offset = header_start + header_len
    for entry in header["params"]:
        dtype = _DTYPES[entry["dtype"]]
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        nbytes = count * dtype().itemsize
        blob = data[offset : offset + nbytes]
        if len(blob) != nbytes:
            raise CorruptCheckpoint(f"truncated blob for parameter {entry['name']}")
        array = np.frombuffer(blob, dtype=np.dtype(dtype).newbyteorder("<")).reshape(entry["shape"])
        state[entry["name"]] = torch.as_tensor(array.astype(dtype))
        offset += nbytes
    if offset != len(data):
        raise CorruptCheckpoint(f"{len(data) - offset} trailing bytes after parameter blobs")
    module.load_state_dict(state)
    module.eval()

    return TrainedModel(
        kind=header["kind"],
        module=module,
        norm_stats=NormStats.from_dict(header["norm_stats"]),
        model_config=header["model_config"],
        train_config=header.get("train_config"),
        feature_layout_version=layout,
        cost_model_version=header.get("cost_model_version", ""),
        part_vocab=tuple(header.get("part_vocab", [])),
        history=header.get("history", {"train_loss": [], "val_loss": []}),
    )


def checkpoint_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def save_checkpoint_file(model: TrainedModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(save_checkpoint(model))
    return path


def load_checkpoint_file(path: Union[str, Path]) -> TrainedModel:
    return load_checkpoint(Path(path).read_bytes())
