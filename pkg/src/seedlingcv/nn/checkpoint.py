"""Model serialization.

Container layout (shared by CNN checkpoints and baseline model files,
distinguished by magic):

    bytes 0-7   magic, "SDLCNN01" or "SDLBAS01"
    bytes 8-11  little-endian uint32 header length
    header      UTF-8 JSON: {"config": ..., "label_names": ...,
                 "tensors": [{"name", "shape", "offset", "length"}, ...]}
    payload     concatenated little-endian float32 values, row-major;
                offset/length are byte positions inside the payload

The header JSON is written with sorted keys and no whitespace, so equal
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from ..tensor import SeededRng
from .model import CnnConfig, Model, build_model

MAGIC_CNN = b"SDLCNN01"
MAGIC_BASELINE = b"SDLBAS01"
_HEADER_LEN = struct.Struct("<I")


def write_container(
    path,
    magic: bytes,
    config: dict,
    label_names: list[str] | None,
    tensors: list[tuple[str, np.ndarray]],
) -> None:
    if len(magic) != 8:
        raise CheckpointError(f"magic must be 8 bytes, got {magic!r}")
    entries = []
    blobs = []
    offset = 0
    seen = set()
    for name, array in tensors:
        if name in seen:
            raise CheckpointError(f"duplicate tensor name {name!r}")
        seen.add(name)
        blob = np.ascontiguousarray(array, dtype="<f4").tobytes()
        entries.append({"name": name, "shape": list(array.shape),
                        "offset": offset, "length": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps(
        {"config": config, "label_names": label_names, "tensors": entries},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(_HEADER_LEN.pack(len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def read_container(path, magic: bytes) -> tuple[dict, list[str] | None, dict[str, np.ndarray]]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read model file {path}: {exc.strerror or exc}") from None
    if len(raw) < 12:
        raise CheckpointError(f"{path}: file too short to hold a header")
    if raw[:8] != magic:
        raise CheckpointError(
            f"{path}: magic/version mismatch (expected {magic.decode('ascii')}, found {raw[:8]!r})"
        )
    (header_len,) = _HEADER_LEN.unpack(raw[8:12])
    if 12 + header_len > len(raw):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: header is not valid JSON ({exc})") from None
    payload = raw[12 + header_len:]
    tensors: dict[str, np.ndarray] = {}
    for entry in header.get("tensors", []):
        name = entry["name"]
        shape = tuple(int(s) for s in entry["shape"])
        offset, length = int(entry["offset"]), int(entry["length"])
        expected = int(np.prod(shape, dtype=np.int64)) * 4 if shape else 4
        if length != expected:
            raise CheckpointError(
                f"{path}: tensor {name!r} declares shape {shape} but {length} payload bytes"
            )
        if offset < 0 or offset + length > len(payload):
            raise CheckpointError(f"{path}: tensor {name!r} payload is truncated")
        if name in tensors:
            raise CheckpointError(f"{path}: duplicate tensor name {name!r}")
        tensors[name] = np.frombuffer(payload[offset:offset + length], dtype="<f4").reshape(shape).copy()
    return header.get("config", {}), header.get("label_names"), tensors


def save_checkpoint(model: Model, path, regime: dict | None = None) -> None:
    """Write the model weights and config; regime records how inputs were
    preprocessed (segmentation on/off and its parameters)."""
    config = {"cnn": model.cfg.to_dict()}
    config.update(model.meta)
    if regime is not None:
        config.update(regime)
    tensors = [(p.name, p.value) for p in model.params()]
    write_container(path, MAGIC_CNN, config, model.label_names, tensors)


def load_checkpoint(path) -> Model:
    """Rebuild a model with bit-identical float32 weights."""
    config, label_names, tensors = read_container(path, MAGIC_CNN)
    try:
        cfg = CnnConfig.from_dict(config["cnn"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: bad model config ({exc})") from None
    model = build_model(cfg, SeededRng(cfg.seed), dtype=np.float32)
    params = model.params()
    expected = {p.name for p in params}
    found = set(tensors)
    if expected != found:
        missing = sorted(expected - found)
        extra = sorted(found - expected)
        raise CheckpointError(
            f"{path}: weight set mismatch (missing {missing}, unexpected {extra})"
        )
    for p in params:
        if tensors[p.name].shape != p.value.shape:
            raise CheckpointError(
                f"{path}: tensor {p.name!r} has shape {tensors[p.name].shape}, "
                f"model expects {p.value.shape}"
            )
        p.value[...] = tensors[p.name]
    model.label_names = list(label_names) if label_names is not None else None
    model.meta = {k: v for k, v in config.items() if k != "cnn"}
    return model
