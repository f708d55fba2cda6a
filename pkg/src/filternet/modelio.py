"""Binary container for trained models and optimizer checkpoints.

Layout: 4 magic bytes, one format version byte, a 4-byte little-endian
header length, a JSON header (spec fields plus an ordered tensor table
of name, shape, offset), the raw little-endian float32 blobs in table
order, and a trailing CRC-32 of every preceding byte. Model files use
magic FNET, optimizer checkpoints FNCK.
"""
from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .errors import ModelFormatError
from .model import ModelSpec, Params, spec_from_dict, spec_to_dict

MODEL_MAGIC = b"FNET"
CHECKPOINT_MAGIC = b"FNCK"
FORMAT_VERSION = 1


def _pack(magic: bytes, header: dict, tensors: list) -> bytes:
    table = []
    blobs = []
    offset = 0
    for name, arr in tensors:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        table.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blob = arr.tobytes()
        blobs.append(blob)
        offset += len(blob)
    header = dict(header)
    header["tensors"] = table
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = (magic + struct.pack("<B", FORMAT_VERSION)
            + struct.pack("<I", len(header_bytes)) + header_bytes + b"".join(blobs))
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def _unpack(path: str, expect_magic: bytes) -> tuple:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file: {path}: {exc}") from None
    if len(raw) < 13:
        raise ModelFormatError(f"{path}: too short to be a model file")
    magic = raw[:4]
    if magic not in (MODEL_MAGIC, CHECKPOINT_MAGIC):
        raise ModelFormatError(f"{path}: bad magic bytes {magic!r}")
    if magic != expect_magic:
        kind = "checkpoint" if magic == CHECKPOINT_MAGIC else "model"
        want = "checkpoint" if expect_magic == CHECKPOINT_MAGIC else "model"
        raise ModelFormatError(f"{path}: this is a {kind} file, expected a {want} file")
    version = raw[4]
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format version {version} (supported: {FORMAT_VERSION})"
        )
    (stored_crc,) = struct.unpack("<I", raw[-4:])
    if zlib.crc32(raw[:-4]) & 0xFFFFFFFF != stored_crc:
        raise ModelFormatError(f"{path}: checksum mismatch, file is corrupt")
    (header_len,) = struct.unpack("<I", raw[5:9])
    header_end = 9 + header_len
    if header_end > len(raw) - 4:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[9:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: unreadable header: {exc}") from None
    blob_region = raw[header_end:-4]
    tensors = {}
    cursor_max = 0
    for item in header.get("tensors", []):
        shape = tuple(int(v) for v in item["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        start = int(item["offset"])
        end = start + count * 4
        if end > len(blob_region):
            raise ModelFormatError(f"{path}: truncated tensor data for {item['name']!r}")
        tensors[item["name"]] = np.frombuffer(
            blob_region, dtype="<f4", count=count, offset=start
        ).reshape(shape).copy()
        cursor_max = max(cursor_max, end)
    if cursor_max != len(blob_region):
        raise ModelFormatError(f"{path}: {len(blob_region) - cursor_max} stray bytes after tensors")
    return header, tensors


def _params_from(tensors: dict, prefix: str, path: str) -> Params:
    fields = {}
    for name in Params.FIELDS:
        key = prefix + name
        if key not in tensors:
            raise ModelFormatError(f"{path}: missing tensor {key!r}")
        fields[name] = tensors[key]
    return Params(**fields)


def save_model(path: str, spec: ModelSpec, params: Params) -> None:
    header = {"kind": "model", "spec": spec_to_dict(spec)}
    with open(path, "wb") as fh:
        fh.write(_pack(MODEL_MAGIC, header, params.items()))


def load_model(path: str) -> tuple:
    header, tensors = _unpack(path, MODEL_MAGIC)
    if header.get("kind") != "model":
        raise ModelFormatError(f"{path}: header kind {header.get('kind')!r} is not 'model'")
    try:
        spec = spec_from_dict(header["spec"])
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{path}: bad spec header: {exc}") from None
    return spec, _params_from(tensors, "", path)


def save_checkpoint(path: str, spec: ModelSpec, params: Params, state,
                    epochs_done: int = 0) -> None:
    """Persist params plus full Adam state so training can resume exactly."""
    header = {
        "kind": "checkpoint",
        "spec": spec_to_dict(spec),
        "step": state.step,
        "learning_rate": state.learning_rate,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "epsilon": state.epsilon,
        "epochs_done": epochs_done,
    }
    tensors = list(params.items())
    tensors += [("m." + name, arr) for name, arr in sorted(state.m.items())]
    tensors += [("v." + name, arr) for name, arr in sorted(state.v.items())]
    with open(path, "wb") as fh:
        fh.write(_pack(CHECKPOINT_MAGIC, header, tensors))


def load_checkpoint(path: str) -> tuple:
    """Returns (spec, params, adam_state, epochs_done)."""
    from .adam import AdamState

    header, tensors = _unpack(path, CHECKPOINT_MAGIC)
    if header.get("kind") != "checkpoint":
        raise ModelFormatError(f"{path}: header kind {header.get('kind')!r} is not 'checkpoint'")
    try:
        spec = spec_from_dict(header["spec"])
        params = _params_from(tensors, "", path)
        m = {name: tensors["m." + name] for name in Params.FIELDS}
        v = {name: tensors["v." + name] for name in Params.FIELDS}
        state = AdamState(
            learning_rate=float(header["learning_rate"]),
            beta1=float(header["beta1"]),
            beta2=float(header["beta2"]),
            epsilon=float(header["epsilon"]),
            step=int(header["step"]),
            m=m,
            v=v,
        )
        return spec, params, state, int(header.get("epochs_done", 0))
    except KeyError as exc:
        raise ModelFormatError(f"{path}: missing checkpoint field: {exc}") from None
