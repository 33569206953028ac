"""Versioned single-file model container.

Layout (little-endian)::

    b"TKLB" | u16 version | u16 reserved
    u32 meta_len | meta (UTF-8 JSON) | u32 crc32(meta)
    u32 n_blobs
    n_blobs x ( u16 name_len | name | u8 ndim | ndim x u32 dim
                | u64 nbytes | float64 data | u32 crc32(name..data) )
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import CorruptFile, IoFailure, UnsupportedVersion
from ..preprocess import ScalingParams
from .spec import ModelSpec
from .training import LossHistory, TrainedModel

MAGIC = b"TKLB"
VERSION = 1


def to_bytes(model: TrainedModel) -> bytes:
    meta = {
        "format": "tickerlab-model",
        "spec": model.spec.as_dict(),
        "scaler": {"min_value": model.scaler.min_value, "max_value": model.scaler.max_value},
        "fingerprint": model.fingerprint,
        "loss_history": model.loss_history.as_dict(),
        "parameters": list(model.params),
    }
    meta_bytes = json.dumps(meta, indent=2, sort_keys=True).encode("utf-8")
    out = bytearray(MAGIC)
    out += struct.pack("<HH", VERSION, 0)
    out += struct.pack("<I", len(meta_bytes)) + meta_bytes
    out += struct.pack("<I", zlib.crc32(meta_bytes))
    out += struct.pack("<I", len(model.params))
    for name, array in model.params.items():
        array = np.ascontiguousarray(array, dtype="<f8")
        name_b = name.encode("utf-8")
        section = struct.pack("<H", len(name_b)) + name_b
        section += struct.pack("<B", array.ndim) + struct.pack(f"<{array.ndim}I", *array.shape)
        data = array.tobytes()
        section += struct.pack("<Q", len(data)) + data
        out += section + struct.pack("<I", zlib.crc32(section))
    return bytes(out)


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise CorruptFile(f"truncated at byte {self.pos} (wanted {n} more)")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def from_bytes(buf: bytes) -> TrainedModel:
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise CorruptFile("not a tickerlab model file (bad magic)")
    version, _ = r.unpack("<HH")
    if version != VERSION:
        raise UnsupportedVersion(f"model format version {version}; this build reads {VERSION}")
    (meta_len,) = r.unpack("<I")
    meta_bytes = r.take(meta_len)
    (crc,) = r.unpack("<I")
    if zlib.crc32(meta_bytes) != crc:
        raise CorruptFile("metadata checksum mismatch")
    try:
        meta = json.loads(meta_bytes.decode("utf-8"))
        spec = ModelSpec(**meta["spec"])
        scaler = ScalingParams(**meta["scaler"])
        history = LossHistory.from_dict(meta["loss_history"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptFile(f"unreadable metadata: {exc}") from None

    (count,) = r.unpack("<I")
    params = {}
    for _ in range(count):
        start = r.pos
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I")
        (nbytes,) = r.unpack("<Q")
        if nbytes != 8 * int(np.prod(shape, dtype=np.int64)):
            raise CorruptFile(f"{name}: byte count does not match shape {shape}")
        data = r.take(nbytes)
        section = r.buf[start:r.pos]
        (crc,) = r.unpack("<I")
        if zlib.crc32(section) != crc:
            raise CorruptFile(f"{name}: checksum mismatch")
        params[name] = np.frombuffer(data, dtype="<f8").reshape(shape).astype(np.float64)
    if r.pos != len(buf):
        raise CorruptFile("trailing bytes after last section")
    if list(params) != meta.get("parameters"):
        raise CorruptFile("parameter table does not match metadata")
    return TrainedModel(spec, params, scaler, meta["fingerprint"], history)


def save(model: TrainedModel, path) -> Path:
    path = Path(path)
    try:
        path.write_bytes(to_bytes(model))
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return path


def load(path) -> TrainedModel:
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return from_bytes(buf)
