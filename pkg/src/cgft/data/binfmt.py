"""Binary feature-matrix and label files shared across tools.

Feature file, little-endian throughout:
    magic "CGFTFEAT" | format version u32 | model_id length u32 + UTF-8 bytes
    | n_samples u64 | n_dims u64 | n_samples*n_dims float32 row-major
Labels file:
    magic "CGFTLBLS" | n u64 | n class indices as u32
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..fusion.types import FeatureMatrix

FEATURE_MAGIC = b"CGFTFEAT"
LABELS_MAGIC = b"CGFTLBLS"
FORMAT_VERSION = 1


class BinaryFormatError(ValueError):
    """File does not conform to the binary feature/label layout."""


def write_features(path, features: FeatureMatrix) -> None:
    model_id = features.model_id.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(model_id)))
        fh.write(model_id)
        fh.write(struct.pack("<QQ", features.n_samples, features.n_dims))
        fh.write(np.ascontiguousarray(features.values, dtype="<f4").tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise BinaryFormatError(f"truncated file: expected {count} bytes for {what}, got {len(data)}")
    return data


def read_features(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(FEATURE_MAGIC), "magic")
        if magic != FEATURE_MAGIC:
            raise BinaryFormatError(f"bad magic {magic!r}, expected {FEATURE_MAGIC!r}")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != FORMAT_VERSION:
            raise BinaryFormatError(f"unsupported format version {version}")
        (id_len,) = struct.unpack("<I", _read_exact(fh, 4, "model_id length"))
        model_id = _read_exact(fh, id_len, "model_id").decode("utf-8")
        n_samples, n_dims = struct.unpack("<QQ", _read_exact(fh, 16, "shape"))
        if n_samples == 0 or n_dims == 0:
            raise BinaryFormatError(f"empty feature matrix ({n_samples} x {n_dims})")
        payload = _read_exact(fh, n_samples * n_dims * 4, "feature values")
        if fh.read(1):
            raise BinaryFormatError("trailing bytes after feature values")
    values = np.frombuffer(payload, dtype="<f4").reshape(n_samples, n_dims)
    try:
        return FeatureMatrix(model_id, values.astype(np.float64))
    except ValueError as exc:
        raise BinaryFormatError(str(exc)) from exc


def write_labels(path, labels) -> None:
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 0xFFFFFFFF):
        raise ValueError("labels must fit in u32")
    with open(path, "wb") as fh:
        fh.write(LABELS_MAGIC)
        fh.write(struct.pack("<Q", arr.size))
        fh.write(arr.astype("<u4").tobytes())


def read_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(LABELS_MAGIC), "magic")
        if magic != LABELS_MAGIC:
            raise BinaryFormatError(f"bad magic {magic!r}, expected {LABELS_MAGIC!r}")
        (count,) = struct.unpack("<Q", _read_exact(fh, 8, "count"))
        payload = _read_exact(fh, count * 4, "labels")
        if fh.read(1):
            raise BinaryFormatError("trailing bytes after labels")
    return np.frombuffer(payload, dtype="<u4").astype(np.int64)


def exists_or_raise(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise BinaryFormatError(f"no such file: {p}")
    return p
