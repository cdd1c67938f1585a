"""Writer for the shared binary feature format.

Layout (little-endian): magic "CGFTFEAT", format version u32, model_id length
u32 + UTF-8 bytes, n_samples u64, n_dims u64, then float32 values row-major.
"""

from __future__ import annotations

import struct

import numpy as np

FEATURE_MAGIC = b"CGFTFEAT"
FORMAT_VERSION = 1


def write_feature_file(path, model_id: str, rows: np.ndarray) -> None:
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
        raise ValueError(f"feature rows must be a non-empty 2-D array, got shape {rows.shape}")
    if not np.isfinite(rows).all():
        raise ValueError("feature rows contain non-finite values")
    encoded = model_id.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(encoded)))
        fh.write(encoded)
        fh.write(struct.pack("<QQ", rows.shape[0], rows.shape[1]))
        fh.write(rows.tobytes())
