"""Core value types shared by the classifier and fusion stages."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-6


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-model feature vectors, one row per sample."""

    model_id: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {values.shape}")
        if values.shape[0] == 0 or values.shape[1] == 0:
            raise ValueError(f"feature matrix must be non-empty, got shape {values.shape}")
        finite_rows = np.isfinite(values).all(axis=1)
        if not finite_rows.all():
            bad = int(np.flatnonzero(~finite_rows)[0])
            raise ValueError(f"non-finite feature value in sample {bad}")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    def rows(self, index) -> "FeatureMatrix":
        """Row-subset view (used for split selection)."""
        return FeatureMatrix(self.model_id, self.values[index].copy())


@dataclass(frozen=True)
class ScoreMatrix:
    """Class-probability rows produced by one classifier (or a fusion of them)."""

    model_id: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise ValueError(f"score matrix must be non-empty 2-D, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("score matrix contains non-finite values")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("score matrix entries must lie in [0, 1]")
        sums = values.sum(axis=1)
        if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(f"score row {bad} sums to {sums[bad]!r}, expected 1 within {ROW_SUM_TOL}")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Metrics:
    """Macro-averaged evaluation summary, all fields as percentages."""

    avg_precision: float
    avg_recall: float
    f_score: float
    accuracy: float


def as_labels(labels, n_classes: int | None = None) -> np.ndarray:
    """Validate and coerce a label vector to an int64 array."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        flo = np.asarray(labels, dtype=np.float64)
        if not np.all(flo == np.floor(flo)):
            raise ValueError("labels must be integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ValueError("labels must be non-negative")
    if n_classes is not None and arr.size and arr.max() >= n_classes:
        raise ValueError(f"label {int(arr.max())} out of range for {n_classes} classes")
    return arr
