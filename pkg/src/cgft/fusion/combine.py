"""Early and late fusion of per-model outputs, plus the optimizer objective."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .types import FeatureMatrix, ScoreMatrix, as_labels

EARLY_FUSION_ID = "early-fusion"
LATE_FUSION_ID = "late-fusion"


def early_fuse(features: Sequence[FeatureMatrix]) -> FeatureMatrix:
    """Concatenate feature columns of every model, preserving sample order."""
    if not features:
        raise ValueError("early_fuse needs at least one feature matrix")
    n = features[0].n_samples
    for fm in features[1:]:
        if fm.n_samples != n:
            raise ValueError(
                f"sample-count mismatch: {features[0].model_id} has {n}, {fm.model_id} has {fm.n_samples}"
            )
    return FeatureMatrix(EARLY_FUSION_ID, np.hstack([fm.values for fm in features]))


def equal_weights(n_models: int) -> np.ndarray:
    """The simple-averaging weight vector: every model gets 1/n."""
    if n_models < 1:
        raise ValueError("n_models must be at least 1")
    return np.full(n_models, 1.0 / n_models)


def check_weights(weights, n_models: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != n_models:
        raise ValueError(f"expected {n_models} weights, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    if w.min() < 0.0 or w.max() > 1.0:
        raise ValueError("weights must lie in [0, 1]")
    if not (w > 0).any():
        raise ValueError("at least one weight must be positive")
    return w


def stack_scores(scores: Sequence[ScoreMatrix]) -> np.ndarray:
    """Validate a score-matrix list and stack it into an (m, n, c) tensor."""
    if not scores:
        raise ValueError("need at least one score matrix")
    shape = scores[0].values.shape
    for sm in scores[1:]:
        if sm.values.shape != shape:
            raise ValueError(
                f"score shape mismatch: {scores[0].model_id} is {shape}, {sm.model_id} is {sm.values.shape}"
            )
    return np.stack([sm.values for sm in scores])


def late_fuse(scores: Sequence[ScoreMatrix], weights) -> ScoreMatrix:
    """Weighted sum of per-model probability rows, renormalized to sum 1."""
    stacked = stack_scores(scores)
    w = check_weights(weights, stacked.shape[0])
    fused = np.tensordot(w, stacked, axes=1)
    fused /= fused.sum(axis=1, keepdims=True)
    return ScoreMatrix(LATE_FUSION_ID, fused)


def fitness(weights, scores: Sequence[ScoreMatrix], labels) -> float:
    """Fusion error on a validation set: 1 minus fused argmax accuracy."""
    stacked = stack_scores(scores)
    w = check_weights(weights, stacked.shape[0])
    y = as_labels(labels, stacked.shape[2])
    if y.shape[0] != stacked.shape[1]:
        raise ValueError(f"labels have {y.shape[0]} entries for {stacked.shape[1]} samples")
    return fitness_from_stack(w, stacked, y)


def fitness_from_stack(w: np.ndarray, stacked: np.ndarray, y: np.ndarray) -> float:
    # argmax of the weighted sum equals argmax of the renormalized fusion,
    # so the per-row division is skipped here
    fused = np.tensordot(w, stacked, axes=1)
    preds = fused.argmax(axis=1)
    return 1.0 - float(np.mean(preds == y))
