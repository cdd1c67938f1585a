"""One-vs-rest linear classifiers trained with stochastic subgradient descent.

Each class gets a binary hinge-loss separator with L2 regularization; inputs
are standardized with statistics from the training split. Training is
deterministic for a given seed, and prediction turns per-class margins into
probabilities with a row-wise softmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import FeatureMatrix, ScoreMatrix, as_labels

L2_LAMBDA = 1e-4
EPOCHS = 50
STD_FLOOR = 1e-8
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ClassifierModel:
    """Per-class weight vectors/biases plus the training standardization."""

    model_id: str
    weights: np.ndarray  # (n_classes, n_dims)
    biases: np.ndarray   # (n_classes,)
    mean: np.ndarray     # (n_dims,)
    std: np.ndarray      # (n_dims,), floored at STD_FLOOR

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_dims(self) -> int:
        return self.weights.shape[1]


def train_ovr_linear(features: FeatureMatrix, labels, n_classes: int, seed: int) -> ClassifierModel:
    """Fit one-vs-rest linear separators on standardized features.

    Hinge loss + L2 (lambda=1e-4), 50 epochs of per-sample subgradient steps
    with learning rate 1/(lambda*t) and seed-fixed shuffling. All classes are
    updated in one pass per sample, which keeps the run deterministic and fast.
    """
    y = as_labels(labels, n_classes)
    X = features.values
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"features have {X.shape[0]} samples but labels have {y.shape[0]}")
    if n_classes < 2:
        raise ValueError("n_classes must be at least 2")
    present = np.bincount(y, minlength=n_classes) > 0
    if not present.all():
        missing = int(np.flatnonzero(~present)[0])
        raise ValueError(f"class {missing} absent from training data")

    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), STD_FLOOR)
    # bias trained as a regularized constant feature so it shrinks with the weights
    Z = np.hstack([(X - mean) / std, np.ones((X.shape[0], 1))])

    n_samples, n_aug = Z.shape
    W = np.zeros((n_classes, n_aug))
    # +1 for the sample's own class, -1 for the rest
    Y = np.where(y[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)

    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(EPOCHS):
        for i in rng.permutation(n_samples):
            t += 1
            eta = 1.0 / (L2_LAMBDA * t)
            x = Z[i]
            yi = Y[i]
            violated = yi * (W @ x) < 1.0
            W *= 1.0 - eta * L2_LAMBDA
            if violated.any():
                W[violated] += (eta * yi[violated])[:, None] * x

    return ClassifierModel(features.model_id, W[:, :-1].copy(), W[:, -1].copy(), mean, std)


def predict_scores(model: ClassifierModel, features: FeatureMatrix) -> ScoreMatrix:
    """Softmax over per-class decision margins; rows sum to 1."""
    if features.n_dims != model.n_dims:
        raise ValueError(f"feature dims mismatch: model expects {model.n_dims}, got {features.n_dims}")
    Z = (features.values - model.mean) / model.std
    margins = Z @ model.weights.T + model.biases
    margins -= margins.max(axis=1, keepdims=True)
    probs = np.exp(margins)
    # keep every entry strictly positive even when a margin gap underflows
    probs = np.maximum(probs, PROB_FLOOR)
    probs /= probs.sum(axis=1, keepdims=True)
    return ScoreMatrix(model.model_id, probs)
