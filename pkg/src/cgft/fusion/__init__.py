"""Late-fusion meal recognizer core: classifiers, fusion, metrics, weight search."""

from .classifier import ClassifierModel, predict_scores, train_ovr_linear
from .combine import early_fuse, equal_weights, fitness, late_fuse
from .metrics import argmax_predict, evaluate, harmonic_f_score
from .optimize import (
    GaConfig,
    OptimizeResult,
    PsoConfig,
    optimize_weights_ga,
    optimize_weights_pso,
)
from .types import FeatureMatrix, Metrics, ScoreMatrix, as_labels

__all__ = [
    "ClassifierModel",
    "FeatureMatrix",
    "GaConfig",
    "Metrics",
    "OptimizeResult",
    "PsoConfig",
    "ScoreMatrix",
    "argmax_predict",
    "as_labels",
    "early_fuse",
    "equal_weights",
    "evaluate",
    "fitness",
    "harmonic_f_score",
    "late_fuse",
    "optimize_weights_ga",
    "optimize_weights_pso",
    "predict_scores",
    "train_ovr_linear",
]
