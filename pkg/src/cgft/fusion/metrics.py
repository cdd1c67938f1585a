"""Macro precision/recall/F-score and accuracy over predicted class scores."""

from __future__ import annotations

import numpy as np

from .types import Metrics, ScoreMatrix, as_labels


def argmax_predict(scores: ScoreMatrix) -> np.ndarray:
    """Per-row argmax; ties break toward the lowest class index."""
    return scores.values.argmax(axis=1)


def harmonic_f_score(precision: float, recall: float) -> float:
    """2PR/(P+R), or 0 when both terms vanish. Unit-agnostic (ratios or percent)."""
    total = precision + recall
    if total <= 0.0:
        return 0.0
    return 2.0 * precision * recall / total


def evaluate(scores: ScoreMatrix, labels) -> Metrics:
    """Macro-averaged precision/recall, harmonic F of the macro means, accuracy.

    Per-class terms with an empty denominator (no predictions for the class,
    or no true samples of it) count as zero. All values are percentages.
    """
    y = as_labels(labels, scores.n_classes)
    if y.shape[0] != scores.n_samples:
        raise ValueError(f"labels have {y.shape[0]} entries for {scores.n_samples} samples")
    preds = argmax_predict(scores)
    k = scores.n_classes

    tp = np.bincount(y[preds == y], minlength=k).astype(np.float64)
    pred_counts = np.bincount(preds, minlength=k).astype(np.float64)
    true_counts = np.bincount(y, minlength=k).astype(np.float64)

    precision = np.divide(tp, pred_counts, out=np.zeros(k), where=pred_counts > 0)
    recall = np.divide(tp, true_counts, out=np.zeros(k), where=true_counts > 0)

    avg_precision = 100.0 * float(precision.mean())
    avg_recall = 100.0 * float(recall.mean())
    accuracy = 100.0 * float(np.mean(preds == y))
    return Metrics(
        avg_precision=avg_precision,
        avg_recall=avg_recall,
        f_score=harmonic_f_score(avg_precision, avg_recall),
        accuracy=accuracy,
    )
