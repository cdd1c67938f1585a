"""Deployable recognizer bundles: classifiers + fusion weights + merge map.

A bundle is a JSON file whose payload is covered by an embedded SHA-256
checksum, so truncated or edited files are rejected at load time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data.manifest import MergedLabelMap
from ..fusion.classifier import ClassifierModel, predict_scores
from ..fusion.combine import late_fuse
from ..fusion.types import FeatureMatrix, ScoreMatrix

BUNDLE_FORMAT = "cgft-model-bundle"
BUNDLE_VERSION = 1


class BundleError(ValueError):
    """Bundle file is unreadable, the wrong version, or fails its checksum."""


@dataclass(frozen=True)
class ModelBundle:
    method: str
    models: tuple[ClassifierModel, ...]
    fusion_weights: np.ndarray
    merge_map: MergedLabelMap
    categories: tuple[str, ...]
    input_dims: tuple[int, ...]
    # names of the raw feature producers, parallel to input_dims (for early
    # bundles the single classifier consumes their concatenation)
    input_model_ids: tuple[str, ...] = ()

    @property
    def n_classes(self) -> int:
        return self.models[0].n_classes


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _checksum(payload: dict) -> str:
    return hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()


def _model_to_dict(model: ClassifierModel) -> dict:
    return {
        "model_id": model.model_id,
        "weights": model.weights.tolist(),
        "biases": model.biases.tolist(),
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
    }


def _model_from_dict(doc: dict) -> ClassifierModel:
    return ClassifierModel(
        doc["model_id"],
        np.asarray(doc["weights"], dtype=np.float64),
        np.asarray(doc["biases"], dtype=np.float64),
        np.asarray(doc["mean"], dtype=np.float64),
        np.asarray(doc["std"], dtype=np.float64),
    )


def save_bundle(bundle: ModelBundle, path) -> None:
    payload = {
        "method": bundle.method,
        "models": [_model_to_dict(m) for m in bundle.models],
        "fusion_weights": np.asarray(bundle.fusion_weights, dtype=np.float64).tolist(),
        "merge_map": {
            "index_map": list(bundle.merge_map.index_map),
            "merged_names": list(bundle.merge_map.merged_names),
            "members": [list(m) for m in bundle.merge_map.members],
        },
        "categories": list(bundle.categories),
        "input_dims": list(bundle.input_dims),
        "input_model_ids": list(bundle.input_model_ids),
    }
    doc = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_bundle(path) -> ModelBundle:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleError(f"cannot read bundle {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BundleError(f"bundle {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != BUNDLE_FORMAT:
        raise BundleError(f"not a {BUNDLE_FORMAT} file")
    if doc.get("version") != BUNDLE_VERSION:
        raise BundleError(f"unsupported bundle version {doc.get('version')!r}")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise BundleError("bundle payload missing")
    if _checksum(payload) != doc.get("checksum"):
        raise BundleError("bundle checksum mismatch: file is corrupt or was edited")
    mm = payload["merge_map"]
    return ModelBundle(
        method=payload["method"],
        models=tuple(_model_from_dict(m) for m in payload["models"]),
        fusion_weights=np.asarray(payload["fusion_weights"], dtype=np.float64),
        merge_map=MergedLabelMap(
            tuple(int(i) for i in mm["index_map"]),
            tuple(mm["merged_names"]),
            tuple(tuple(m) for m in mm["members"]),
        ),
        categories=tuple(payload["categories"]),
        input_dims=tuple(int(d) for d in payload["input_dims"]),
        input_model_ids=tuple(payload.get("input_model_ids", [])),
    )


def split_feature_vectors(bundle: ModelBundle, features) -> list[np.ndarray]:
    """Accept per-model vectors or one flat concatenation; return per-model vectors."""
    total = sum(bundle.input_dims)
    if isinstance(features, np.ndarray):
        nested = features.ndim > 1
    else:
        features = list(features)
        nested = bool(features) and isinstance(features[0], (list, tuple, np.ndarray))
    if nested:
        vectors = [np.asarray(v, dtype=np.float64).ravel() for v in features]
        if len(vectors) != len(bundle.input_dims):
            raise ValueError(f"expected {len(bundle.input_dims)} feature vectors, got {len(vectors)}")
        for v, d in zip(vectors, bundle.input_dims):
            if v.shape[0] != d:
                raise ValueError(f"feature vector dims mismatch: expected {d}, got {v.shape[0]}")
        return vectors
    flat = np.asarray(features, dtype=np.float64).ravel()
    if flat.shape[0] != total:
        raise ValueError(f"feature vector dims mismatch: expected {total} total, got {flat.shape[0]}")
    out = []
    offset = 0
    for d in bundle.input_dims:
        out.append(flat[offset : offset + d])
        offset += d
    return out


def score_features(bundle: ModelBundle, features) -> np.ndarray:
    """Fused class-probability row for one submission."""
    vectors = split_feature_vectors(bundle, features)
    if len(bundle.models) == 1 and len(bundle.input_dims) > 1:
        # early-fusion bundle: one classifier over the concatenation
        matrix = FeatureMatrix(bundle.models[0].model_id, np.concatenate(vectors)[None, :])
        fused = predict_scores(bundle.models[0], matrix)
        return fused.values[0]
    per_model: list[ScoreMatrix] = []
    for model, vector in zip(bundle.models, vectors):
        per_model.append(predict_scores(model, FeatureMatrix(model.model_id, vector[None, :])))
    fused = late_fuse(per_model, bundle.fusion_weights)
    return fused.values[0]
