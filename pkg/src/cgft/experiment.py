"""End-to-end experiments: train per-model classifiers, search fusion weights,
evaluate the four fusion methods, and export deployable bundles.

Everything here is deterministic for a given config + seed; two runs write
byte-identical artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data.binfmt import BinaryFormatError, read_features, read_labels
from .data.manifest import (
    DatasetManifest,
    ManifestError,
    MergedLabelMap,
    apply_merge,
    build_merge_map,
    load_manifest,
    original_labels,
)
from .data.splits import split_dataset, split_indices
from .data.synthetic import SynthConfig, generate_synthetic
from .fusion.classifier import ClassifierModel, predict_scores, train_ovr_linear
from .fusion.combine import early_fuse, equal_weights, fitness, late_fuse
from .fusion.metrics import evaluate, harmonic_f_score
from .fusion.optimize import GaConfig, OptimizeResult, PsoConfig, optimize_weights_ga, optimize_weights_pso
from .fusion.types import FeatureMatrix, Metrics
from .service.bundle import ModelBundle, save_bundle

METHOD_ORDER = ("pso", "ga", "early", "equal")
METHOD_LABELS = {
    "pso": "PSO based Fusion",
    "ga": "GA based Fusion",
    "early": "Early Fusion",
    "equal": "Equal weights",
}


class ConfigError(ValueError):
    """The experiment config is malformed."""


class DataError(ValueError):
    """Input data is missing or inconsistent."""


@dataclass(frozen=True)
class ExperimentConfig:
    synth: SynthConfig | None
    feature_paths: tuple[str, ...]
    labels_path: str | None
    manifest_path: str | None
    ratios: tuple[float, float, float]
    split_seed: int
    classifier_seed: int
    pso: PsoConfig
    ga: GaConfig
    output_dir: str | None
    raw: dict = field(repr=False, default_factory=dict)


@dataclass
class MethodResult:
    method: str
    weights: np.ndarray
    validation_fitness: float
    metrics: Metrics
    history: tuple[float, ...] = ()


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    methods: dict[str, MethodResult]
    per_model_validation: dict[str, float]
    models: list[ClassifierModel]
    early_model: ClassifierModel
    merge_map: MergedLabelMap
    manifest: DatasetManifest
    input_dims: tuple[int, ...]
    test_probe: dict


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    data = doc.get("data")
    if not isinstance(data, dict):
        raise ConfigError("config needs a 'data' section")

    synth = None
    feature_paths: tuple[str, ...] = ()
    labels_path = None
    manifest_path = None
    if "synthetic" in data:
        s = data["synthetic"]
        try:
            synth = SynthConfig(
                n_models=int(s["n_models"]),
                n_classes=int(s["n_classes"]),
                n_dims=tuple(s["n_dims"]) if isinstance(s.get("n_dims"), list) else int(s["n_dims"]),
                samples_per_class=int(s["samples_per_class"]),
                confusable=tuple(
                    tuple(tuple(int(c) for c in pair) for pair in model)
                    for model in s.get("confusable", [])
                ),
                noise_std=float(s.get("noise_std", 1.0)),
                seed=int(s.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad synthetic config: {exc}") from exc
    elif "features" in data:
        feature_paths = tuple(str(p) for p in data["features"])
        labels_path = data.get("labels")
        manifest_path = data.get("manifest")
        if not feature_paths or labels_path is None or manifest_path is None:
            raise ConfigError("file-backed data needs 'features', 'labels' and 'manifest'")
    else:
        raise ConfigError("data section needs either 'synthetic' or 'features'")

    splits = doc.get("splits", {})
    ratios = tuple(float(r) for r in splits.get("ratios", (0.6, 0.2, 0.2)))
    if len(ratios) != 3:
        raise ConfigError("splits.ratios must have three entries")
    split_seed = int(splits.get("seed", 42))

    classifier_seed = int(doc.get("classifier", {}).get("seed", 7))

    optimizers = doc.get("optimizers", {})
    try:
        pso = PsoConfig(**optimizers.get("pso", {}))
        ga = GaConfig(**optimizers.get("ga", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad optimizer config: {exc}") from exc

    output_dir = doc.get("output", {}).get("dir")
    return ExperimentConfig(
        synth=synth,
        feature_paths=feature_paths,
        labels_path=labels_path,
        manifest_path=manifest_path,
        ratios=ratios,
        split_seed=split_seed,
        classifier_seed=classifier_seed,
        pso=pso,
        ga=ga,
        output_dir=output_dir,
        raw=doc,
    )


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such config file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def _load_inputs(config: ExperimentConfig):
    if config.synth is not None:
        matrices, labels, manifest = generate_synthetic(config.synth)
        return list(matrices), labels, manifest
    try:
        matrices = [read_features(p) for p in config.feature_paths]
        labels = read_labels(config.labels_path)
        manifest = load_manifest(config.manifest_path)
    except (BinaryFormatError, ManifestError, OSError) as exc:
        raise DataError(str(exc)) from exc
    n = matrices[0].n_samples
    for fm in matrices:
        if fm.n_samples != n:
            raise DataError(f"feature files disagree on sample count: {fm.model_id}")
    if labels.shape[0] != n:
        raise DataError(f"labels file has {labels.shape[0]} entries for {n} samples")
    if len(manifest.samples) != n:
        raise DataError(f"manifest has {len(manifest.samples)} samples, features have {n}")
    file_labels = original_labels(manifest)
    if not np.array_equal(file_labels, labels):
        raise DataError("labels file disagrees with manifest categories")
    return matrices, labels, manifest


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    matrices, labels, manifest = _load_inputs(config)
    merge_map = build_merge_map(manifest)
    merged = apply_merge(labels, merge_map)
    n_classes = merge_map.n_merged
    if n_classes < 2:
        raise DataError("need at least two merged classes to train")

    try:
        manifest = split_dataset(manifest, config.ratios, config.split_seed)
    except (ManifestError, ValueError) as exc:
        raise DataError(str(exc)) from exc
    idx = split_indices(manifest)
    train_idx, val_idx, test_idx = idx["train"], idx["validation"], idx["test"]

    models: list[ClassifierModel] = []
    val_scores = []
    test_scores = []
    for fm in matrices:
        model = train_ovr_linear(fm.rows(train_idx), merged[train_idx], n_classes, config.classifier_seed)
        models.append(model)
        val_scores.append(predict_scores(model, fm.rows(val_idx)))
        test_scores.append(predict_scores(model, fm.rows(test_idx)))

    y_val = merged[val_idx]
    y_test = merged[test_idx]
    n_models = len(matrices)

    per_model_validation = {
        matrices[i].model_id: fitness(np.eye(n_models)[i], val_scores, y_val)
        for i in range(n_models)
    }

    pso_result = optimize_weights_pso(val_scores, y_val, config.pso)
    ga_result = optimize_weights_ga(val_scores, y_val, config.ga)
    eq = equal_weights(n_models)

    early_train = early_fuse([fm.rows(train_idx) for fm in matrices])
    early_model = train_ovr_linear(early_train, merged[train_idx], n_classes, config.classifier_seed)
    early_val = predict_scores(early_model, early_fuse([fm.rows(val_idx) for fm in matrices]))
    early_test = predict_scores(early_model, early_fuse([fm.rows(test_idx) for fm in matrices]))

    methods = {
        "pso": MethodResult(
            "pso",
            pso_result.weights,
            pso_result.fitness,
            evaluate(late_fuse(test_scores, pso_result.weights), y_test),
            pso_result.history,
        ),
        "ga": MethodResult(
            "ga",
            ga_result.weights,
            ga_result.fitness,
            evaluate(late_fuse(test_scores, ga_result.weights), y_test),
            ga_result.history,
        ),
        "early": MethodResult(
            "early",
            np.array([1.0]),
            fitness([1.0], [early_val], y_val),
            evaluate(early_test, y_test),
        ),
        "equal": MethodResult(
            "equal",
            eq,
            fitness(eq, val_scores, y_val),
            evaluate(late_fuse(test_scores, eq), y_test),
        ),
    }

    # one correctly-classified held-out sample as a deployment probe
    fused_test = late_fuse(test_scores, pso_result.weights)
    preds = fused_test.values.argmax(axis=1)
    probe: dict = {}
    for pos in range(len(test_idx)):
        if preds[pos] == y_test[pos]:
            sample_index = int(test_idx[pos])
            probe = {
                "sample_index": sample_index,
                "merged_label": int(y_test[pos]),
                "fused_row": fused_test.values[pos].tolist(),
                "features": [fm.values[sample_index].tolist() for fm in matrices],
            }
            break

    return ExperimentResult(
        config=config,
        methods=methods,
        per_model_validation=per_model_validation,
        models=models,
        early_model=early_model,
        merge_map=merge_map,
        manifest=manifest,
        input_dims=tuple(fm.n_dims for fm in matrices),
        test_probe=probe,
    )


def make_bundle(result: ExperimentResult, method: str) -> ModelBundle:
    if method not in METHOD_ORDER:
        raise ConfigError(f"unknown method {method!r}, expected one of {METHOD_ORDER}")
    categories = result.manifest.categories
    input_model_ids = tuple(m.model_id for m in result.models)
    if method == "early":
        return ModelBundle(
            method="early",
            models=(result.early_model,),
            fusion_weights=np.array([1.0]),
            merge_map=result.merge_map,
            categories=categories,
            input_dims=result.input_dims,
            input_model_ids=input_model_ids,
        )
    weights = result.methods[method].weights
    return ModelBundle(
        method=method,
        models=tuple(result.models),
        fusion_weights=np.asarray(weights, dtype=np.float64),
        merge_map=result.merge_map,
        categories=categories,
        input_dims=result.input_dims,
        input_model_ids=input_model_ids,
    )


def export_model_bundle(result: ExperimentResult, method: str, path) -> ModelBundle:
    bundle = make_bundle(result, method)
    save_bundle(bundle, path)
    return bundle


def result_to_report_dict(result: ExperimentResult) -> dict:
    """Machine-readable report; rounded metrics keep each row self-consistent."""
    rows = []
    for method in METHOD_ORDER:
        m = result.methods[method]
        p = round(m.metrics.avg_precision, 2)
        r = round(m.metrics.avg_recall, 2)
        rows.append(
            {
                "method": method,
                "label": METHOD_LABELS[method],
                "avg_precision": p,
                "avg_recall": r,
                "avg_f_score": round(harmonic_f_score(p, r), 2),
                "accuracy": round(m.metrics.accuracy, 2),
                "validation_fitness": m.validation_fitness,
                "weights": [float(w) for w in m.weights],
            }
        )
    return {
        "seed": {
            "split": result.config.split_seed,
            "classifier": result.config.classifier_seed,
            "pso": result.config.pso.seed,
            "ga": result.config.ga.seed,
        },
        "methods": rows,
        "per_model_validation_fitness": dict(sorted(result.per_model_validation.items())),
        "merged_classes": list(result.merge_map.merged_names),
        "config": result.config.raw,
    }


def experiment_state_dict(result: ExperimentResult) -> dict:
    """Full state needed to export bundles later, written as experiment.json."""

    def model_dict(m: ClassifierModel) -> dict:
        return {
            "model_id": m.model_id,
            "weights": m.weights.tolist(),
            "biases": m.biases.tolist(),
            "mean": m.mean.tolist(),
            "std": m.std.tolist(),
        }

    return {
        "report": result_to_report_dict(result),
        "models": [model_dict(m) for m in result.models],
        "early_model": model_dict(result.early_model),
        "merge_map": {
            "index_map": list(result.merge_map.index_map),
            "merged_names": list(result.merge_map.merged_names),
            "members": [list(m) for m in result.merge_map.members],
        },
        "categories": list(result.manifest.categories),
        "input_dims": list(result.input_dims),
        "test_probe": result.test_probe,
    }


def load_experiment_state(path) -> ExperimentResult:
    """Rehydrate enough of an experiment from experiment.json to export bundles."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such experiment file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"experiment file is not valid JSON: {exc}") from exc

    def model_from(d) -> ClassifierModel:
        return ClassifierModel(
            d["model_id"],
            np.asarray(d["weights"], dtype=np.float64),
            np.asarray(d["biases"], dtype=np.float64),
            np.asarray(d["mean"], dtype=np.float64),
            np.asarray(d["std"], dtype=np.float64),
        )

    report = doc["report"]
    merge_map = MergedLabelMap(
        tuple(int(i) for i in doc["merge_map"]["index_map"]),
        tuple(doc["merge_map"]["merged_names"]),
        tuple(tuple(m) for m in doc["merge_map"]["members"]),
    )
    methods = {}
    for row in report["methods"]:
        methods[row["method"]] = MethodResult(
            row["method"],
            np.asarray(row["weights"], dtype=np.float64),
            float(row["validation_fitness"]),
            Metrics(row["avg_precision"], row["avg_recall"], row["avg_f_score"], row["accuracy"]),
        )
    manifest = DatasetManifest(tuple(doc["categories"]), (), ())
    config = parse_config(report.get("config", {"data": {"synthetic": {
        "n_models": 1, "n_classes": 2, "n_dims": 1, "samples_per_class": 1}}}))
    return ExperimentResult(
        config=config,
        methods=methods,
        per_model_validation=report["per_model_validation_fitness"],
        models=[model_from(d) for d in doc["models"]],
        early_model=model_from(doc["early_model"]),
        merge_map=merge_map,
        manifest=manifest,
        input_dims=tuple(int(d) for d in doc["input_dims"]),
        test_probe=doc.get("test_probe", {}),
    )
