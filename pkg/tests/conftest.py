"""Shared fixtures: a small trained recognizer with a merged category pair."""

import pytest

from cgft.data import (
    DatasetManifest,
    MergeGroup,
    SampleRecord,
    SynthConfig,
    generate_synthetic,
    write_features,
    write_labels,
    write_manifest,
)
from cgft.experiment import make_bundle, parse_config, run_experiment

FOOD_NAMES = ("mandi", "kabsa", "hummus", "falafel", "shawarma")


def renamed_manifest(manifest, labels):
    """Swap synthetic c0..c4 for food names and merge the lookalike pair."""
    samples = tuple(
        SampleRecord(s.sample_id, FOOD_NAMES[labels[i]], s.split, s.image_path)
        for i, s in enumerate(manifest.samples)
    )
    return DatasetManifest(
        FOOD_NAMES,
        (MergeGroup("mandi-kabsa", ("mandi", "kabsa")),),
        samples,
    )


@pytest.fixture(scope="session")
def recognizer(tmp_path_factory):
    """File-backed experiment over 2 models / 5 categories, mandi+kabsa merged.

    Both models get near-identical mandi/kabsa clusters, mirroring why the two
    categories are merged in the first place.
    """
    synth = SynthConfig(
        n_models=2,
        n_classes=5,
        n_dims=8,
        samples_per_class=30,
        confusable=(((0, 1),), ((0, 1),)),
        noise_std=1.0,
        seed=77,
    )
    matrices, labels, manifest = generate_synthetic(synth)
    manifest = renamed_manifest(manifest, labels)

    data_dir = tmp_path_factory.mktemp("recognizer-data")
    feature_paths = []
    for fm in matrices:
        path = data_dir / f"{fm.model_id}.feat"
        write_features(path, fm)
        feature_paths.append(str(path))
    write_labels(data_dir / "labels.lbl", labels)
    write_manifest(manifest, data_dir / "manifest.json")

    config = parse_config(
        {
            "data": {
                "features": feature_paths,
                "labels": str(data_dir / "labels.lbl"),
                "manifest": str(data_dir / "manifest.json"),
            },
            "splits": {"ratios": [0.6, 0.2, 0.2], "seed": 42},
            "classifier": {"seed": 7},
            "optimizers": {
                "pso": {"seed": 3, "iterations": 30},
                "ga": {"seed": 3, "generations": 30},
            },
        }
    )
    result = run_experiment(config)
    return {
        "result": result,
        "bundle": make_bundle(result, "pso"),
        "matrices": matrices,
        "labels": labels,
        "manifest": result.manifest,
    }
