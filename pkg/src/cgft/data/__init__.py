"""Dataset manifests, category merging, splits, synthetic data, binary IO."""

from .binfmt import BinaryFormatError, read_features, read_labels, write_features, write_labels
from .manifest import (
    DatasetManifest,
    ManifestError,
    MergedLabelMap,
    MergeGroup,
    SampleRecord,
    apply_merge,
    build_merge_map,
    load_manifest,
    original_labels,
    write_manifest,
)
from .splits import split_dataset, split_indices
from .synthetic import SynthConfig, generate_synthetic

__all__ = [
    "BinaryFormatError",
    "DatasetManifest",
    "ManifestError",
    "MergeGroup",
    "MergedLabelMap",
    "SampleRecord",
    "SynthConfig",
    "apply_merge",
    "build_merge_map",
    "generate_synthetic",
    "load_manifest",
    "original_labels",
    "read_features",
    "read_labels",
    "split_dataset",
    "split_indices",
    "write_features",
    "write_labels",
    "write_manifest",
]
