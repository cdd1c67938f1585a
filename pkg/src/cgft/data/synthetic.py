"""Synthetic multi-model dataset generator for desk-scale experiments.

Each model sees every class as a Gaussian cluster in its own feature space.
A class pair listed as confusable for a model gets near-identical cluster
centers there, making that model weak on the pair while the others stay
strong: diverse but complementary by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fusion.types import FeatureMatrix
from .manifest import DatasetManifest, SampleRecord

CENTER_SCALE = 3.0
CONFUSED_OFFSET = 0.05


@dataclass(frozen=True)
class SynthConfig:
    n_models: int
    n_classes: int
    n_dims: int | tuple[int, ...]
    samples_per_class: int
    confusable: tuple[tuple[tuple[int, int], ...], ...] = ()
    noise_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_models < 1 or self.n_classes < 1 or self.samples_per_class < 1:
            raise ValueError("n_models, n_classes and samples_per_class must all be at least 1")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be non-negative")
        dims = self.dims_per_model
        if len(dims) != self.n_models or min(dims) < 1:
            raise ValueError(f"need one positive dim per model, got {dims}")
        conf = tuple(tuple(tuple(int(c) for c in pair) for pair in model) for model in self.confusable)
        if len(conf) > self.n_models:
            raise ValueError("more confusable-pair lists than models")
        for mi, pairs in enumerate(conf):
            for a, b in pairs:
                if not (0 <= a < self.n_classes and 0 <= b < self.n_classes) or a == b:
                    raise ValueError(f"model {mi}: confusable pair ({a}, {b}) references invalid classes")
        object.__setattr__(self, "confusable", conf)

    @property
    def dims_per_model(self) -> tuple[int, ...]:
        if isinstance(self.n_dims, int):
            return (self.n_dims,) * self.n_models
        return tuple(int(d) for d in self.n_dims)

    def pairs_for(self, model_index: int) -> tuple[tuple[int, int], ...]:
        if model_index < len(self.confusable):
            return self.confusable[model_index]
        return ()


def generate_synthetic(config: SynthConfig):
    """Build per-model feature matrices, labels, and a matching manifest."""
    rng = np.random.default_rng(config.seed)
    n = config.n_classes * config.samples_per_class
    labels = np.repeat(np.arange(config.n_classes), config.samples_per_class)

    matrices = []
    for mi, dims in enumerate(config.dims_per_model):
        centers = rng.normal(0.0, CENTER_SCALE, size=(config.n_classes, dims))
        for a, b in config.pairs_for(mi):
            centers[b] = centers[a] + rng.normal(0.0, CONFUSED_OFFSET, size=dims)
        values = centers[labels]
        if config.noise_std > 0.0:
            values = values + rng.normal(0.0, config.noise_std, size=(n, dims))
        matrices.append(FeatureMatrix(f"m{mi}", values))

    categories = tuple(f"c{c}" for c in range(config.n_classes))
    width = max(5, len(str(n)))
    samples = tuple(
        SampleRecord(f"s{i:0{width}d}", categories[labels[i]], "train") for i in range(n)
    )
    manifest = DatasetManifest(categories, (), samples)
    return matrices, labels, manifest
