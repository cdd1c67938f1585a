"""Stratified train/validation/test assignment over manifest samples."""

from __future__ import annotations

import numpy as np

from .manifest import SPLITS, DatasetManifest, ManifestError, build_merge_map

RATIO_TOL = 1e-9


def _allocate(n: int, ratios) -> list[int]:
    """Largest-remainder apportionment, then guarantee one per split for n >= 3."""
    exact = [r * n for r in ratios]
    counts = [int(np.floor(e)) for e in exact]
    remainder = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    if n >= len(ratios):
        while min(counts) == 0:
            counts[counts.index(min(counts))] += 1
            counts[counts.index(max(counts))] -= 1
    return counts


def split_dataset(manifest: DatasetManifest, ratios, seed: int) -> DatasetManifest:
    """Assign every sample to train/validation/test, stratified per merged class.

    Deterministic for a given seed. Every merged class needs at least as many
    samples as there are splits so each split sees every class.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError(f"expected (train, validation, test) ratios, got {len(ratios)}")
    if min(ratios) <= 0.0:
        raise ValueError(f"split ratios must all be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > RATIO_TOL:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)!r}")

    merge_map = build_merge_map(manifest)
    category_index = {name: i for i, name in enumerate(manifest.categories)}
    by_class: dict[int, list[int]] = {m: [] for m in range(merge_map.n_merged)}
    for si, sample in enumerate(manifest.samples):
        by_class[merge_map.index_map[category_index[sample.category]]].append(si)

    rng = np.random.default_rng(seed)
    split_by_id: dict[str, str] = {}
    for merged in range(merge_map.n_merged):
        indices = by_class[merged]
        if len(indices) < len(SPLITS):
            raise ManifestError(
                f"class {merge_map.merged_names[merged]!r} has {len(indices)} samples, "
                f"fewer than the {len(SPLITS)} splits"
            )
        shuffled = [indices[i] for i in rng.permutation(len(indices))]
        counts = _allocate(len(indices), ratios)
        start = 0
        for split_name, count in zip(SPLITS, counts):
            for si in shuffled[start : start + count]:
                split_by_id[manifest.samples[si].sample_id] = split_name
            start += count

    return manifest.with_splits(split_by_id)


def split_indices(manifest: DatasetManifest) -> dict[str, np.ndarray]:
    """Sample positions per split, in manifest order."""
    out = {name: [] for name in SPLITS}
    for i, sample in enumerate(manifest.samples):
        out[sample.split].append(i)
    return {name: np.array(idx, dtype=np.int64) for name, idx in out.items()}
