"""Dataset manifests: category lists, merge groups, per-sample split records.

The manifest is a single JSON document. Categories that look alike get merged
into one trainable class; the original member names are kept so a submitted
meal can be disambiguated from a drop-down afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SPLITS = ("train", "validation", "test")


class ManifestError(ValueError):
    """Manifest fails validation; message carries the record location."""


@dataclass(frozen=True)
class SampleRecord:
    sample_id: str
    category: str
    split: str
    image_path: str | None = None


@dataclass(frozen=True)
class MergeGroup:
    merged_name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class DatasetManifest:
    categories: tuple[str, ...]
    merge_groups: tuple[MergeGroup, ...]
    samples: tuple[SampleRecord, ...]

    def with_splits(self, split_by_id: dict[str, str]) -> "DatasetManifest":
        samples = tuple(
            SampleRecord(s.sample_id, s.category, split_by_id.get(s.sample_id, s.split), s.image_path)
            for s in self.samples
        )
        return DatasetManifest(self.categories, self.merge_groups, samples)


@dataclass(frozen=True)
class MergedLabelMap:
    """Original category index -> merged class index, plus drop-down members."""

    index_map: tuple[int, ...]
    merged_names: tuple[str, ...]
    members: tuple[tuple[str, ...], ...]

    @property
    def n_merged(self) -> int:
        return len(self.merged_names)


def validate_manifest(manifest: DatasetManifest) -> None:
    seen = set()
    for name in manifest.categories:
        if name in seen:
            raise ManifestError(f"categories: duplicate name {name!r}")
        seen.add(name)

    claimed: dict[str, int] = {}
    for gi, group in enumerate(manifest.merge_groups):
        if len(group.members) < 2:
            raise ManifestError(f"merge_groups[{gi}]: needs at least two members")
        for member in group.members:
            if member not in seen:
                raise ManifestError(f"merge_groups[{gi}]: unknown category {member!r}")
            if member in claimed:
                raise ManifestError(
                    f"merge_groups[{gi}]: category {member!r} already in merge_groups[{claimed[member]}]"
                )
            claimed[member] = gi

    ids = set()
    for si, sample in enumerate(manifest.samples):
        if sample.category not in seen:
            raise ManifestError(f"samples[{si}]: unknown category {sample.category!r}")
        if sample.split not in SPLITS:
            raise ManifestError(f"samples[{si}]: split must be one of {SPLITS}, got {sample.split!r}")
        if sample.sample_id in ids:
            raise ManifestError(f"samples[{si}]: duplicate sample_id {sample.sample_id!r}")
        ids.add(sample.sample_id)


def load_manifest(path) -> DatasetManifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    return manifest_from_dict(doc)


def manifest_from_dict(doc: dict) -> DatasetManifest:
    if not isinstance(doc, dict):
        raise ManifestError("manifest document must be a JSON object")
    try:
        categories = tuple(str(c) for c in doc.get("categories", []))
        groups = tuple(
            MergeGroup(str(g["merged_name"]), tuple(str(m) for m in g["members"]))
            for g in doc.get("merge_groups", [])
        )
        samples = tuple(
            SampleRecord(
                str(s["id"]),
                str(s["category"]),
                str(s.get("split", "train")),
                s.get("image_path"),
            )
            for s in doc.get("samples", [])
        )
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"malformed manifest record: {exc}") from exc
    manifest = DatasetManifest(categories, groups, samples)
    validate_manifest(manifest)
    return manifest


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    doc = {
        "categories": list(manifest.categories),
        "merge_groups": [
            {"merged_name": g.merged_name, "members": list(g.members)} for g in manifest.merge_groups
        ],
        "samples": [],
    }
    for s in manifest.samples:
        rec = {"id": s.sample_id, "category": s.category, "split": s.split}
        if s.image_path is not None:
            rec["image_path"] = s.image_path
        doc["samples"].append(rec)
    return doc


def write_manifest(manifest: DatasetManifest, path) -> None:
    validate_manifest(manifest)
    Path(path).write_text(json.dumps(manifest_to_dict(manifest), indent=2) + "\n", encoding="utf-8")


def build_merge_map(manifest: DatasetManifest) -> MergedLabelMap:
    """Collapse merge groups to shared class indices, in category order."""
    group_of = {}
    for group in manifest.merge_groups:
        for member in group.members:
            group_of[member] = group

    index_map = []
    merged_names: list[str] = []
    members: list[tuple[str, ...]] = []
    merged_index: dict[str, int] = {}
    for name in manifest.categories:
        group = group_of.get(name)
        key = group.merged_name if group else name
        if key not in merged_index:
            merged_index[key] = len(merged_names)
            merged_names.append(key)
            members.append(group.members if group else (name,))
        index_map.append(merged_index[key])
    return MergedLabelMap(tuple(index_map), tuple(merged_names), tuple(members))


def apply_merge(labels, merge_map: MergedLabelMap) -> np.ndarray:
    """Map original label indices onto merged class indices."""
    arr = np.asarray(labels, dtype=np.int64)
    n_original = len(merge_map.index_map)
    if arr.size and (arr.min() < 0 or arr.max() >= n_original):
        bad = int(arr.max() if arr.max() >= n_original else arr.min())
        raise ValueError(f"label {bad} outside map domain [0, {n_original})")
    table = np.asarray(merge_map.index_map, dtype=np.int64)
    return table[arr]


def original_labels(manifest: DatasetManifest) -> np.ndarray:
    """Per-sample original category indices, in manifest sample order."""
    index = {name: i for i, name in enumerate(manifest.categories)}
    return np.array([index[s.category] for s in manifest.samples], dtype=np.int64)
