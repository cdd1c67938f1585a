"""featex: turn a dataset manifest's images into a binary feature file.

Reads the tracker's manifest JSON (samples with image_path), runs the chosen
descriptor bank over every image in manifest order, and writes one feature
row per image. Undecodable images either skip with a report or fail the run,
depending on --on-error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .descriptors import DescriptorBank, supported_models
from .output import write_feature_file


def load_samples(manifest_path: Path) -> list[dict]:
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    samples = doc.get("samples", [])
    if not isinstance(samples, list) or not samples:
        raise ValueError(f"manifest {manifest_path} has no samples")
    return samples


def extract(
    manifest_path: Path,
    model_name: str,
    out_path: Path,
    image_root: Path | None = None,
    on_error: str = "fail",
) -> dict:
    """Run the extraction; returns a summary with extracted/skipped ids."""
    bank = DescriptorBank(model_name)
    samples = load_samples(manifest_path)
    root = image_root or manifest_path.parent

    rows = []
    extracted = []
    skipped = []
    for sample in samples:
        sample_id = str(sample.get("id", "?"))
        rel = sample.get("image_path")
        if rel is None:
            problem = "no image_path"
            image = None
        else:
            path = Path(rel)
            if not path.is_absolute():
                path = root / path
            try:
                with Image.open(path) as img:
                    image = img.copy()
                problem = None
            except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
                image = None
                problem = str(exc)
        if image is None:
            if on_error == "fail":
                raise ValueError(f"sample {sample_id}: cannot decode image: {problem}")
            skipped.append({"id": sample_id, "reason": problem})
            continue
        rows.append(bank.describe_image(image))
        extracted.append(sample_id)

    if not rows:
        raise ValueError("no images could be decoded; nothing to write")
    write_feature_file(out_path, model_name, np.stack(rows))
    return {"model": model_name, "n_dims": bank.n_dims, "extracted": extracted, "skipped": skipped}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="featex", description="Extract meal-image features into a CGFTFEAT file."
    )
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON")
    parser.add_argument("--model", required=True, choices=supported_models())
    parser.add_argument("--out", required=True, help="output feature file")
    parser.add_argument("--image-root", help="base directory for relative image paths")
    parser.add_argument(
        "--on-error",
        choices=("fail", "skip"),
        default="fail",
        help="fail fast on undecodable images, or skip them with a report",
    )
    args = parser.parse_args(argv)
    try:
        summary = extract(
            Path(args.manifest),
            args.model,
            Path(args.out),
            Path(args.image_root) if args.image_root else None,
            args.on_error,
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {len(summary['extracted'])} rows x {summary['n_dims']} dims "
        f"({summary['model']}) to {args.out}"
    )
    for skip in summary["skipped"]:
        print(f"skipped {skip['id']}: {skip['reason']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
