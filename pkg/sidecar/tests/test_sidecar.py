import json
import struct

import numpy as np
import pytest
from PIL import Image, ImageDraw

from featex import MODEL_DIMS, DescriptorBank, supported_models
from featex.cli import extract, main


def paint_image(path, seed, size=96):
    """Small synthetic 'food photo': colored background with shapes."""
    rng = np.random.default_rng(seed)
    img = Image.new("RGB", (size, size), tuple(int(c) for c in rng.integers(30, 225, 3)))
    draw = ImageDraw.Draw(img)
    for _ in range(6):
        x0, y0 = rng.integers(0, size - 20, 2)
        dx, dy = rng.integers(8, 30, 2)
        color = tuple(int(c) for c in rng.integers(0, 255, 3))
        if rng.random() < 0.5:
            draw.ellipse([int(x0), int(y0), int(x0 + dx), int(y0 + dy)], fill=color)
        else:
            draw.rectangle([int(x0), int(y0), int(x0 + dx), int(y0 + dy)], fill=color)
    img.save(path)


@pytest.fixture(scope="module")
def photo_dataset(tmp_path_factory):
    """10 images across two categories plus the manifest describing them."""
    root = tmp_path_factory.mktemp("photos")
    samples = []
    for i in range(10):
        name = f"img{i:02d}.png"
        paint_image(root / name, seed=i)
        samples.append(
            {
                "id": f"s{i:02d}",
                "category": "flatbread" if i < 5 else "stew",
                "split": "train",
                "image_path": name,
            }
        )
    manifest = {"categories": ["flatbread", "stew"], "merge_groups": [], "samples": samples}
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return root, manifest_path


def parse_feature_file(path):
    """Independent reader: struct-level check of the binary layout."""
    data = path.read_bytes()
    assert data[:8] == b"CGFTFEAT"
    (version,) = struct.unpack_from("<I", data, 8)
    assert version == 1
    (id_len,) = struct.unpack_from("<I", data, 12)
    model_id = data[16 : 16 + id_len].decode()
    n, d = struct.unpack_from("<QQ", data, 16 + id_len)
    values = np.frombuffer(data, dtype="<f4", offset=32 + id_len)
    assert values.size == n * d
    return model_id, values.reshape(n, d)


def test_file_shape_matches_model_contract(photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    out = tmp_path / "vgg.feat"
    summary = extract(manifest_path, "vgg-style", out)
    assert summary["n_dims"] == 4096
    model_id, rows = parse_feature_file(out)
    assert model_id == "vgg-style"
    assert rows.shape == (10, 4096)
    assert np.isfinite(rows).all()


@pytest.mark.parametrize("model", supported_models())
def test_every_model_has_its_pinned_width(model, photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    out = tmp_path / f"{model}.feat"
    extract(manifest_path, model, out)
    _, rows = parse_feature_file(out)
    assert rows.shape[1] == MODEL_DIMS[model]


def test_same_image_twice_gives_identical_rows(photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    doc = json.loads(manifest_path.read_text())
    doc["samples"] = [doc["samples"][0], dict(doc["samples"][0], id="dup")]
    twin = tmp_path / "twin.json"
    twin.write_text(json.dumps(doc))
    out = tmp_path / "twin.feat"
    extract(twin, "alexnet-style", out, image_root=root)
    _, rows = parse_feature_file(out)
    assert np.array_equal(rows[0], rows[1])


def test_extraction_is_deterministic_across_runs(photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    a, b = tmp_path / "a.feat", tmp_path / "b.feat"
    extract(manifest_path, "resnet-style", a)
    extract(manifest_path, "resnet-style", b)
    assert a.read_bytes() == b.read_bytes()


def test_models_are_decorrelated(photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    outs = {}
    for model in ("alexnet-style", "googlenet-style"):
        out = tmp_path / f"{model}.feat"
        extract(manifest_path, model, out)
        outs[model] = parse_feature_file(out)[1]
    a = outs["alexnet-style"][:, :1024]
    b = outs["googlenet-style"]
    assert not np.allclose(a, b)


def test_row_order_follows_manifest_order(photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    doc = json.loads(manifest_path.read_text())
    reversed_doc = dict(doc, samples=list(reversed(doc["samples"])))
    rev = tmp_path / "rev.json"
    rev.write_text(json.dumps(reversed_doc))
    out_fwd, out_rev = tmp_path / "f.feat", tmp_path / "r.feat"
    extract(manifest_path, "vgg-style", out_fwd)
    extract(rev, "vgg-style", out_rev, image_root=root)
    _, fwd = parse_feature_file(out_fwd)
    _, bwd = parse_feature_file(out_rev)
    assert np.array_equal(fwd, bwd[::-1])


def test_undecodable_image_skip_and_fail_modes(photo_dataset, tmp_path):
    root, manifest_path = photo_dataset
    bad = tmp_path / "broken.png"
    bad.write_bytes(b"this is not an image")
    doc = json.loads(manifest_path.read_text())
    doc["samples"].insert(0, {"id": "bad", "category": "stew", "split": "train",
                              "image_path": str(bad)})
    mixed = tmp_path / "mixed.json"
    mixed.write_text(json.dumps(doc))

    with pytest.raises(ValueError, match="bad"):
        extract(mixed, "vgg-style", tmp_path / "x.feat", image_root=root, on_error="fail")

    summary = extract(mixed, "vgg-style", tmp_path / "y.feat", image_root=root, on_error="skip")
    assert [s["id"] for s in summary["skipped"]] == ["bad"]
    assert len(summary["extracted"]) == 10


def test_cli_end_to_end(photo_dataset, tmp_path, capsys):
    root, manifest_path = photo_dataset
    out = tmp_path / "cli.feat"
    rc = main(["--manifest", str(manifest_path), "--model", "googlenet-style",
               "--out", str(out)])
    assert rc == 0
    assert "10 rows x 1024 dims" in capsys.readouterr().out
    assert out.exists()


def test_output_loads_and_trains_in_the_fusion_pipeline(photo_dataset, tmp_path):
    # round trip through the consumer: file validates, classifier trains
    cgft_data = pytest.importorskip("cgft.data")
    cgft_fusion = pytest.importorskip("cgft.fusion")

    root, manifest_path = photo_dataset
    out = tmp_path / "train.feat"
    extract(manifest_path, "googlenet-style", out)
    features = cgft_data.read_features(out)
    assert features.model_id == "googlenet-style"
    labels = np.array([0] * 5 + [1] * 5)
    model = cgft_fusion.train_ovr_linear(features, labels, 2, seed=3)
    scores = cgft_fusion.predict_scores(model, features)
    assert scores.values.shape == (10, 2)
