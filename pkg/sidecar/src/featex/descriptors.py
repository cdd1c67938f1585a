"""Deterministic convolutional descriptors, one bank per backbone style.

Each supported model name maps to a fixed output width and a frozen filter
bank + projection seeded from the name and extractor version. Descriptors are
pure functions of the decoded pixels, so the same image always produces the
same row, and different model names produce decorrelated feature spaces.
"""

from __future__ import annotations

import zlib

import numpy as np
from PIL import Image

EXTRACTOR_VERSION = 1

# output dims per backbone style (penultimate/pooled layer widths)
MODEL_DIMS = {
    "alexnet-style": 4096,
    "vgg-style": 4096,
    "googlenet-style": 1024,
    "resnet-style": 2048,
}

INPUT_SIZE = 64
N_FILTERS = 32
FILTER_SIZE = 7
STRIDE = 4
POOL_GRID = 4


def supported_models() -> tuple[str, ...]:
    return tuple(MODEL_DIMS)


def _seed_for(model_name: str) -> int:
    tag = f"{model_name}:v{EXTRACTOR_VERSION}".encode("utf-8")
    return zlib.crc32(tag)


class DescriptorBank:
    """Frozen filters + projection for one model name."""

    def __init__(self, model_name: str):
        if model_name not in MODEL_DIMS:
            raise ValueError(
                f"unsupported model {model_name!r}; expected one of {sorted(MODEL_DIMS)}"
            )
        self.model_name = model_name
        self.n_dims = MODEL_DIMS[model_name]
        rng = np.random.default_rng(_seed_for(model_name))
        self.filters = rng.normal(0.0, 1.0, size=(N_FILTERS, FILTER_SIZE, FILTER_SIZE, 3))
        self.filters -= self.filters.mean(axis=(1, 2, 3), keepdims=True)
        pooled_dim = N_FILTERS * POOL_GRID * POOL_GRID + 6  # + channel mean/std stats
        self.projection = rng.normal(0.0, 1.0 / np.sqrt(pooled_dim), size=(pooled_dim, self.n_dims))
        self.bias = rng.uniform(-0.1, 0.1, size=self.n_dims)

    def describe_pixels(self, pixels: np.ndarray) -> np.ndarray:
        """Feature row for one HxWx3 float image in [0, 1]."""
        windows = np.lib.stride_tricks.sliding_window_view(
            pixels, (FILTER_SIZE, FILTER_SIZE, 3)
        )[::STRIDE, ::STRIDE, 0]
        responses = np.einsum("xyijc,fijc->xyf", windows, self.filters)
        responses = np.maximum(responses, 0.0)  # ReLU

        side = responses.shape[0]
        cell = max(side // POOL_GRID, 1)
        pooled = np.empty((POOL_GRID, POOL_GRID, N_FILTERS))
        for gx in range(POOL_GRID):
            for gy in range(POOL_GRID):
                x0, y0 = gx * cell, gy * cell
                x1 = side if gx == POOL_GRID - 1 else x0 + cell
                y1 = side if gy == POOL_GRID - 1 else y0 + cell
                pooled[gx, gy] = responses[x0:x1, y0:y1].mean(axis=(0, 1))

        stats = np.concatenate([pixels.mean(axis=(0, 1)), pixels.std(axis=(0, 1))])
        vec = np.concatenate([pooled.ravel(), stats])
        return np.tanh(vec @ self.projection + self.bias).astype(np.float32)

    def describe_image(self, image: Image.Image) -> np.ndarray:
        rgb = image.convert("RGB").resize((INPUT_SIZE, INPUT_SIZE), Image.BILINEAR)
        pixels = np.asarray(rgb, dtype=np.float64) / 255.0
        return self.describe_pixels(pixels)
