"""Meal-image feature extractor sidecar."""

from .descriptors import EXTRACTOR_VERSION, MODEL_DIMS, DescriptorBank, supported_models
from .output import write_feature_file

__all__ = [
    "DescriptorBank",
    "EXTRACTOR_VERSION",
    "MODEL_DIMS",
    "supported_models",
    "write_feature_file",
]
