"""Patient tracking service: stores, recognizer deployment, alerts, HTTP API."""

from .alerts import HIGH, VERY_HIGH, Alert, AlertEngine
from .bundle import BundleError, ModelBundle, load_bundle, save_bundle, score_features
from .httpapi import TrackerHTTPServer
from .state import (
    AFTER_EATING,
    DEFAULT_BAND_BOUNDS,
    DIABETIC_RANGE,
    FASTING,
    NON_DIABETIC_RANGE,
    PRE_DIABETIC_RANGE,
    TWO_HOURS_AFTER,
    UNCLASSIFIED,
    GlucoseState,
    classify_context,
    classify_glucose_state,
)
from .tracker import MealEvent, PatientProfile, TrackerError, TrackerService

__all__ = [
    "AFTER_EATING",
    "Alert",
    "AlertEngine",
    "BundleError",
    "DEFAULT_BAND_BOUNDS",
    "DIABETIC_RANGE",
    "FASTING",
    "GlucoseState",
    "HIGH",
    "MealEvent",
    "ModelBundle",
    "NON_DIABETIC_RANGE",
    "PRE_DIABETIC_RANGE",
    "PatientProfile",
    "TWO_HOURS_AFTER",
    "TrackerError",
    "TrackerHTTPServer",
    "TrackerService",
    "UNCLASSIFIED",
    "VERY_HIGH",
    "classify_context",
    "classify_glucose_state",
    "load_bundle",
    "save_bundle",
    "score_features",
]
