"""Threshold alerts with per-severity hysteresis.

A high alert fires when the reading lands in the diabetic band for its meal
context; very-high fires at 300 mg/dl regardless of context and always loops
in the doctor and family. After an alert, the same severity stays quiet until
the value retreats at least 10 mg/dl below the threshold that tripped it.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from ..cgm.readings import GlucoseReading
from .state import (
    AFTER_EATING,
    DIABETIC_RANGE,
    DEFAULT_BAND_BOUNDS,
    FASTING,
    TWO_HOURS_AFTER,
    band_for,
    classify_context,
)

HIGH = "high"
VERY_HIGH = "very-high"

DEFAULT_VERY_HIGH_THRESHOLD = 300.0
HYSTERESIS_DROP = 10.0

RECOMMEND_ACTIVITY = "physical activity"
RECOMMEND_AVOID_CARBS = "avoid high-carbohydrate food"


@dataclass(frozen=True)
class Alert:
    alert_id: str
    patient_id: str
    severity: str
    device_id: str
    seq: int
    value: float
    context: str
    threshold: float
    created_at: datetime
    recipients: tuple[str, ...]
    recommendation: str


class _Track:
    __slots__ = ("armed", "threshold")

    def __init__(self):
        self.armed = True
        self.threshold = 0.0


class AlertEngine:
    """Stateful evaluator; one instance per service, keyed by patient."""

    def __init__(
        self,
        very_high_threshold: float = DEFAULT_VERY_HIGH_THRESHOLD,
        bounds: dict[str, tuple[float, float]] | None = None,
        hysteresis_drop: float = HYSTERESIS_DROP,
    ):
        self.very_high_threshold = very_high_threshold
        self.bounds = bounds or DEFAULT_BAND_BOUNDS
        self.hysteresis_drop = hysteresis_drop
        self._tracks: dict[tuple[str, str], _Track] = {}

    def _track(self, patient_id: str, severity: str) -> _Track:
        key = (patient_id, severity)
        track = self._tracks.get(key)
        if track is None:
            track = self._tracks[key] = _Track()
        return track

    def evaluate(
        self, patient_id: str, reading: GlucoseReading, last_meal_time: datetime | None
    ) -> list[Alert]:
        context = classify_context(last_meal_time, reading.timestamp)
        value = reading.glucose
        alerts: list[Alert] = []

        def fire(severity, threshold, recipients, recommendation):
            alerts.append(
                Alert(
                    alert_id=f"al-{patient_id}-{reading.device_id}-{reading.seq}-{severity}",
                    patient_id=patient_id,
                    severity=severity,
                    device_id=reading.device_id,
                    seq=reading.seq,
                    value=value,
                    context=context,
                    threshold=threshold,
                    created_at=reading.timestamp,
                    recipients=recipients,
                    recommendation=recommendation,
                )
            )

        very_high = self._track(patient_id, VERY_HIGH)
        high = self._track(patient_id, HIGH)

        # rearm first: a value far enough below the last trigger threshold
        # re-enables that severity even if it trips again in a new context
        if not very_high.armed and value <= very_high.threshold - self.hysteresis_drop:
            very_high.armed = True
        if not high.armed and value <= high.threshold - self.hysteresis_drop:
            high.armed = True

        if value >= self.very_high_threshold and very_high.armed:
            very_high.armed = False
            very_high.threshold = self.very_high_threshold
            fire(
                VERY_HIGH,
                self.very_high_threshold,
                ("patient", "doctor", "family"),
                RECOMMEND_ACTIVITY,
            )

        in_diabetic_band = band_for(context, value, self.bounds) == DIABETIC_RANGE
        # escalation to very-high supersedes the plain high alert
        if in_diabetic_band and value < self.very_high_threshold and high.armed:
            high.armed = False
            diabetic_lower = self.bounds.get(context, self.bounds[FASTING])[1]
            high.threshold = diabetic_lower
            recommendation = RECOMMEND_ACTIVITY
            if context in (AFTER_EATING, TWO_HOURS_AFTER):
                recommendation = f"{RECOMMEND_ACTIVITY}; {RECOMMEND_AVOID_CARBS}"
            fire(HIGH, diabetic_lower, ("patient",), recommendation)

        return alerts

    def restore(self, patient_id: str, severity: str, threshold: float, rearmed: bool) -> None:
        """Rebuild hysteresis state from persisted alerts during log replay."""
        track = self._track(patient_id, severity)
        track.threshold = threshold
        track.armed = rearmed
