"""Glucose-state classification: meal context plus severity band.

Band boundaries are the lower bounds of the next severity row, so the bands
partition each context's value range with no gaps; shared boundaries fall
into the more severe band.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from ..cgm.readings import GLUCOSE_MAX, GLUCOSE_MIN

FASTING = "fasting"
AFTER_EATING = "after-eating"
TWO_HOURS_AFTER = "two-hours-after"
UNCLASSIFIED = "unclassified"

NON_DIABETIC_RANGE = "non-diabetic-range"
PRE_DIABETIC_RANGE = "pre-diabetic-range"
DIABETIC_RANGE = "diabetic-range"

# per context: (pre-diabetic lower bound, diabetic lower bound) in mg/dl
DEFAULT_BAND_BOUNDS: dict[str, tuple[float, float]] = {
    FASTING: (101.0, 126.0),
    AFTER_EATING: (190.0, 220.0),
    TWO_HOURS_AFTER: (140.0, 200.0),
}

AFTER_EATING_WINDOW = timedelta(hours=2)
TWO_HOURS_WINDOW = timedelta(hours=4)
FASTING_GAP = timedelta(hours=8)


@dataclass(frozen=True)
class GlucoseState:
    context: str
    band: str


def classify_context(last_meal_time: datetime | None, now: datetime) -> str:
    if last_meal_time is None:
        return FASTING
    elapsed = now - last_meal_time
    if elapsed >= FASTING_GAP:
        return FASTING
    if timedelta(0) < elapsed <= AFTER_EATING_WINDOW:
        return AFTER_EATING
    if AFTER_EATING_WINDOW < elapsed <= TWO_HOURS_WINDOW:
        return TWO_HOURS_AFTER
    return UNCLASSIFIED


def band_for(context: str, value: float, bounds: dict[str, tuple[float, float]] | None = None) -> str:
    table = bounds or DEFAULT_BAND_BOUNDS
    # the (4h, 8h) gap has no row of its own and borrows the fasting bands
    pre_lower, diabetic_lower = table.get(context, table[FASTING])
    if value >= diabetic_lower:
        return DIABETIC_RANGE
    if value >= pre_lower:
        return PRE_DIABETIC_RANGE
    return NON_DIABETIC_RANGE


def classify_glucose_state(
    value: float,
    last_meal_time: datetime | None,
    now: datetime,
    bounds: dict[str, tuple[float, float]] | None = None,
) -> GlucoseState:
    if not (GLUCOSE_MIN <= value <= GLUCOSE_MAX):
        raise ValueError(f"glucose {value!r} outside [{GLUCOSE_MIN}, {GLUCOSE_MAX}] mg/dl")
    context = classify_context(last_meal_time, now)
    return GlucoseState(context, band_for(context, value, bounds))
