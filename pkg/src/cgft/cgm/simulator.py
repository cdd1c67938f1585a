"""FreeStyle-style sensor simulator and the 5-minute relay loop.

The sensor samples every 15 minutes into its 32-slot buffer. A meal pushes
glucose up linearly over 30 minutes, then the excursion decays exponentially
with a 90-minute half-life; Gaussian noise sits on top. The relay re-sends
the newest buffered reading every 5 minutes, so the receiver sees up to three
frames per sample and dedupes on (device, seq).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterator

import numpy as np

from .protocol import encode_frame
from .readings import (
    GLUCOSE_MAX,
    GLUCOSE_MIN,
    RELAY_INTERVAL_MIN,
    SAMPLE_INTERVAL_MIN,
    GlucoseReading,
    SensorBuffer,
)

MEAL_RISE_MIN = 30.0
MEAL_DECAY_HALF_LIFE_MIN = 90.0

DEFAULT_START = datetime(2024, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SensorProfile:
    device_id: str
    baseline: float
    meal_amplitude: float = 0.0
    meal_times_min: tuple[float, ...] = ()
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 60.0 <= self.baseline <= 300.0:
            raise ValueError(f"baseline {self.baseline} outside [60, 300] mg/dl")
        if self.meal_amplitude < 0.0:
            raise ValueError("meal_amplitude must be non-negative")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be non-negative")
        object.__setattr__(self, "meal_times_min", tuple(float(t) for t in self.meal_times_min))


def meal_response(amplitude: float, minutes_since_meal: float) -> float:
    """Excursion above baseline: linear rise to `amplitude`, then exponential decay."""
    if minutes_since_meal < 0.0 or amplitude == 0.0:
        return 0.0
    if minutes_since_meal <= MEAL_RISE_MIN:
        return amplitude * minutes_since_meal / MEAL_RISE_MIN
    return amplitude * math.pow(0.5, (minutes_since_meal - MEAL_RISE_MIN) / MEAL_DECAY_HALF_LIFE_MIN)


def glucose_at(profile: SensorProfile, minutes: float) -> float:
    """Noise-free glucose value at an instant (clamp applied by the sampler)."""
    value = profile.baseline
    for meal_t in profile.meal_times_min:
        value += meal_response(profile.meal_amplitude, minutes - meal_t)
    return value


def simulate_sensor(
    profile: SensorProfile, duration_min: float, start: datetime = DEFAULT_START
) -> list[GlucoseReading]:
    """One reading per 15 simulated minutes over [0, duration)."""
    rng = np.random.default_rng(profile.seed)
    readings = []
    seq = 0
    t = 0.0
    while t < duration_min:
        value = glucose_at(profile, t)
        if profile.noise_std > 0.0:
            value += float(rng.normal(0.0, profile.noise_std))
        value = min(max(value, GLUCOSE_MIN), GLUCOSE_MAX)
        readings.append(GlucoseReading(profile.device_id, seq, start + timedelta(minutes=t), value))
        seq += 1
        t += SAMPLE_INTERVAL_MIN
    return readings


def relay_tick(buffer: SensorBuffer) -> str | None:
    """Emit the newest buffered reading as a frame; None on an empty buffer."""
    newest = buffer.latest()
    if newest is None:
        return None
    return encode_frame(newest)


def iter_relay_frames(
    profile: SensorProfile,
    duration_min: float,
    start: datetime = DEFAULT_START,
    connect_offset_min: float = 0.0,
    backlog: bool = False,
) -> Iterator[tuple[datetime, str]]:
    """Drive sensor sampling and the 5-minute relay together.

    Yields (simulated time, frame line) per tick. The sensor may have been
    running before the relay connects (`connect_offset_min`); with `backlog`
    the readings still buffered at connect time are replayed once, otherwise
    only live values flow.
    """
    pending = deque(simulate_sensor(profile, duration_min, start))
    buffer = SensorBuffer()
    connect_time = start + timedelta(minutes=connect_offset_min)
    while pending and pending[0].timestamp < connect_time:
        buffer.push(pending.popleft())
    if backlog:
        for reading in buffer.readings():
            yield connect_time, encode_frame(reading)
    t = connect_offset_min
    while t < duration_min:
        now = start + timedelta(minutes=t)
        while pending and pending[0].timestamp <= now:
            buffer.push(pending.popleft())
        frame = relay_tick(buffer)
        if frame is not None:
            yield now, frame
        t += RELAY_INTERVAL_MIN
