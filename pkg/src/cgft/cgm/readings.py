"""Glucose readings and the fixed-capacity sensor ring buffer."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from datetime import datetime, timezone

GLUCOSE_MIN = 20.0
GLUCOSE_MAX = 600.0

# 8 hours of storage at one sample per 15 minutes
BUFFER_CAPACITY = 32
SAMPLE_INTERVAL_MIN = 15
RELAY_INTERVAL_MIN = 5


@dataclass(frozen=True)
class GlucoseReading:
    device_id: str
    seq: int
    timestamp: datetime
    glucose: float

    def __post_init__(self):
        if not self.device_id or any(c in self.device_id for c in ",\r\n"):
            raise ValueError(f"invalid device_id {self.device_id!r}")
        if self.seq < 0:
            raise ValueError(f"seq must be non-negative, got {self.seq}")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware UTC")
        if self.timestamp.utcoffset() != timezone.utc.utcoffset(None):
            object.__setattr__(self, "timestamp", self.timestamp.astimezone(timezone.utc))
        glucose = float(self.glucose)
        if not (GLUCOSE_MIN <= glucose <= GLUCOSE_MAX):
            raise ValueError(
                f"glucose {glucose!r} outside physical bounds [{GLUCOSE_MIN}, {GLUCOSE_MAX}] mg/dl"
            )
        object.__setattr__(self, "glucose", glucose)


class SensorBuffer:
    """Ring buffer of the newest readings, oldest evicted first."""

    capacity = BUFFER_CAPACITY

    def __init__(self):
        self._items: deque[GlucoseReading] = deque(maxlen=self.capacity)

    def push(self, reading: GlucoseReading) -> "SensorBuffer":
        newest = self.latest()
        if newest is not None and reading.seq <= newest.seq:
            raise ValueError(f"non-monotonic seq {reading.seq} after {newest.seq}")
        self._items.append(reading)
        return self

    def latest(self) -> GlucoseReading | None:
        return self._items[-1] if self._items else None

    def readings(self) -> list[GlucoseReading]:
        return list(self._items)

    def __len__(self) -> int:
        return len(self._items)
