"""Simulated CGM sensors, the relay wire protocol, and reading ingestion."""

from .listener import IngestServer, send_frames
from .protocol import (
    FrameError,
    encode_ack,
    encode_err,
    encode_frame,
    format_timestamp,
    parse_frame,
    parse_timestamp,
)
from .readings import (
    BUFFER_CAPACITY,
    GLUCOSE_MAX,
    GLUCOSE_MIN,
    RELAY_INTERVAL_MIN,
    SAMPLE_INTERVAL_MIN,
    GlucoseReading,
    SensorBuffer,
)
from .simulator import (
    SensorProfile,
    glucose_at,
    iter_relay_frames,
    meal_response,
    relay_tick,
    simulate_sensor,
)
from .store import DUPLICATE, STORED, ReadingStore, StorageError

__all__ = [
    "BUFFER_CAPACITY",
    "DUPLICATE",
    "FrameError",
    "GLUCOSE_MAX",
    "GLUCOSE_MIN",
    "GlucoseReading",
    "IngestServer",
    "ReadingStore",
    "RELAY_INTERVAL_MIN",
    "SAMPLE_INTERVAL_MIN",
    "STORED",
    "SensorBuffer",
    "SensorProfile",
    "StorageError",
    "encode_ack",
    "encode_err",
    "encode_frame",
    "format_timestamp",
    "glucose_at",
    "iter_relay_frames",
    "meal_response",
    "parse_frame",
    "parse_timestamp",
    "relay_tick",
    "send_frames",
    "simulate_sensor",
]
