"""Line-oriented wire protocol for relayed glucose readings.

One UTF-8 line per reading:
    CGM,<device_id>,<seq>,<RFC3339 UTC timestamp>,<glucose mg/dl>
The receiver answers `OK,<seq>` or `ERR,<reason>` per line. encode/parse are
exact inverses for every valid reading.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone

from .readings import GLUCOSE_MAX, GLUCOSE_MIN, GlucoseReading

FRAME_TAG = "CGM"
FIELD_COUNT = 5


class FrameError(ValueError):
    """Malformed wire frame; `reason` is a stable machine-readable code."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    candidate = text.replace("Z", "+00:00") if text.endswith("Z") else text
    try:
        dt = datetime.fromisoformat(candidate)
    except ValueError as exc:
        raise FrameError("timestamp", f"bad timestamp {text!r}: {exc}") from exc
    if dt.tzinfo is None:
        raise FrameError("timestamp", f"timestamp {text!r} lacks a UTC offset")
    return dt.astimezone(timezone.utc)


def encode_frame(reading: GlucoseReading) -> str:
    return ",".join(
        (
            FRAME_TAG,
            reading.device_id,
            str(reading.seq),
            format_timestamp(reading.timestamp),
            repr(reading.glucose),
        )
    )


def parse_frame(line: str) -> GlucoseReading:
    fields = line.rstrip("\r\n").split(",")
    if len(fields) != FIELD_COUNT:
        raise FrameError("field_count", f"expected {FIELD_COUNT} fields, got {len(fields)}")
    tag, device_id, seq_text, ts_text, glucose_text = fields
    if tag != FRAME_TAG:
        raise FrameError("tag", f"expected {FRAME_TAG!r} prefix, got {tag!r}")
    if not device_id:
        raise FrameError("device", "empty device_id")
    if not seq_text.isdigit():
        raise FrameError("seq", f"bad seq {seq_text!r}")
    timestamp = parse_timestamp(ts_text)
    try:
        glucose = float(glucose_text)
    except ValueError as exc:
        raise FrameError("glucose", f"non-numeric glucose {glucose_text!r}") from exc
    if math.isnan(glucose) or math.isinf(glucose):
        raise FrameError("glucose", f"non-finite glucose {glucose_text!r}")
    if not (GLUCOSE_MIN <= glucose <= GLUCOSE_MAX):
        raise FrameError(
            "glucose_range",
            f"glucose {glucose_text} outside [{GLUCOSE_MIN}, {GLUCOSE_MAX}] mg/dl",
        )
    return GlucoseReading(device_id, int(seq_text), timestamp, glucose)


def encode_ack(seq: int) -> str:
    return f"OK,{seq}"


def encode_err(reason: str) -> str:
    return f"ERR,{reason}"
