"""Per-device reading storage with idempotent ingest and time-range queries.

Readings land in an append-only JSON-line log; restarting with the same log
replays to an identical store. Writes are serialized per device so each
device keeps a total order while different devices proceed independently.
"""

from __future__ import annotations

import json
import threading
from bisect import bisect_left, bisect_right, insort
from datetime import datetime
from pathlib import Path

from .protocol import format_timestamp, parse_timestamp
from .readings import GlucoseReading

STORED = "stored"
DUPLICATE = "duplicate"


class StorageError(RuntimeError):
    """Persisting a reading failed; the write may be retried."""


def reading_to_record(reading: GlucoseReading) -> dict:
    return {
        "device_id": reading.device_id,
        "seq": reading.seq,
        "timestamp": format_timestamp(reading.timestamp),
        "glucose": reading.glucose,
    }


def reading_from_record(record: dict) -> GlucoseReading:
    return GlucoseReading(
        record["device_id"],
        int(record["seq"]),
        parse_timestamp(record["timestamp"]),
        float(record["glucose"]),
    )


class ReadingStore:
    def __init__(self, log_path: str | Path | None = None):
        self._by_device: dict[str, list[tuple[int, GlucoseReading]]] = {}
        self._seen: set[tuple[str, int]] = set()
        self._meta_lock = threading.Lock()
        self._device_locks: dict[str, threading.Lock] = {}
        self._log_path = Path(log_path) if log_path is not None else None
        self._log_lock = threading.Lock()
        if self._log_path is not None and self._log_path.exists():
            for line in self._log_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._insert(reading_from_record(json.loads(line)))

    def _lock_for(self, device_id: str) -> threading.Lock:
        with self._meta_lock:
            lock = self._device_locks.get(device_id)
            if lock is None:
                lock = self._device_locks[device_id] = threading.Lock()
            return lock

    def _insert(self, reading: GlucoseReading) -> bool:
        key = (reading.device_id, reading.seq)
        if key in self._seen:
            return False
        rows = self._by_device.setdefault(reading.device_id, [])
        insort(rows, (reading.seq, reading))
        self._seen.add(key)
        return True

    def ingest(self, reading: GlucoseReading) -> str:
        """Idempotent on (device_id, seq): replays never duplicate."""
        with self._lock_for(reading.device_id):
            if not self._insert(reading):
                return DUPLICATE
            if self._log_path is not None:
                record = json.dumps(reading_to_record(reading), sort_keys=True)
                try:
                    with self._log_lock, open(self._log_path, "a", encoding="utf-8") as fh:
                        fh.write(record + "\n")
                except OSError as exc:
                    raise StorageError(f"retryable: could not append reading log: {exc}") from exc
            return STORED

    def query(
        self,
        device_id: str,
        t_from: datetime | None = None,
        t_to: datetime | None = None,
    ) -> list[GlucoseReading]:
        """Readings in the closed interval [t_from, t_to], time-ordered."""
        with self._lock_for(device_id):
            rows = [r for _, r in self._by_device.get(device_id, [])]
        times = [r.timestamp for r in rows]
        lo = 0 if t_from is None else bisect_left(times, t_from)
        hi = len(rows) if t_to is None else bisect_right(times, t_to)
        return rows[lo:hi]

    def readings_after(self, device_id: str, seq: int) -> list[GlucoseReading]:
        with self._lock_for(device_id):
            rows = self._by_device.get(device_id, [])
            return [r for s, r in rows if s > seq]

    def latest(self, device_id: str) -> GlucoseReading | None:
        with self._lock_for(device_id):
            rows = self._by_device.get(device_id, [])
            return rows[-1][1] if rows else None

    def count(self, device_id: str | None = None) -> int:
        if device_id is not None:
            return len(self._by_device.get(device_id, []))
        return len(self._seen)

    def devices(self) -> list[str]:
        return sorted(self._by_device)
