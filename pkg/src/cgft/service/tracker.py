"""The patient-facing tracking service.

Three logical stores back it, mirrored in the data directory layout:
db1_readings.log (glucose readings), db2_meals.log (meal events and their
confirmations), and db3_model.json (the deployed recognizer bundle). Patients
and alerts keep their own append-only logs. Every log replays on startup, so
a restarted service answers queries identically.
"""

from __future__ import annotations

import json
import queue
import shutil
import threading
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path

import numpy as np

from ..cgm.protocol import format_timestamp, parse_timestamp
from ..cgm.readings import GlucoseReading
from ..cgm.store import STORED, ReadingStore, reading_to_record
from .alerts import Alert, AlertEngine
from .bundle import ModelBundle, load_bundle, score_features
from .state import GlucoseState, classify_glucose_state

PATIENT_STATUSES = ("non-diabetic", "pre-diabetic", "diabetic")


class TrackerError(ValueError):
    """Request-level failure with a stable error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class PatientProfile:
    patient_id: str
    name: str
    status: str = "diabetic"
    device_id: str | None = None
    doctor_contact: str = ""
    family_contact: str = ""

    def __post_init__(self):
        if not self.patient_id:
            raise TrackerError("invalid", "patient_id must be non-empty")
        if self.status not in PATIENT_STATUSES:
            raise TrackerError("invalid", f"status must be one of {PATIENT_STATUSES}")


@dataclass(frozen=True)
class MealEvent:
    meal_id: str
    patient_id: str
    timestamp: datetime
    predicted_category: str
    confidence: float
    disambiguation: tuple[str, ...]
    confirmed_category: str | None = None
    image_ref: str | None = None

    @property
    def display_category(self) -> str:
        return self.confirmed_category or self.predicted_category


class EventBus:
    """Per-patient fan-out of reading/meal/alert events to live subscribers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: dict[str, list[queue.Queue]] = {}

    def subscribe(self, patient_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.setdefault(patient_id, []).append(q)
        return q

    def unsubscribe(self, patient_id: str, q: queue.Queue) -> None:
        with self._lock:
            subs = self._subscribers.get(patient_id, [])
            if q in subs:
                subs.remove(q)

    def publish(self, patient_id: str, event_type: str, data: dict) -> None:
        with self._lock:
            subs = list(self._subscribers.get(patient_id, []))
        for q in subs:
            q.put({"event": event_type, "data": data})


class TrackerService:
    def __init__(
        self,
        data_dir: str | Path,
        bundle: ModelBundle | str | Path | None = None,
        very_high_threshold: float = 300.0,
        band_bounds: dict[str, tuple[float, float]] | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._patients_log = self.data_dir / "patients.log"
        self._meals_log = self.data_dir / "db2_meals.log"
        self._alerts_log = self.data_dir / "alerts.log"
        self._bundle_path = self.data_dir / "db3_model.json"

        self._lock = threading.RLock()
        self._patients: dict[str, PatientProfile] = {}
        self._device_owner: dict[str, str] = {}
        self._meals: dict[str, MealEvent] = {}
        self._meals_by_patient: dict[str, list[str]] = {}
        self._alerts_by_patient: dict[str, list[Alert]] = {}
        self._meal_counter = 0

        self.readings = ReadingStore(self.data_dir / "db1_readings.log")
        self.engine = AlertEngine(very_high_threshold=very_high_threshold, bounds=band_bounds)
        self.events = EventBus()
        self._descriptor_banks: dict = {}

        self.bundle: ModelBundle | None = None
        if bundle is not None:
            if isinstance(bundle, (str, Path)):
                src = Path(bundle)
                if src.resolve() != self._bundle_path.resolve():
                    shutil.copyfile(src, self._bundle_path)
                self.bundle = load_bundle(self._bundle_path)
            else:
                self.bundle = bundle
        elif self._bundle_path.exists():
            self.bundle = load_bundle(self._bundle_path)

        self._replay()

    # ------------------------------------------------------------- replay

    def _append(self, path: Path, record: dict) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _replay(self) -> None:
        if self._patients_log.exists():
            for line in self._patients_log.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec["type"] == "patient":
                    profile = PatientProfile(
                        rec["patient_id"],
                        rec["name"],
                        rec["status"],
                        rec.get("device_id"),
                        rec.get("doctor_contact", ""),
                        rec.get("family_contact", ""),
                    )
                    self._patients[profile.patient_id] = profile
                    if profile.device_id:
                        self._device_owner[profile.device_id] = profile.patient_id
                elif rec["type"] == "link":
                    profile = self._patients[rec["patient_id"]]
                    self._patients[rec["patient_id"]] = replace(profile, device_id=rec["device_id"])
                    self._device_owner[rec["device_id"]] = rec["patient_id"]

        if self._meals_log.exists():
            for line in self._meals_log.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec["type"] == "meal":
                    meal = MealEvent(
                        rec["meal_id"],
                        rec["patient_id"],
                        parse_timestamp(rec["timestamp"]),
                        rec["predicted_category"],
                        float(rec["confidence"]),
                        tuple(rec["disambiguation"]),
                        rec.get("confirmed_category"),
                        rec.get("image_ref"),
                    )
                    self._meals[meal.meal_id] = meal
                    self._meals_by_patient.setdefault(meal.patient_id, []).append(meal.meal_id)
                    self._meal_counter = max(self._meal_counter, int(meal.meal_id.split("-")[1]))
                elif rec["type"] == "confirm":
                    meal = self._meals[rec["meal_id"]]
                    self._meals[rec["meal_id"]] = replace(meal, confirmed_category=rec["category"])

        if self._alerts_log.exists():
            for line in self._alerts_log.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                alert = Alert(
                    rec["alert_id"],
                    rec["patient_id"],
                    rec["severity"],
                    rec["device_id"],
                    int(rec["seq"]),
                    float(rec["value"]),
                    rec["context"],
                    float(rec["threshold"]),
                    parse_timestamp(rec["created_at"]),
                    tuple(rec["recipients"]),
                    rec["recommendation"],
                )
                self._alerts_by_patient.setdefault(alert.patient_id, []).append(alert)

        # rebuild hysteresis: the last alert per (patient, severity) disarms the
        # track unless a later reading retreated far enough below its threshold
        for patient_id, alerts in self._alerts_by_patient.items():
            latest: dict[str, Alert] = {}
            for alert in alerts:
                latest[alert.severity] = alert
            for severity, alert in latest.items():
                rearmed = any(
                    r.glucose <= alert.threshold - self.engine.hysteresis_drop
                    for r in self.readings.readings_after(alert.device_id, alert.seq)
                )
                self.engine.restore(patient_id, severity, alert.threshold, rearmed)

    # ------------------------------------------------------------ patients

    def create_patient(self, profile: PatientProfile) -> PatientProfile:
        with self._lock:
            if profile.patient_id in self._patients:
                raise TrackerError("duplicate", f"patient {profile.patient_id!r} already exists")
            if profile.device_id:
                if profile.device_id in self._device_owner:
                    raise TrackerError(
                        "device_linked", f"device {profile.device_id!r} already linked"
                    )
                self._device_owner[profile.device_id] = profile.patient_id
            self._patients[profile.patient_id] = profile
            self._append(
                self._patients_log,
                {
                    "type": "patient",
                    "patient_id": profile.patient_id,
                    "name": profile.name,
                    "status": profile.status,
                    "device_id": profile.device_id,
                    "doctor_contact": profile.doctor_contact,
                    "family_contact": profile.family_contact,
                },
            )
            return profile

    def get_patient(self, patient_id: str) -> PatientProfile:
        profile = self._patients.get(patient_id)
        if profile is None:
            raise TrackerError("unknown_patient", f"unknown patient {patient_id!r}")
        return profile

    def link_device(self, patient_id: str, device_id: str) -> PatientProfile:
        with self._lock:
            profile = self.get_patient(patient_id)
            owner = self._device_owner.get(device_id)
            if owner is not None and owner != patient_id:
                raise TrackerError("device_linked", f"device {device_id!r} already linked to {owner!r}")
            updated = replace(profile, device_id=device_id)
            self._patients[patient_id] = updated
            self._device_owner[device_id] = patient_id
            self._append(
                self._patients_log,
                {"type": "link", "patient_id": patient_id, "device_id": device_id},
            )
            return updated

    def patient_for_device(self, device_id: str) -> PatientProfile | None:
        patient_id = self._device_owner.get(device_id)
        return self._patients.get(patient_id) if patient_id else None

    # ------------------------------------------------------------ readings

    def ingest_reading(self, reading: GlucoseReading) -> tuple[str, list[Alert]]:
        """Store a reading; evaluate alerts synchronously when it is new."""
        result = self.readings.ingest(reading)
        if result != STORED:
            return result, []
        owner = self.patient_for_device(reading.device_id)
        alerts: list[Alert] = []
        if owner is not None:
            with self._lock:
                last_meal = self._last_meal_time(owner.patient_id, reading.timestamp)
                alerts = self.engine.evaluate(owner.patient_id, reading, last_meal)
                for alert in alerts:
                    self._alerts_by_patient.setdefault(owner.patient_id, []).append(alert)
                    self._append(self._alerts_log, self.alert_to_record(alert))
            self.events.publish(owner.patient_id, "reading", reading_to_record(reading))
            for alert in alerts:
                self.events.publish(owner.patient_id, "alert", self.alert_to_record(alert))
        return result, alerts

    # --------------------------------------------------------------- meals

    def _last_meal_time(self, patient_id: str, at: datetime) -> datetime | None:
        times = [
            self._meals[mid].timestamp
            for mid in self._meals_by_patient.get(patient_id, [])
            if self._meals[mid].timestamp <= at
        ]
        return max(times) if times else None

    def _features_from_image(self, image_ref: str):
        """Extract per-model vectors via the sidecar, when it is installed."""
        try:
            from featex import MODEL_DIMS, DescriptorBank
            from PIL import Image, UnidentifiedImageError
        except ImportError as exc:
            raise TrackerError(
                "recognizer_unavailable",
                "image submissions need the feature-extractor sidecar installed; "
                "submit a feature vector instead",
            ) from exc
        names = self.bundle.input_model_ids
        unsupported = [n for n in names if n not in MODEL_DIMS]
        if not names or unsupported:
            raise TrackerError(
                "recognizer_unavailable",
                f"deployed bundle inputs {unsupported or '(unnamed)'} have no image extractor; "
                "submit a feature vector instead",
            )
        for name, dims in zip(names, self.bundle.input_dims):
            if MODEL_DIMS[name] != dims:
                raise TrackerError(
                    "dimension_mismatch",
                    f"bundle expects {dims} dims for {name}, extractor produces {MODEL_DIMS[name]}",
                )
        try:
            with Image.open(image_ref) as img:
                image = img.copy()
        except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
            raise TrackerError("invalid", f"cannot decode image {image_ref!r}: {exc}") from exc
        banks = self._descriptor_banks
        for name in names:
            if name not in banks:
                banks[name] = DescriptorBank(name)
        return [banks[name].describe_image(image) for name in names]

    def submit_meal(
        self,
        patient_id: str,
        timestamp: datetime,
        features=None,
        image_ref: str | None = None,
    ) -> MealEvent:
        self.get_patient(patient_id)
        if self.bundle is None:
            raise TrackerError("recognizer_unavailable", "no recognizer bundle deployed")
        if features is None:
            if image_ref is None:
                raise TrackerError("invalid", "meal submission needs features or an image_ref")
            features = self._features_from_image(image_ref)
        try:
            row = score_features(self.bundle, features)
        except ValueError as exc:
            raise TrackerError("dimension_mismatch", str(exc)) from exc
        predicted = int(np.argmax(row))
        confidence = float(row[predicted])
        with self._lock:
            self._meal_counter += 1
            meal = MealEvent(
                meal_id=f"m-{self._meal_counter:06d}",
                patient_id=patient_id,
                timestamp=timestamp,
                predicted_category=self.bundle.merge_map.merged_names[predicted],
                confidence=confidence,
                disambiguation=self.bundle.merge_map.members[predicted],
                image_ref=image_ref,
            )
            self._meals[meal.meal_id] = meal
            self._meals_by_patient.setdefault(patient_id, []).append(meal.meal_id)
            self._append(self._meals_log, self.meal_to_record(meal))
        self.events.publish(patient_id, "meal", self.meal_to_record(meal))
        return meal

    def confirm_meal_category(self, meal_id: str, chosen: str) -> MealEvent:
        with self._lock:
            meal = self._meals.get(meal_id)
            if meal is None:
                raise TrackerError("unknown_meal", f"unknown meal {meal_id!r}")
            allowed = set(meal.disambiguation) | {meal.predicted_category}
            if chosen not in allowed:
                raise TrackerError(
                    "invalid_choice",
                    f"{chosen!r} is not among {sorted(allowed)}",
                )
            if meal.confirmed_category != chosen:
                meal = replace(meal, confirmed_category=chosen)
                self._meals[meal_id] = meal
                self._append(
                    self._meals_log,
                    {"type": "confirm", "meal_id": meal_id, "category": chosen},
                )
        self.events.publish(meal.patient_id, "meal", self.meal_to_record(meal))
        return meal

    def get_meal(self, meal_id: str) -> MealEvent:
        meal = self._meals.get(meal_id)
        if meal is None:
            raise TrackerError("unknown_meal", f"unknown meal {meal_id!r}")
        return meal

    # ------------------------------------------------------------- queries

    def get_timeline(self, patient_id: str, t_from: datetime, t_to: datetime) -> dict:
        """Readings and meals in the closed interval [t_from, t_to]."""
        profile = self.get_patient(patient_id)
        if t_from > t_to:
            raise TrackerError("invalid", "timeline window is inverted")
        readings = (
            self.readings.query(profile.device_id, t_from, t_to) if profile.device_id else []
        )
        meals = [
            self._meals[mid]
            for mid in self._meals_by_patient.get(patient_id, [])
            if t_from <= self._meals[mid].timestamp <= t_to
        ]
        meals.sort(key=lambda m: m.timestamp)
        return {"readings": readings, "meals": meals}

    def get_state(self, patient_id: str, now: datetime | None = None) -> GlucoseState | None:
        profile = self.get_patient(patient_id)
        latest = self.readings.latest(profile.device_id) if profile.device_id else None
        if latest is None:
            return None
        at = now or latest.timestamp
        return classify_glucose_state(
            latest.glucose,
            self._last_meal_time(patient_id, at),
            at,
            self.engine.bounds,
        )

    def get_alerts(self, patient_id: str, role: str = "patient") -> list[Alert]:
        self.get_patient(patient_id)
        alerts = self._alerts_by_patient.get(patient_id, [])
        return [a for a in alerts if role in a.recipients]

    # -------------------------------------------------------- serializers

    @staticmethod
    def alert_to_record(alert: Alert) -> dict:
        return {
            "alert_id": alert.alert_id,
            "patient_id": alert.patient_id,
            "severity": alert.severity,
            "device_id": alert.device_id,
            "seq": alert.seq,
            "value": alert.value,
            "context": alert.context,
            "threshold": alert.threshold,
            "created_at": format_timestamp(alert.created_at),
            "recipients": list(alert.recipients),
            "recommendation": alert.recommendation,
        }

    @staticmethod
    def meal_to_record(meal: MealEvent) -> dict:
        record = {
            "type": "meal",
            "meal_id": meal.meal_id,
            "patient_id": meal.patient_id,
            "timestamp": format_timestamp(meal.timestamp),
            "predicted_category": meal.predicted_category,
            "confidence": meal.confidence,
            "disambiguation": list(meal.disambiguation),
            "confirmed_category": meal.confirmed_category,
            "category": meal.display_category,
        }
        if meal.image_ref is not None:
            record["image_ref"] = meal.image_ref
        return record
