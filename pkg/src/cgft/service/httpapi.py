"""HTTP surface of the tracker service.

Endpoints (JSON bodies, RFC3339 UTC timestamps):
    POST /patients                     create a patient profile
    POST /patients/{id}/device         link a sensor device
    POST /readings                     relay ingest bridge
    POST /patients/{id}/meals          submit a meal (feature vector or image ref)
    PUT  /meals/{id}/category          confirm a disambiguated category
    GET  /patients/{id}/timeline?from=&to=
    GET  /patients/{id}/alerts         filtered by the X-Role header
    GET  /patients/{id}/state
    GET  /patients/{id}/events         server-sent event stream (reading/meal/alert)
Optionally serves a built dashboard from a static directory under /ui/.
"""

from __future__ import annotations

import json
import mimetypes
import queue
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ..cgm.protocol import FrameError, format_timestamp, parse_timestamp
from ..cgm.readings import GlucoseReading
from ..cgm.store import reading_to_record
from .tracker import PatientProfile, TrackerError, TrackerService

ROLES = ("patient", "doctor", "family")

_STATUS_BY_CODE = {
    "unknown_patient": 404,
    "unknown_meal": 404,
    "duplicate": 409,
    "device_linked": 409,
    "invalid": 400,
    "invalid_choice": 400,
    "dimension_mismatch": 400,
    "recognizer_unavailable": 503,
}


def _reading_from_body(body: dict) -> GlucoseReading:
    try:
        return GlucoseReading(
            str(body["device_id"]),
            int(body["seq"]),
            parse_timestamp(str(body["timestamp"])),
            float(body["glucose"]),
        )
    except (KeyError, TypeError, ValueError, FrameError) as exc:
        raise TrackerError("invalid", f"bad reading body: {exc}") from exc


class TrackerRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "cgft-tracker"

    # ------------------------------------------------------------- plumbing

    def log_message(self, fmt, *args):  # quiet by default
        pass

    @property
    def service(self) -> TrackerService:
        return self.server.service  # type: ignore[attr-defined]

    def read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TrackerError("invalid", f"request body is not valid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise TrackerError("invalid", "request body must be a JSON object")
        return body

    def send_json(self, payload, status: int = 200) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def send_error_json(self, exc: TrackerError) -> None:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        self.send_json({"error": {"code": exc.code, "message": str(exc)}}, status)

    def role(self) -> str:
        role = self.headers.get("X-Role", "patient")
        if role not in ROLES:
            raise TrackerError("invalid", f"X-Role must be one of {ROLES}")
        return role

    # --------------------------------------------------------------- routes

    def do_POST(self):
        try:
            path = urlparse(self.path).path
            if path == "/patients":
                body = self.read_body()
                profile = self.service.create_patient(
                    PatientProfile(
                        str(body.get("patient_id", "")),
                        str(body.get("name", "")),
                        str(body.get("status", "diabetic")),
                        body.get("device_id"),
                        str(body.get("doctor_contact", "")),
                        str(body.get("family_contact", "")),
                    )
                )
                self.send_json(_profile_dict(profile), 201)
                return
            m = re.fullmatch(r"/patients/([^/]+)/device", path)
            if m:
                body = self.read_body()
                device_id = str(body.get("device_id", ""))
                if not device_id:
                    raise TrackerError("invalid", "device_id required")
                profile = self.service.link_device(m.group(1), device_id)
                self.send_json(_profile_dict(profile))
                return
            if path == "/readings":
                reading = _reading_from_body(self.read_body())
                result, alerts = self.service.ingest_reading(reading)
                self.send_json(
                    {
                        "result": result,
                        "alerts": [TrackerService.alert_to_record(a) for a in alerts],
                    }
                )
                return
            m = re.fullmatch(r"/patients/([^/]+)/meals", path)
            if m:
                body = self.read_body()
                if "timestamp" not in body:
                    raise TrackerError("invalid", "timestamp required")
                try:
                    timestamp = parse_timestamp(str(body["timestamp"]))
                except FrameError as exc:
                    raise TrackerError("invalid", str(exc)) from exc
                meal = self.service.submit_meal(
                    m.group(1),
                    timestamp,
                    features=body.get("features"),
                    image_ref=body.get("image_ref"),
                )
                self.send_json(TrackerService.meal_to_record(meal), 201)
                return
            raise TrackerError("invalid", f"no such endpoint: POST {path}")
        except TrackerError as exc:
            self.send_error_json(exc)

    def do_PUT(self):
        try:
            path = urlparse(self.path).path
            m = re.fullmatch(r"/meals/([^/]+)/category", path)
            if m:
                body = self.read_body()
                chosen = body.get("category")
                if not chosen:
                    raise TrackerError("invalid", "category required")
                meal = self.service.confirm_meal_category(m.group(1), str(chosen))
                self.send_json(TrackerService.meal_to_record(meal))
                return
            raise TrackerError("invalid", f"no such endpoint: PUT {path}")
        except TrackerError as exc:
            self.send_error_json(exc)

    def do_GET(self):
        try:
            parsed = urlparse(self.path)
            path = parsed.path
            params = parse_qs(parsed.query)

            m = re.fullmatch(r"/patients/([^/]+)/timeline", path)
            if m:
                window = _window(params)
                timeline = self.service.get_timeline(m.group(1), *window)
                self.send_json(
                    {
                        "readings": [reading_to_record(r) for r in timeline["readings"]],
                        "meals": [TrackerService.meal_to_record(me) for me in timeline["meals"]],
                    }
                )
                return
            m = re.fullmatch(r"/patients/([^/]+)/alerts", path)
            if m:
                alerts = self.service.get_alerts(m.group(1), self.role())
                self.send_json({"alerts": [TrackerService.alert_to_record(a) for a in alerts]})
                return
            m = re.fullmatch(r"/patients/([^/]+)/state", path)
            if m:
                state = self.service.get_state(m.group(1))
                if state is None:
                    self.send_json({"state": None})
                else:
                    self.send_json({"state": {"context": state.context, "band": state.band}})
                return
            m = re.fullmatch(r"/patients/([^/]+)/events", path)
            if m:
                self.stream_events(m.group(1))
                return
            m = re.fullmatch(r"/patients/([^/]+)", path)
            if m:
                self.send_json(_profile_dict(self.service.get_patient(m.group(1))))
                return
            if path == "/" or path.startswith("/ui"):
                if self.serve_static(path):
                    return
            raise TrackerError("invalid", f"no such endpoint: GET {path}")
        except TrackerError as exc:
            self.send_error_json(exc)

    # ----------------------------------------------------------- streaming

    def stream_events(self, patient_id: str) -> None:
        self.service.get_patient(patient_id)
        q = self.service.events.subscribe(patient_id)
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(b"retry: 2000\n\n")
            self.wfile.flush()
            while not self.server.stopping.is_set():  # type: ignore[attr-defined]
                try:
                    event = q.get(timeout=0.5)
                except queue.Empty:
                    self.wfile.write(b": keep-alive\n\n")
                    self.wfile.flush()
                    continue
                payload = json.dumps(event["data"])
                self.wfile.write(f"event: {event['event']}\ndata: {payload}\n\n".encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.service.events.unsubscribe(patient_id, q)

    def serve_static(self, path: str) -> bool:
        root = getattr(self.server, "static_dir", None)
        if root is None:
            return False
        rel = path[3:] if path.startswith("/ui") else path
        rel = rel.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            return False
        data = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)
        return True


def _profile_dict(profile: PatientProfile) -> dict:
    return {
        "patient_id": profile.patient_id,
        "name": profile.name,
        "status": profile.status,
        "device_id": profile.device_id,
        "doctor_contact": profile.doctor_contact,
        "family_contact": profile.family_contact,
    }


def _window(params: dict) -> tuple:
    try:
        t_from = parse_timestamp(params["from"][0])
        t_to = parse_timestamp(params["to"][0])
    except (KeyError, IndexError) as exc:
        raise TrackerError("invalid", "from and to query parameters required") from exc
    except FrameError as exc:
        raise TrackerError("invalid", str(exc)) from exc
    return t_from, t_to


class TrackerHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], service: TrackerService, static_dir=None):
        super().__init__(address, TrackerRequestHandler)
        self.service = service
        self.static_dir = Path(static_dir) if static_dir else None
        self.stopping = threading.Event()
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self.server_address[:2]
        return str(host), int(port)

    def start(self) -> "TrackerHTTPServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.stopping.set()
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
