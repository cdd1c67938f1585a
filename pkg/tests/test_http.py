import json
import socket
import threading
import time
import urllib.error
import urllib.request
from datetime import datetime, timedelta, timezone

import pytest

from cgft.cgm import SensorProfile, simulate_sensor
from cgft.cgm.store import reading_to_record
from cgft.service import TrackerHTTPServer, TrackerService

UTC = timezone.utc
START = datetime(2024, 5, 1, tzinfo=UTC)


@pytest.fixture()
def server(recognizer, tmp_path):
    service = TrackerService(tmp_path / "data", bundle=recognizer["bundle"])
    srv = TrackerHTTPServer(("127.0.0.1", 0), service).start()
    yield srv
    srv.stop()


def url(server, path):
    host, port = server.address
    return f"http://{host}:{port}{path}"


def request(server, method, path, body=None, headers=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url(server, path), data=data, method=method)
    req.add_header("Content-Type", "application/json")
    for k, v in (headers or {}).items():
        req.add_header(k, v)
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def ts(dt):
    return dt.astimezone(UTC).isoformat().replace("+00:00", "Z")


def create_patient(server, patient_id="p1", device="S1"):
    status, body = request(
        server, "POST", "/patients", {"patient_id": patient_id, "name": "Pat", "status": "diabetic"}
    )
    assert status == 201, body
    status, body = request(server, "POST", f"/patients/{patient_id}/device", {"device_id": device})
    assert status == 200, body
    return body


def post_reading(server, seq, value, minutes=0, device="S1"):
    return request(
        server,
        "POST",
        "/readings",
        {
            "device_id": device,
            "seq": seq,
            "timestamp": ts(START + timedelta(minutes=minutes)),
            "glucose": value,
        },
    )


class TestPatientEndpoints:
    def test_create_link_fetch(self, server):
        profile = create_patient(server)
        assert profile["device_id"] == "S1"
        status, body = request(server, "GET", "/patients/p1")
        assert status == 200 and body["name"] == "Pat"

    def test_duplicate_patient_is_409(self, server):
        create_patient(server)
        status, body = request(server, "POST", "/patients", {"patient_id": "p1", "name": "X"})
        assert status == 409
        assert body["error"]["code"] == "duplicate"

    def test_unknown_patient_is_404(self, server):
        status, body = request(server, "GET", "/patients/ghost")
        assert status == 404
        assert body["error"]["code"] == "unknown_patient"

    def test_double_link_is_409(self, server):
        create_patient(server)
        request(server, "POST", "/patients", {"patient_id": "p2", "name": "Two"})
        status, body = request(server, "POST", "/patients/p2/device", {"device_id": "S1"})
        assert status == 409
        assert body["error"]["code"] == "device_linked"


class TestReadingBridge:
    def test_ingest_and_duplicate(self, server):
        create_patient(server)
        status, body = post_reading(server, 0, 110.0)
        assert status == 200 and body["result"] == "stored"
        status, body = post_reading(server, 0, 110.0)
        assert body["result"] == "duplicate"

    def test_alerting_reading_returns_alert(self, server):
        create_patient(server)
        status, body = post_reading(server, 0, 305.0)
        assert status == 200
        assert [a["severity"] for a in body["alerts"]] == ["very-high"]
        assert set(body["alerts"][0]["recipients"]) == {"patient", "doctor", "family"}

    def test_malformed_reading_is_400(self, server):
        status, body = request(server, "POST", "/readings", {"device_id": "S1"})
        assert status == 400


class TestMealAndTimeline:
    def test_meal_flow_over_http(self, server, recognizer):
        create_patient(server)
        probe = recognizer["result"].test_probe
        status, meal = request(
            server,
            "POST",
            "/patients/p1/meals",
            {"timestamp": ts(START + timedelta(hours=2)), "features": probe["features"]},
        )
        assert status == 201, meal
        names = recognizer["bundle"].merge_map.merged_names
        assert meal["predicted_category"] == names[probe["merged_label"]]
        assert meal["confidence"] > 1.0 / len(names)

        if len(meal["disambiguation"]) > 1:
            choice = meal["disambiguation"][0]
            status, confirmed = request(
                server, "PUT", f"/meals/{meal['meal_id']}/category", {"category": choice}
            )
            assert status == 200
            assert confirmed["confirmed_category"] == choice

    def test_bad_category_choice_is_400(self, server, recognizer):
        create_patient(server)
        probe = recognizer["result"].test_probe
        _, meal = request(
            server,
            "POST",
            "/patients/p1/meals",
            {"timestamp": ts(START), "features": probe["features"]},
        )
        status, body = request(
            server, "PUT", f"/meals/{meal['meal_id']}/category", {"category": "pizza"}
        )
        assert status == 400
        assert body["error"]["code"] == "invalid_choice"

    def test_timeline_matches_service_state(self, server, recognizer):
        create_patient(server)
        readings = simulate_sensor(SensorProfile("S1", baseline=115.0), 600, START)
        for r in readings:
            status, _ = post_reading(server, r.seq, r.glucose, minutes=15 * r.seq)
            assert status == 200
        probe = recognizer["result"].test_probe
        meal_time = START + timedelta(hours=4)
        request(
            server,
            "POST",
            "/patients/p1/meals",
            {"timestamp": ts(meal_time), "features": probe["features"]},
        )
        status, body = request(
            server,
            "GET",
            f"/patients/p1/timeline?from={ts(START)}&to={ts(START + timedelta(hours=10))}",
        )
        assert status == 200
        assert len(body["readings"]) == 40
        assert body["readings"] == [reading_to_record(r) for r in readings]
        assert [m["timestamp"] for m in body["meals"]] == [ts(meal_time)]

    def test_state_endpoint(self, server):
        create_patient(server)
        post_reading(server, 0, 95.0)
        status, body = request(server, "GET", "/patients/p1/state")
        assert status == 200
        assert body["state"] == {"context": "fasting", "band": "non-diabetic-range"}

    def test_missing_window_params_is_400(self, server):
        create_patient(server)
        status, body = request(server, "GET", "/patients/p1/timeline")
        assert status == 400


class TestAlertsEndpoint:
    def test_role_filtering(self, server):
        create_patient(server)
        post_reading(server, 0, 130.0)
        post_reading(server, 1, 305.0, minutes=15)
        _, patient_view = request(server, "GET", "/patients/p1/alerts")
        _, doctor_view = request(server, "GET", "/patients/p1/alerts", headers={"X-Role": "doctor"})
        _, family_view = request(server, "GET", "/patients/p1/alerts", headers={"X-Role": "family"})
        assert {a["severity"] for a in patient_view["alerts"]} == {"high", "very-high"}
        assert [a["severity"] for a in doctor_view["alerts"]] == ["very-high"]
        assert [a["severity"] for a in family_view["alerts"]] == ["very-high"]
        high = [a for a in patient_view["alerts"] if a["severity"] == "high"][0]
        assert "physical activity" in high["recommendation"]

    def test_bad_role_is_400(self, server):
        create_patient(server)
        status, _ = request(server, "GET", "/patients/p1/alerts", headers={"X-Role": "admin"})
        assert status == 400


class TestEventStream:
    def read_events(self, server, patient_id, collected, ready):
        req = urllib.request.Request(url(server, f"/patients/{patient_id}/events"))
        with urllib.request.urlopen(req, timeout=10) as resp:
            ready.set()
            event_type = None
            while True:
                line = resp.readline().decode("utf-8")
                if line.startswith("event:"):
                    event_type = line.split(":", 1)[1].strip()
                elif line.startswith("data:") and event_type:
                    collected.append((event_type, json.loads(line.split(":", 1)[1])))
                    if len(collected) >= 2:
                        return

    def test_reading_and_alert_events_arrive(self, server):
        create_patient(server)
        collected = []
        ready = threading.Event()
        t = threading.Thread(target=self.read_events, args=(server, "p1", collected, ready))
        t.start()
        assert ready.wait(5)
        time.sleep(0.2)  # subscription races the first publish otherwise
        post_reading(server, 0, 130.0)
        t.join(timeout=10)
        assert not t.is_alive()
        kinds = [k for k, _ in collected]
        assert kinds == ["reading", "alert"]
        assert collected[0][1]["glucose"] == 130.0
        assert collected[1][1]["severity"] == "high"
