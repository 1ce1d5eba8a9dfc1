#!/usr/bin/env python3
"""Record contract fixtures for the dashboard tests from the real backend.

Everything the dashboard asserts against comes from actual service responses
(or the actual config validator), so the frontend never drifts from the wire
format silently. Rerun after backend changes: python3 scripts/record_fixtures.py
"""

import json
import threading
import time
import urllib.request
from pathlib import Path
from tempfile import TemporaryDirectory

from oculab.errors import ConfigError
from oculab.protocol import config_from_dict
from oculab.service import serve

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def record_validation_cases() -> None:
    base = {
        "test_kind": "SMOOTH_PURSUIT", "duration_s": 20.0, "sample_rate_hz": 120.0,
        "eccentricity_deg": 15.0, "travel_deg": 20.0, "period_s": 3.0,
        "isi_min_s": 2.0, "isi_max_s": 5.0, "trial_timeout_s": 5.0,
        "center_dwell_s": 0.0, "target_radius_m": 0.1, "target_distance_m": 2.0,
        "seed": 0,
    }
    variants: list[dict] = [
        {},
        {"test_kind": "VOR"},
        {"test_kind": "SACCADE_LATENCY"},
        {"test_kind": "NOT_A_TEST"},
        {"duration_s": 0.0},
        {"duration_s": -3.0},
        {"sample_rate_hz": 59.9},
        {"sample_rate_hz": 120.1},
        {"sample_rate_hz": 60.0},
        {"eccentricity_deg": 0.0},
        {"travel_deg": -1.0},
        {"period_s": 0.0},
        {"isi_min_s": 5.0, "isi_max_s": 2.0},
        {"isi_min_s": 0.0},
        {"isi_min_s": 3.0, "isi_max_s": 3.0},
        {"trial_timeout_s": 0.0},
        {"center_dwell_s": -0.5},
        {"target_radius_m": 0.0},
        {"target_radius_m": 3.0},  # radius >= distance
        {"target_distance_m": 0.05},
        {"duration_s": 0.0, "period_s": -1.0, "sample_rate_hz": 10.0},
    ]
    cases = []
    for overrides in variants:
        draft = {**base, **overrides}
        try:
            config_from_dict(dict(draft))
            offending: list[str] = []
        except ConfigError as err:
            offending = sorted(err.fields)
        cases.append({"config": draft, "offending": offending})
    (FIXTURES / "validation_cases.json").write_text(json.dumps(cases, indent=2) + "\n")
    print(f"validation_cases.json: {len(cases)} cases")


def record_service_fixtures() -> None:
    with TemporaryDirectory() as root:
        server, service = serve("127.0.0.1:0", root)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        host, port = server.server_address[:2]
        base = f"http://{host}:{port}"

        def call(method, path, body=None):
            data = json.dumps(body).encode() if body is not None else None
            req = urllib.request.Request(base + path, data=data, method=method)
            if data:
                req.add_header("Content-Type", "application/json")
            with urllib.request.urlopen(req) as resp:
                return json.loads(resp.read())

        patient = call("POST", "/patients", {"display_name": "Fixture Patient"})

        # live session recorded through the cursor protocol as it runs
        run = call("POST", "/runs", {
            "patient_id": patient["id"],
            "test": {"test_kind": "SMOOTH_PURSUIT", "duration_s": 4.0, "seed": 42},
            "subject": {"preset": "normal", "seed": 43},
            "live": True,
            "session_id": "S-fixture",
            "started_at": "2026-05-01T10:00:00.000+00:00",
        })
        sid = run["session_id"]
        polls, cursor = [], "0"
        while True:
            chunk = call("GET", f"/sessions/{sid}/stream?cursor={cursor}")
            polls.append({"requested_cursor": cursor, "chunk": chunk})
            done = chunk["finished"] and not chunk["events"] and not chunk["records"]
            cursor = chunk["next_cursor"]
            if done:
                break
            time.sleep(0.02)
        batch = call("GET", f"/sessions/{sid}/stream?cursor=0")
        session = call("GET", f"/sessions/{sid}")
        (FIXTURES / "stream_session.json").write_text(
            json.dumps({"polls": polls, "batch": batch, "session": session}, indent=2) + "\n"
        )
        print(f"stream_session.json: {len(polls)} polls, "
              f"{len(batch['records'])} records")

        # three saccade sessions with improving latency for the trend chart
        for day, latency in enumerate((0.30, 0.25, 0.22), start=1):
            call("POST", "/runs", {
                "patient_id": patient["id"],
                "test": {"test_kind": "SACCADE_LATENCY", "duration_s": 30.0, "seed": day},
                "subject": {"preset": "normal", "seed": day,
                            "saccade_latency_mean_s": latency,
                            "saccade_latency_sd_s": 0.0},
                "session_id": f"S-trend-{day}",
                "started_at": f"2026-05-0{day + 1}T10:00:00.000+00:00",
            })
        trend = call("GET", f"/patients/{patient['id']}/trends?metric=latency_mean_s")
        (FIXTURES / "trend_fixture.json").write_text(json.dumps(trend, indent=2) + "\n")
        print(f"trend_fixture.json: {len(trend['points'])} points")

        server.shutdown()
        server.server_close()
        service.shutdown()


if __name__ == "__main__":
    FIXTURES.mkdir(exist_ok=True)
    record_validation_cases()
    record_service_fixtures()
