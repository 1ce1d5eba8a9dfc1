#!/usr/bin/env python3
"""Tour of the HTTP control plane: create a patient, watch a live run through
the stream cursor, then read the report and trend, all against an in-process
service on a free port."""

import json
import tempfile
import threading
import time
import urllib.request

from oculab.service import serve


def call(base, method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(base + path, data=data, method=method)
    if data:
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


with tempfile.TemporaryDirectory() as root:
    server, service = serve("127.0.0.1:0", root)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address[:2]
    base = f"http://{host}:{port}"
    print(f"service on {base}, health: {call(base, 'GET', '/health')}")

    patient = call(base, "POST", "/patients", {"display_name": "Demo Patient"})
    print(f"patient: {patient['id']}")

    run = call(base, "POST", "/runs", {
        "patient_id": patient["id"],
        "test": {"test_kind": "SMOOTH_PURSUIT", "duration_s": 6.0, "seed": 5},
        "subject": {"preset": "normal", "seed": 6},
        "live": True,
    })
    sid = run["session_id"]
    print(f"live session {sid}; polling /stream ...")

    cursor, records = "0", 0
    while True:
        chunk = call(base, "GET", f"/sessions/{sid}/stream?cursor={cursor}")
        records += len(chunk["records"])
        for ev in chunk["events"]:
            print(f"  event {ev['kind']} at t={ev['t']:.3f}")
        cursor = chunk["next_cursor"]
        if chunk["finished"] and not chunk["events"] and not chunk["records"]:
            break
        time.sleep(0.05)
    print(f"streamed {records} records")

    session = call(base, "GET", f"/sessions/{sid}")
    print(f"report: precision RMS {session['report']['precision_rms_deg']:.2f} deg, "
          f"overall {session['report']['overall']}")
    trend = call(base, "GET", f"/patients/{patient['id']}/trends?metric=precision_rms_deg")
    print(f"trend points: {len(trend['points'])}")

    server.shutdown()
    server.server_close()
    service.shutdown()
print("done")
