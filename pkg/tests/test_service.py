import json
import threading
import time
import urllib.request

import pytest

from oculab.service import ExamService, serve


@pytest.fixture
def api(tmp_path):
    server, service = serve("127.0.0.1:0", str(tmp_path / "store"))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    base = f"http://{host}:{port}"

    def call(method, path, body=None):
        data = json.dumps(body).encode() if body is not None else None
        req = urllib.request.Request(base + path, data=data, method=method)
        if data:
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req) as resp:
                return resp.status, json.loads(resp.read())
        except urllib.error.HTTPError as err:
            return err.code, json.loads(err.read())

    yield call, service
    server.shutdown()
    server.server_close()
    service.shutdown()


def pursuit_body(patient_id, **kw):
    body = {
        "patient_id": patient_id,
        "test": {"test_kind": "SMOOTH_PURSUIT", "duration_s": 5.0, "seed": 1},
        "subject": {"preset": "normal", "seed": 2},
    }
    body.update(kw)
    return body


def test_health(api):
    call, _ = api
    status, body = call("GET", "/health")
    assert status == 200 and body == {"status": "ok"}


def test_patient_crud_and_validation(api):
    call, _ = api
    status, p = call("POST", "/patients", {"display_name": "Ada"})
    assert status == 201 and p["display_name"] == "Ada"
    status, listing = call("GET", "/patients")
    assert status == 200 and [x["id"] for x in listing["patients"]] == [p["id"]]
    status, err = call("POST", "/patients", {"display_name": ""})
    assert status == 400 and "display_name" in err["error"]


def test_batch_run_then_read_session_and_trend(api):
    call, _ = api
    _, p = call("POST", "/patients", {"display_name": "A"})
    status, out = call("POST", "/runs", pursuit_body(p["id"]))
    assert status == 201 and out["status"] == "finished"
    sid = out["session_id"]

    status, session = call("GET", f"/sessions/{sid}")
    assert status == 200
    assert session["patient_id"] == p["id"]
    assert session["report"]["precision_rms_deg"] is not None
    assert session["report"]["overall"] == "NORMAL"

    status, trend = call("GET", f"/patients/{p['id']}/trends?metric=precision_rms_deg")
    assert status == 200 and len(trend["points"]) == 1

    status, err = call("GET", f"/patients/{p['id']}/trends?metric=bogus")
    assert status == 400
    status, err = call("GET", "/sessions/S-missing")
    assert status == 404


def test_run_requires_exactly_one_subject_source(api):
    call, _ = api
    _, p = call("POST", "/patients", {"display_name": "B"})
    body = pursuit_body(p["id"])
    del body["subject"]
    status, err = call("POST", "/runs", body)
    assert status == 400
    status, err = call("POST", "/runs", pursuit_body(p["id"], replay={"csv": "t\n"}))
    assert status == 400


def test_stream_cursors_cover_the_whole_log_exactly_once(api):
    call, _ = api
    _, p = call("POST", "/patients", {"display_name": "C"})
    _, out = call("POST", "/runs", pursuit_body(p["id"]))
    sid = out["session_id"]

    _, full = call("GET", f"/sessions/{sid}/stream?cursor=0")
    assert full["finished"]
    n_events, n_records = len(full["events"]), len(full["records"])
    assert n_records > 0
    assert full["next_cursor"] == f"{n_events}:{n_records}"

    # cursor at the end: empty batch, same cursor
    _, empty = call("GET", f"/sessions/{sid}/stream?cursor={full['next_cursor']}")
    assert empty["events"] == [] and empty["records"] == []
    assert empty["next_cursor"] == full["next_cursor"]

    # chunked reads concatenate to the batch log
    events, records, cursor = [], [], "0"
    for _ in range(1000):
        _, chunk = call("GET", f"/sessions/{sid}/stream?cursor={cursor}")
        events.extend(chunk["events"][:3])
        records.extend(chunk["records"][:50])
        e, r = map(int, cursor.split(":")) if cursor != "0" else (0, 0)
        cursor = f"{min(e + 3, n_events)}:{min(r + 50, n_records)}"
        if [e, r] == [n_events, n_records]:
            break
    assert events == full["events"]
    assert records == full["records"]

    status, err = call("GET", f"/sessions/{sid}/stream?cursor=zap")
    assert status == 400


def test_live_run_streams_then_persists(api):
    call, service = api
    _, p = call("POST", "/patients", {"display_name": "L"})
    status, out = call("POST", "/runs", pursuit_body(p["id"], live=True))
    assert status == 202 and out["status"] == "running"
    sid = out["session_id"]

    seen_events, seen_records, cursor = [], [], "0"
    deadline = time.time() + 30.0
    while time.time() < deadline:
        _, chunk = call("GET", f"/sessions/{sid}/stream?cursor={cursor}")
        seen_events.extend(chunk["events"])
        seen_records.extend(chunk["records"])
        cursor = chunk["next_cursor"]
        if chunk["finished"] and not chunk["events"] and not chunk["records"]:
            break
        time.sleep(0.01)
    assert seen_events and seen_events[-1]["kind"] == "SESSION_END"
    ts = [r["t"] for r in seen_records]
    assert ts == sorted(ts) and len(set(ts)) == len(ts)  # in order, no duplicates

    for t in service.runners:
        t.join(timeout=10.0)
    status, session = call("GET", f"/sessions/{sid}")
    assert status == 200 and session["status"] == "finished"
    assert session["records"]["t"] == ts


def test_concurrent_runs_for_two_patients(api):
    call, service = api
    _, pa = call("POST", "/patients", {"display_name": "PA"})
    _, pb = call("POST", "/patients", {"display_name": "PB"})
    _, ra = call("POST", "/runs", pursuit_body(pa["id"], live=True))
    _, rb = call("POST", "/runs", pursuit_body(pb["id"], live=True))
    for t in service.runners:
        t.join(timeout=30.0)
    _, sa = call("GET", f"/sessions/{ra['session_id']}")
    _, sb = call("GET", f"/sessions/{rb['session_id']}")
    assert sa["status"] == sb["status"] == "finished"
    assert sa["patient_id"] == pa["id"]
    assert sb["patient_id"] == pb["id"]
    # same config and seeds: identical logs for both patients
    assert sa["records"] == sb["records"]
    assert sa["events"] == sb["events"]


def test_pedagogy_routes(api):
    call, _ = api
    status, graph = call("GET", "/pedagogy/graph")
    assert status == 200
    assert {n["id"] for n in graph["nodes"]} == {"oculomotor-examination"}

    status, prog = call("GET", "/pedagogy/progress/stu1")
    assert status == 200 and prog["completed"] == []
    assert set(prog["available"]["oculomotor-examination"]) == {
        "saccade-latency", "smooth-pursuit", "vor",
    }

    status, prog = call(
        "POST", "/pedagogy/progress/stu1",
        {"topic": "oculomotor-examination", "component": "vor"},
    )
    assert status == 200
    assert prog["completed"] == ["oculomotor-examination/vor"]

    # a custom graph with an edge enforces order across topics
    new_graph = {
        "nodes": [{"id": "basics", "title": "Basics"}, {"id": "advanced", "title": "Advanced"}],
        "edges": [["basics", "advanced"]],
    }
    status, saved = call("PUT", "/pedagogy/graph", new_graph)
    assert status == 200 and saved["edges"] == [["basics", "advanced"]]
    status, err = call("POST", "/pedagogy/progress/stu2", {"topic": "advanced"})
    assert status == 409  # locked
    status, _ = call("POST", "/pedagogy/progress/stu2", {"topic": "basics"})
    assert status == 200


def test_batch_and_live_runs_persist_identical_records(tmp_path):
    """Same (config, seeds): the two execution modes write byte-identical
    session files."""
    results = {}
    for mode, live in (("batch", False), ("live", True)):
        service = ExamService(str(tmp_path / mode))
        _, patient = 0, service.store.create_patient("twin", now="2026-02-01T00:00:00.000+00:00")
        body = pursuit_body(
            patient.id,
            live=live,
            session_id="S-twin",
            started_at="2026-02-02T00:00:00.000+00:00",
        )
        service.start_run(body)
        for t in service.runners:
            t.join(timeout=30.0)
        service.shutdown()
        json_bytes = (service.store.sessions_dir / "S-twin.json").read_bytes()
        csv_bytes = (service.store.sessions_dir / "S-twin.samples.csv").read_bytes()
        results[mode] = (json_bytes.replace(patient.id.encode(), b"P"), csv_bytes)
    assert results["batch"][0] == results["live"][0]
    assert results["batch"][1] == results["live"][1]
