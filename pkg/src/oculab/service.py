"""HTTP control plane: sessions, simulation, persistence, trends, pedagogy.

JSON over plain stdlib ThreadingHTTPServer — the API is small and local, so a
web framework would buy nothing. Concurrency model: any number of concurrent
sessions (each owned by its runner), reads served from immutable snapshots,
and every store write funneled through one writer thread.

Live sessions advance on the virtual sample clock, not wall time; a
``realtime`` flag merely throttles emission for human viewing. Streaming is
long-poll with a monotone ``e:r`` cursor over the (events, records) log.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import pedagogy
from .errors import (
    ConfigError,
    CycleError,
    LockedError,
    NotFoundError,
    OculabError,
    ReferentialError,
    SessionStateError,
    StreamOrderError,
    ValidationError,
)
from .metrics import thresholds_from_dict
from .protocol import config_from_dict
from .runs import RunRequest, execute_run
from .store import RecordsStore, round9, samples_from_csv, session_record_to_dict
from .subject import params_from_dict

_STATUS_BY_ERROR = (
    (NotFoundError, 404),
    (LockedError, 409),
    (CycleError, 409),
    (ReferentialError, 400),
    (ValidationError, 400),
    (ConfigError, 400),
    (StreamOrderError, 400),
    (SessionStateError, 409),
)


class _ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class _LiveSession:
    """Append-only in-memory log of one run, read by stream cursors."""

    def __init__(self, session_id: str, patient_id: str):
        self.session_id = session_id
        self.patient_id = patient_id
        self.lock = threading.Lock()
        self.events: list[dict] = []
        self.records: list[dict] = []
        self.finished = False
        self.error: str | None = None

    def append(self, events, record) -> None:
        # stream values share the store's 9-significant-digit convention, so
        # a replayed stream matches the persisted session exactly
        with self.lock:
            for e in events:
                self.events.append(
                    round9({"kind": e.kind.value, "t": e.t, "side": e.side.value,
                            "latency_s": e.latency_s})
                )
            if record is not None:
                self.records.append(round9(record._asdict()))

    def read(self, ev_from: int, rec_from: int) -> tuple[list[dict], list[dict], bool, str | None]:
        with self.lock:
            return (
                self.events[ev_from:],
                self.records[rec_from:],
                self.finished,
                self.error,
            )


class ExamService:
    """Transport-free core of the API; the HTTP handler is a thin shim over
    :meth:`dispatch`, which keeps the routes directly testable."""

    def __init__(self, store_path: str):
        self.store = RecordsStore(store_path)
        self.sessions: dict[str, _LiveSession] = {}
        self.sessions_lock = threading.Lock()
        self.runners: list[threading.Thread] = []
        self._writes: queue.Queue = queue.Queue()
        self._writer = threading.Thread(target=self._write_loop, daemon=True)
        self._writer.start()

    # -- single-writer store access ---------------------------------------

    def _write_loop(self) -> None:
        while True:
            item = self._writes.get()
            if item is None:
                return
            fn, args, box, done = item
            try:
                box["result"] = fn(*args)
            except Exception as exc:  # surfaced to the submitting thread
                box["error"] = exc
            finally:
                done.set()

    def _write(self, fn, *args):
        box: dict = {}
        done = threading.Event()
        self._writes.put((fn, args, box, done))
        done.wait()
        if "error" in box:
            raise box["error"]
        return box.get("result")

    def shutdown(self) -> None:
        """Flush in-flight sessions and stop the writer."""
        for t in list(self.runners):
            t.join(timeout=60.0)
        self._writes.put(None)
        self._writer.join(timeout=10.0)

    # -- runs ------------------------------------------------------------

    def _build_request(self, body: dict) -> tuple[RunRequest, bool, bool]:
        try:
            cfg = config_from_dict(body["test"])
        except KeyError:
            raise ValidationError("run request requires a 'test' config object") from None
        patient_id = body.get("patient_id")
        if not patient_id:
            raise ValidationError("run request requires patient_id")
        subject = None
        replay = None
        if "subject" in body and body.get("replay") is None:
            subject = params_from_dict(body["subject"])
        elif body.get("replay") is not None and "subject" not in body:
            replay = samples_from_csv(body["replay"]["csv"])
        else:
            raise ValidationError("provide exactly one of 'subject' or 'replay'")
        thresholds = (
            thresholds_from_dict(body["thresholds"]) if body.get("thresholds") else None
        )
        request = RunRequest(
            patient_id=patient_id,
            config=cfg,
            subject=subject,
            replay_samples=replay,
            thresholds=thresholds,
            session_id=body.get("session_id"),
            started_at=body.get("started_at"),
        )
        return request, bool(body.get("live", False)), bool(body.get("realtime", False))

    def start_run(self, body: dict) -> dict:
        request, live, realtime = self._build_request(body)
        self.store.get_patient(request.patient_id)
        session_id = request.session_id or self.store.new_session_id()
        request.session_id = session_id
        buffer = _LiveSession(session_id, request.patient_id)
        with self.sessions_lock:
            if session_id in self.sessions:
                raise ValidationError(f"session {session_id!r} already exists")
            self.sessions[session_id] = buffer
        sleep_s = 1.0 / request.config.sample_rate_hz if realtime else 0.0

        def on_step(events, record):
            buffer.append(events, record)
            if sleep_s:
                time.sleep(sleep_s)

        def save(record, samples):
            return self._write(self.store.save_session, record, samples)

        def run():
            try:
                execute_run(request, self.store, save=save, on_step=on_step)
            except Exception as exc:
                with buffer.lock:
                    buffer.error = f"{type(exc).__name__}: {exc}"
            finally:
                with buffer.lock:
                    buffer.finished = True

        if live:
            t = threading.Thread(target=run, daemon=True)
            self.runners.append(t)
            t.start()
            return {"session_id": session_id, "status": "running"}
        run()
        _, _, _, error = buffer.read(0, 0)
        if error is not None:
            raise ValidationError(f"run failed: {error}")
        return {"session_id": session_id, "status": "finished"}

    def _load_finished_buffer(self, session_id: str) -> _LiveSession:
        rec = self.store.load_session(session_id)
        buffer = _LiveSession(session_id, rec.patient_id)
        data = session_record_to_dict(rec)
        buffer.events = data["events"]
        cols = data["records"]
        names = list(cols)
        buffer.records = [
            {n: cols[n][i] for n in names} for i in range(len(cols["t"]))
        ]
        buffer.finished = True
        return buffer

    def stream(self, session_id: str, cursor: str) -> dict:
        with self.sessions_lock:
            buffer = self.sessions.get(session_id)
        if buffer is None:
            buffer = self._load_finished_buffer(session_id)  # NotFoundError if absent
            with self.sessions_lock:
                self.sessions.setdefault(session_id, buffer)
        try:
            if cursor in ("", "0", None):
                ev_from, rec_from = 0, 0
            else:
                ev_s, rec_s = cursor.split(":")
                ev_from, rec_from = int(ev_s), int(rec_s)
                if ev_from < 0 or rec_from < 0:
                    raise ValueError
        except ValueError:
            raise ValidationError(f"bad cursor {cursor!r}; expected 'events:records'") from None
        events, records, finished, error = buffer.read(ev_from, rec_from)
        out = {
            "session_id": session_id,
            "events": events,
            "records": records,
            "next_cursor": f"{ev_from + len(events)}:{rec_from + len(records)}",
            "finished": finished,
        }
        if error is not None:
            out["error"] = error
        return out

    def get_session(self, session_id: str) -> dict:
        with self.sessions_lock:
            buffer = self.sessions.get(session_id)
        if buffer is not None:
            _, _, finished, error = buffer.read(0, 0)
            if not finished:
                return {"session_id": session_id, "status": "running"}
            if error is not None:
                return {"session_id": session_id, "status": "failed", "error": error}
        data = session_record_to_dict(self.store.load_session(session_id))
        data["status"] = "finished"
        return data

    # -- pedagogy ------------------------------------------------------------

    def _graph(self) -> pedagogy.TopicGraph:
        data = self.store.load_graph()
        if data is None:
            return pedagogy.default_graph()
        return pedagogy.graph_from_dict(data)

    def get_progress(self, student_id: str) -> dict:
        graph = self._graph()
        progress = pedagogy.StudentProgress(
            student_id, set(self.store.load_progress(student_id))
        )
        return {
            "student_id": student_id,
            "completed": sorted(progress.completed),
            "available": pedagogy.available(graph, progress),
        }

    def post_progress(self, student_id: str, body: dict) -> dict:
        topic = body.get("topic")
        if not topic:
            raise ValidationError("progress update requires 'topic'")
        graph = self._graph()
        progress = pedagogy.StudentProgress(
            student_id, set(self.store.load_progress(student_id))
        )
        progress = pedagogy.complete(progress, graph, topic, body.get("component"))
        self._write(self.store.save_progress, student_id, sorted(progress.completed))
        return self.get_progress(student_id)

    # -- dispatch ---------------------------------------------------------

    def dispatch(self, method: str, path: str, query: dict, body: dict | None) -> tuple[int, dict]:
        parts = [p for p in path.split("/") if p]
        try:
            if method == "GET" and parts == ["health"]:
                return 200, {"status": "ok"}
            if parts == ["patients"]:
                if method == "GET":
                    return 200, {
                        "patients": [
                            {"id": p.id, "display_name": p.display_name, "created_at": p.created_at}
                            for p in self.store.list_patients()
                        ]
                    }
                if method == "POST":
                    name = (body or {}).get("display_name", "")
                    profile = self._write(self.store.create_patient, name)
                    return 201, {
                        "id": profile.id,
                        "display_name": profile.display_name,
                        "created_at": profile.created_at,
                    }
            if method == "POST" and parts == ["runs"]:
                out = self.start_run(body or {})
                return 202 if out["status"] == "running" else 201, out
            if len(parts) == 2 and parts[0] == "sessions" and method == "GET":
                return 200, self.get_session(parts[1])
            if len(parts) == 3 and parts[0] == "sessions" and parts[2] == "stream" and method == "GET":
                cursor = query.get("cursor", ["0"])[0]
                return 200, self.stream(parts[1], cursor)
            if len(parts) == 3 and parts[0] == "patients" and parts[2] == "trends" and method == "GET":
                metric = query.get("metric", [None])[0]
                if not metric:
                    raise ValidationError("trends requires ?metric=<name>")
                points = self.store.trend(parts[1], metric)
                return 200, {
                    "patient_id": parts[1],
                    "metric": metric,
                    "points": [{"started_at": s, "value": v} for s, v in points],
                }
            if parts == ["pedagogy", "graph"]:
                if method == "GET":
                    return 200, pedagogy.graph_to_dict(self._graph())
                if method == "PUT":
                    graph = pedagogy.graph_from_dict(body or {})
                    self._write(self.store.save_graph, pedagogy.graph_to_dict(graph))
                    return 200, pedagogy.graph_to_dict(graph)
            if len(parts) == 3 and parts[:2] == ["pedagogy", "progress"]:
                if method == "GET":
                    return 200, self.get_progress(parts[2])
                if method == "POST":
                    return 200, self.post_progress(parts[2], body or {})
            return 404, {"error": f"no route for {method} {path}"}
        except OculabError as exc:
            for etype, status in _STATUS_BY_ERROR:
                if isinstance(exc, etype):
                    return status, {"error": str(exc), "type": type(exc).__name__}
            return 500, {"error": str(exc), "type": type(exc).__name__}


class _Handler(BaseHTTPRequestHandler):
    service: ExamService  # set by serve()

    def _respond(self) -> None:
        url = urlparse(self.path)
        body = None
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            try:
                body = json.loads(self.rfile.read(length))
            except json.JSONDecodeError:
                self._send(400, {"error": "request body is not valid JSON"})
                return
        status, payload = self.service.dispatch(
            self.command, url.path, parse_qs(url.query), body
        )
        self._send(status, payload)

    def _send(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    do_GET = do_POST = do_PUT = _respond

    def log_message(self, fmt, *args):  # quiet by default; CLI prints its own line
        pass


def serve(bind_address: str, store_path: str) -> tuple[ThreadingHTTPServer, ExamService]:
    """Bind the API; the caller runs serve_forever(). Port 0 picks a free port
    (the bound address is on the returned server). Raises OSError when the
    port is taken."""
    host, _, port_s = bind_address.partition(":")
    service = ExamService(store_path)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port_s or 0)), handler)
    return server, service
