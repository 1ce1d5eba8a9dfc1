"""Patient profiles, session persistence, and cross-session trend queries.

Storage is a human-inspectable directory tree, no database:

    <root>/patients.json                     array of profiles
    <root>/sessions/<session_id>.json        config echo, report, events, records
    <root>/sessions/<session_id>.samples.csv raw gaze stream
    <root>/pedagogy/graph.json               learning-path graph
    <root>/pedagogy/progress/<student>.json  per-student completion

The store is append-only: session files are never mutated after save. All
numbers serialize with 9 significant digits, which makes save -> load -> save
byte-stable. One writer at a time per store directory; the control plane
enforces that. Timestamps are UTC ISO-8601 with millisecond precision.
"""

from __future__ import annotations

import csv
import io
import json
import uuid
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotFoundError, ReferentialError, ValidationError
from .geometry import Direction3, GazeRay, GazeSample
from .metrics import TREND_METRICS, ExamReport, Flag
from .protocol import (
    EventKind,
    ExamConfig,
    SampleRecord,
    Side,
    TestKind,
    TrialEvent,
    config_from_dict,
)

SAMPLES_CSV_HEADER = (
    "t,left_ox,left_oy,left_oz,left_dx,left_dy,left_dz,"
    "right_ox,right_oy,right_oz,right_dx,right_dy,right_dz,"
    "pupil_l,pupil_r,open_l,open_r,head_yaw"
)

_RECORD_COLUMNS = SampleRecord._fields


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def round9(value):
    """Recursively round floats to 9 significant digits for byte-stable JSON."""
    if isinstance(value, float):
        return float(f"{value:.9g}")
    if isinstance(value, dict):
        return {k: round9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round9(v) for v in value]
    return value


def _dump_json(path: Path, obj) -> None:
    text = json.dumps(round9(obj), indent=2) + "\n"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


@dataclass(slots=True)
class PatientProfile:
    id: str
    display_name: str
    created_at: str


@dataclass(slots=True)
class SessionRecord:
    """One persisted exam session: everything needed to re-inspect it."""

    session_id: str
    patient_id: str
    started_at: str
    config: ExamConfig
    report: ExamReport
    events: list[TrialEvent]
    records: list[SampleRecord]
    samples_file: str


def session_record_to_dict(rec: SessionRecord) -> dict:
    report = asdict(rec.report)
    report["test_kind"] = rec.report.test_kind.value
    report["flags"] = {k: v.value for k, v in rec.report.flags.items()}
    report["overall"] = rec.report.overall.value
    config = asdict(rec.config)
    config["test_kind"] = rec.config.test_kind.value
    return {
        "session_id": rec.session_id,
        "patient_id": rec.patient_id,
        "started_at": rec.started_at,
        "config": config,
        "report": report,
        "events": [
            {
                "kind": e.kind.value,
                "t": e.t,
                "side": e.side.value,
                "latency_s": e.latency_s,
            }
            for e in rec.events
        ],
        "records": {
            col: [getattr(r, col) for r in rec.records] for col in _RECORD_COLUMNS
        },
        "samples_file": rec.samples_file,
    }


def session_record_from_dict(data: dict) -> SessionRecord:
    cfg = config_from_dict(data["config"])
    rep_data = dict(data["report"])
    rep_data["test_kind"] = TestKind(rep_data["test_kind"])
    rep_data["flags"] = {k: Flag(v) for k, v in rep_data["flags"].items()}
    rep_data["overall"] = Flag(rep_data["overall"])
    report = ExamReport(**rep_data)
    events = [
        TrialEvent(EventKind(e["kind"]), e["t"], Side(e["side"]), e["latency_s"])
        for e in data["events"]
    ]
    cols = data["records"]
    records = [
        SampleRecord(*(cols[c][i] for c in _RECORD_COLUMNS))
        for i in range(len(cols["t"]))
    ]
    return SessionRecord(
        session_id=data["session_id"],
        patient_id=data["patient_id"],
        started_at=data["started_at"],
        config=cfg,
        report=report,
        events=events,
        records=records,
        samples_file=data["samples_file"],
    )


def samples_to_csv(samples: list[GazeSample]) -> str:
    out = io.StringIO()
    out.write(SAMPLES_CSV_HEADER + "\n")
    for s in samples:
        lo, ld = s.left.origin, s.left.dir
        ro, rd = s.right.origin, s.right.dir
        row = (
            s.t, lo[0], lo[1], lo[2], ld.x, ld.y, ld.z,
            ro[0], ro[1], ro[2], rd.x, rd.y, rd.z,
            s.pupil_diameter_left, s.pupil_diameter_right,
            s.eye_openness_left, s.eye_openness_right, s.head_yaw,
        )
        out.write(",".join(f"{v:.9g}" for v in row) + "\n")
    return out.getvalue()


def samples_from_csv(text: str) -> list[GazeSample]:
    """Parse a samples CSV (the export format, or externally produced data).

    Loaded direction components are taken as-is when within 1e-6 of unit norm
    (keeps round trips byte-stable) and rejected otherwise.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty samples CSV") from None
    if ",".join(h.strip() for h in header) != SAMPLES_CSV_HEADER:
        raise ValidationError(
            f"samples CSV header mismatch; expected exactly: {SAMPLES_CSV_HEADER}"
        )
    samples: list[GazeSample] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 18:
            raise ValidationError(f"samples CSV line {lineno}: expected 18 fields")
        try:
            v = [float(x) for x in row]
        except ValueError:
            raise ValidationError(f"samples CSV line {lineno}: non-numeric field") from None
        for di in (4, 10):  # left_dx, right_dx
            norm = (v[di] ** 2 + v[di + 1] ** 2 + v[di + 2] ** 2) ** 0.5
            if abs(norm - 1.0) > 1e-6:
                raise ValidationError(
                    f"samples CSV line {lineno}: gaze direction is not unit-norm"
                )
        if not 0.0 <= v[15] <= 1.0 or not 0.0 <= v[16] <= 1.0:
            raise ValidationError(f"samples CSV line {lineno}: eye openness outside [0,1]")
        if v[13] < 0.0 or v[14] < 0.0:
            raise ValidationError(f"samples CSV line {lineno}: negative pupil diameter")
        samples.append(
            GazeSample(
                t=v[0],
                left=GazeRay((v[1], v[2], v[3]), Direction3(v[4], v[5], v[6])),
                right=GazeRay((v[7], v[8], v[9]), Direction3(v[10], v[11], v[12])),
                pupil_diameter_left=v[13],
                pupil_diameter_right=v[14],
                eye_openness_left=v[15],
                eye_openness_right=v[16],
                head_yaw=v[17],
            )
        )
    return samples


class RecordsStore:
    """Filesystem-backed store. Methods that write assume they are the single
    writer for the directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.pedagogy_dir = self.root / "pedagogy"
        self.progress_dir = self.pedagogy_dir / "progress"
        for d in (self.root, self.sessions_dir, self.progress_dir):
            d.mkdir(parents=True, exist_ok=True)
        self.patients_file = self.root / "patients.json"
        if not self.patients_file.exists():
            _dump_json(self.patients_file, [])

    # -- patients ---------------------------------------------------------

    def _read_patients(self) -> list[dict]:
        return json.loads(self.patients_file.read_text())

    def create_patient(self, name: str, now: str | None = None) -> PatientProfile:
        if not name or not name.strip():
            raise ValidationError("patient display_name must be non-empty")
        patients = self._read_patients()
        taken = {p["id"] for p in patients}
        pid = f"P{uuid.uuid4().hex[:8]}"
        while pid in taken:  # id collisions retried internally, never surfaced
            pid = f"P{uuid.uuid4().hex[:8]}"
        profile = PatientProfile(id=pid, display_name=name.strip(), created_at=now or _now_iso())
        patients.append(asdict(profile))
        _dump_json(self.patients_file, patients)
        return profile

    def list_patients(self) -> list[PatientProfile]:
        return [PatientProfile(**p) for p in self._read_patients()]

    def get_patient(self, patient_id: str) -> PatientProfile:
        for p in self._read_patients():
            if p["id"] == patient_id:
                return PatientProfile(**p)
        raise NotFoundError(f"unknown patient id {patient_id!r}")

    # -- sessions -----------------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def new_session_id(self) -> str:
        return f"S{uuid.uuid4().hex[:12]}"

    def save_session(self, record: SessionRecord, samples: list[GazeSample]) -> str:
        if not any(p["id"] == record.patient_id for p in self._read_patients()):
            raise ReferentialError(
                f"session references unknown patient {record.patient_id!r}"
            )
        path = self._session_path(record.session_id)
        if path.exists():
            raise ValidationError(
                f"session {record.session_id!r} already exists; the store is append-only"
            )
        csv_path = self.sessions_dir / record.samples_file
        tmp = csv_path.with_suffix(".tmp")
        tmp.write_text(samples_to_csv(samples))
        tmp.replace(csv_path)
        _dump_json(path, session_record_to_dict(record))
        return record.session_id

    def load_session(self, session_id: str) -> SessionRecord:
        path = self._session_path(session_id)
        if not path.exists():
            raise NotFoundError(f"unknown session id {session_id!r}")
        return session_record_from_dict(json.loads(path.read_text()))

    def load_samples(self, session_id: str) -> list[GazeSample]:
        rec = self.load_session(session_id)
        return samples_from_csv((self.sessions_dir / rec.samples_file).read_text())

    def list_sessions(self, patient_id: str | None = None) -> list[SessionRecord]:
        out = []
        for path in sorted(self.sessions_dir.glob("*.json")):
            rec = session_record_from_dict(json.loads(path.read_text()))
            if patient_id is None or rec.patient_id == patient_id:
                out.append(rec)
        return out

    # -- trends --------------------------------------------------------------

    def trend(self, patient_id: str, metric_name: str) -> list[tuple[str, float]]:
        """Chronological (started_at, value) pairs across the patient's
        sessions; sessions lacking the metric are skipped."""
        self.get_patient(patient_id)
        if metric_name not in TREND_METRICS:
            raise ValidationError(
                f"unknown metric {metric_name!r}; valid metrics: {', '.join(TREND_METRICS)}"
            )
        rows = []
        for rec in self.list_sessions(patient_id):
            value = getattr(rec.report, metric_name)
            if value is not None:
                rows.append((rec.started_at, rec.session_id, value))
        rows.sort(key=lambda r: (r[0], r[1]))
        return [(started, value) for started, _, value in rows]

    # -- pedagogy persistence ---------------------------------------------

    def save_graph(self, graph_dict: dict) -> None:
        _dump_json(self.pedagogy_dir / "graph.json", graph_dict)

    def load_graph(self) -> dict | None:
        path = self.pedagogy_dir / "graph.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def save_progress(self, student_id: str, completed: list[str]) -> None:
        if not student_id or "/" in student_id:
            raise ValidationError("student id must be non-empty and slash-free")
        _dump_json(
            self.progress_dir / f"{student_id}.json",
            {"student_id": student_id, "completed": sorted(completed)},
        )

    def load_progress(self, student_id: str) -> list[str]:
        path = self.progress_dir / f"{student_id}.json"
        if not path.exists():
            return []
        return list(json.loads(path.read_text())["completed"])
