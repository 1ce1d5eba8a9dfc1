"""Command-line control plane.

    oculab simulate  run a test against the simulated subject and save it
    oculab analyze   print a saved session's report; --chart exports CSV+SVG
    oculab classify  re-screen a saved session against (custom) thresholds
    oculab trend     a metric across a patient's sessions, oldest first
    oculab import    replay an external samples CSV into a session
    oculab pedagogy  show or advance a student's learning path
    oculab serve     run the HTTP API for the dashboard

The store directory comes from --store, else $OCULAB_STORE, else
./oculab-store. A single JSON --config file may carry "test", "subject" and
"thresholds" sections; explicit flags win over the file. Exit codes: 0 ok,
1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import pedagogy
from .errors import OculabError, ValidationError
from .metrics import (
    Thresholds,
    classify,
    default_thresholds,
    precision_csv,
    precision_series,
    thresholds_from_dict,
)
from .protocol import ExamConfig, TestKind, config_from_dict
from .runs import RunRequest, execute_run
from .service import serve
from .store import RecordsStore, samples_from_csv
from .subject import params_from_dict
from .charts import line_chart_svg

_TEST_ALIASES = {
    "saccade": TestKind.SACCADE_LATENCY,
    "latency": TestKind.SACCADE_LATENCY,
    "saccade_latency": TestKind.SACCADE_LATENCY,
    "pursuit": TestKind.SMOOTH_PURSUIT,
    "smooth_pursuit": TestKind.SMOOTH_PURSUIT,
    "vor": TestKind.VOR,
}


def _store(args) -> RecordsStore:
    path = args.store or os.environ.get("OCULAB_STORE") or "./oculab-store"
    return RecordsStore(path)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValidationError("--config file must hold a JSON object")
    return doc


def _exam_config(args, doc: dict) -> ExamConfig:
    data = dict(doc.get("test", {}))
    if getattr(args, "test", None):
        key = args.test.lower()
        if key not in _TEST_ALIASES:
            raise ValidationError(
                f"unknown test {args.test!r}; expected one of {sorted(set(_TEST_ALIASES))}"
            )
        data["test_kind"] = _TEST_ALIASES[key].value
    if getattr(args, "duration", None) is not None:
        data["duration_s"] = args.duration
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    return config_from_dict(data)


def _subject(args, doc: dict):
    data = dict(doc.get("subject", {}))
    if getattr(args, "preset", None):
        data["preset"] = args.preset
    if getattr(args, "subject_seed", None) is not None:
        data["seed"] = args.subject_seed
    if not data:
        data = {"preset": "normal"}
    return params_from_dict(data)


def _thresholds(doc: dict) -> Thresholds:
    if doc.get("thresholds"):
        return thresholds_from_dict(doc["thresholds"])
    return default_thresholds()


def _emit(args, payload: dict, table_lines: list[str], csv_text: str | None = None) -> None:
    out = getattr(args, "out", "table") or "table"
    if out == "json":
        print(json.dumps(payload, indent=2, default=str))
    elif out == "csv":
        if csv_text is None:
            raise ValidationError("this command has no CSV form; use --out json|table")
        sys.stdout.write(csv_text)
    else:
        for line in table_lines:
            print(line)


def _report_payload(report) -> dict:
    data = asdict(report)
    data["test_kind"] = report.test_kind.value
    data["flags"] = {k: v.value for k, v in report.flags.items()}
    data["overall"] = report.overall.value
    return data


def _report_table(report) -> list[str]:
    lines = [f"test: {report.test_kind.value}  overall: {report.overall.value}"]
    skip = {"test_kind", "flags", "overall", "latencies_s"}
    for key, value in asdict(report).items():
        if key in skip or value is None:
            continue
        lines.append(f"  {key:28s} {value}")
    for name, flag in report.flags.items():
        lines.append(f"  flag {name:23s} {flag.value}")
    return lines


# -- subcommands ---------------------------------------------------------


def _cmd_simulate(args) -> int:
    store = _store(args)
    doc = _load_config_file(args.config)
    if args.new_patient:
        patient_id = store.create_patient(args.new_patient).id
    elif args.patient:
        patient_id = args.patient
    else:
        raise ValidationError("simulate requires --patient <id> or --new-patient <name>")
    request = RunRequest(
        patient_id=patient_id,
        config=_exam_config(args, doc),
        subject=_subject(args, doc),
        thresholds=_thresholds(doc),
    )
    record = execute_run(request, store)
    payload = {
        "session_id": record.session_id,
        "patient_id": record.patient_id,
        "overall": record.report.overall.value,
    }
    _emit(args, payload, [record.session_id])
    return 0


def _cmd_analyze(args) -> int:
    store = _store(args)
    record = store.load_session(args.session)
    if args.chart:
        if args.chart != "precision":
            raise ValidationError("only --chart precision is available")
        if not record.records:
            raise ValidationError("session has no sample records to chart")
        series = precision_series(record.records)
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{record.session_id}.precision.csv"
        svg_path = out_dir / f"{record.session_id}.precision.svg"
        csv_path.write_text(precision_csv(series))
        svg_path.write_text(
            line_chart_svg(
                list(series.t),
                {"left eye": list(series.left), "right eye": list(series.right)},
                f"Focus precision over time ({record.session_id})",
            )
        )
        print(f"wrote {csv_path} and {svg_path}")
        return 0
    csv_text = None
    if record.records:
        csv_text = precision_csv(precision_series(record.records))
    _emit(args, _report_payload(record.report), _report_table(record.report), csv_text)
    return 0


def _cmd_classify(args) -> int:
    store = _store(args)
    doc = _load_config_file(args.config)
    record = store.load_session(args.session)
    report = classify(record.report, _thresholds(doc))
    payload = {
        "session_id": record.session_id,
        "overall": report.overall.value,
        "flags": {k: v.value for k, v in report.flags.items()},
    }
    lines = [f"{record.session_id}: {report.overall.value}"] + [
        f"  {name}: {flag.value}" for name, flag in report.flags.items()
    ]
    _emit(args, payload, lines)
    return 0


def _cmd_trend(args) -> int:
    store = _store(args)
    points = store.trend(args.patient, args.metric)
    payload = {
        "patient_id": args.patient,
        "metric": args.metric,
        "points": [{"started_at": s, "value": v} for s, v in points],
    }
    csv_text = "started_at,value\n" + "".join(f"{s},{v:.9g}\n" for s, v in points)
    lines = [f"{s}  {v}" for s, v in points] or ["(no sessions with this metric)"]
    _emit(args, payload, lines, csv_text)
    return 0


def _cmd_import(args) -> int:
    store = _store(args)
    doc = _load_config_file(args.config)
    text = Path(args.samples).read_text()
    samples = samples_from_csv(text)
    if not samples:
        raise ValidationError("samples CSV contains no rows")
    if args.duration is None and "duration_s" not in doc.get("test", {}):
        # default to the stream's own span so the replay finishes
        doc.setdefault("test", {})["duration_s"] = samples[-1].t
    request = RunRequest(
        patient_id=args.patient,
        config=_exam_config(args, doc),
        replay_samples=samples,
        thresholds=_thresholds(doc),
    )
    record = execute_run(request, store)
    _emit(
        args,
        {"session_id": record.session_id, "overall": record.report.overall.value},
        [record.session_id],
    )
    return 0


def _cmd_pedagogy(args) -> int:
    store = _store(args)
    data = store.load_graph()
    graph = pedagogy.graph_from_dict(data) if data else pedagogy.default_graph()
    progress = pedagogy.StudentProgress(args.student, set(store.load_progress(args.student)))
    if args.action == "complete":
        if not args.node:
            raise ValidationError("pedagogy complete requires --node topic[/component]")
        topic, _, component = args.node.partition("/")
        progress = pedagogy.complete(progress, graph, topic, component or None)
        store.save_progress(args.student, sorted(progress.completed))
    avail = pedagogy.available(graph, progress)
    payload = {
        "student_id": args.student,
        "completed": sorted(progress.completed),
        "available": avail,
    }
    lines = [f"student {args.student}"]
    lines.append("  completed: " + (", ".join(sorted(progress.completed)) or "(none)"))
    for topic, comps in sorted(avail.items()):
        if comps:
            lines.append(f"  open: {topic} -> {', '.join(comps)}")
        else:
            lines.append(f"  open: {topic}")
    _emit(args, payload, lines)
    return 0


def _cmd_serve(args) -> int:
    path = args.store or os.environ.get("OCULAB_STORE") or "./oculab-store"
    server, service = serve(args.bind, path)
    host, port = server.server_address[:2]
    print(f"oculab API on http://{host}:{port} (store: {path})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("shutting down, flushing in-flight sessions")
    finally:
        server.server_close()
        service.shutdown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oculab", description=__doc__.splitlines()[0])
    parser.add_argument("--store", default=None,
                        help="store directory (default $OCULAB_STORE or ./oculab-store)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        # SUPPRESS keeps a pre-subcommand --store from being clobbered
        p.add_argument("--store", default=argparse.SUPPRESS,
                       help="store directory (also accepted before the subcommand)")
        p.add_argument("--out", choices=["json", "csv", "table"], default="table")
        p.add_argument("--config", help="JSON file with test/subject/thresholds sections")

    p = sub.add_parser("simulate", help="run a simulated exam session")
    common(p)
    p.add_argument("--test", help="saccade | pursuit | vor")
    p.add_argument("--preset", help="subject preset: normal | abnormal")
    p.add_argument("--patient", help="existing patient id")
    p.add_argument("--new-patient", help="create a patient with this name and use it")
    p.add_argument("--seed", type=int, help="protocol rng seed")
    p.add_argument("--subject-seed", type=int, help="subject rng seed")
    p.add_argument("--duration", type=float, help="session length in seconds")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("analyze", help="report for a saved session")
    common(p)
    p.add_argument("--session", required=True)
    p.add_argument("--chart", help="precision: write Fig-style CSV + SVG")
    p.add_argument("--out-dir", help="directory for chart files")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("classify", help="re-screen a session against thresholds")
    common(p)
    p.add_argument("--session", required=True)
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("trend", help="one metric across a patient's sessions")
    common(p)
    p.add_argument("--patient", required=True)
    p.add_argument("--metric", required=True)
    p.set_defaults(fn=_cmd_trend)

    p = sub.add_parser("import", help="replay an external samples CSV")
    common(p)
    p.add_argument("--patient", required=True)
    p.add_argument("--samples", required=True, help="samples CSV path")
    p.add_argument("--test", help="saccade | pursuit | vor")
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float)
    p.set_defaults(fn=_cmd_import)

    p = sub.add_parser("pedagogy", help="show or advance a learning path")
    common(p)
    p.add_argument("action", choices=["show", "complete"])
    p.add_argument("--student", required=True)
    p.add_argument("--node", help="topic or topic/component to complete")
    p.set_defaults(fn=_cmd_pedagogy)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--store", default=argparse.SUPPRESS)
    p.add_argument("--bind", default="127.0.0.1:8765")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except OculabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
