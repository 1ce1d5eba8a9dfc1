"""Session execution glue: run a configured exam against a subject source
(simulator or replayed samples), compute its report, and persist it.

Both the CLI and the HTTP service funnel through :class:`RunRequest` and
:func:`execute_run`, so a batch run and a live run of the same (config,
seeds) produce identical SessionRecords.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Iterator

from .errors import ConfigError, SessionStateError
from .geometry import GazeSample
from .metrics import Thresholds, compute_report, default_thresholds
from .protocol import (
    ExamConfig,
    ExamState,
    RawTestOutput,
    SampleRecord,
    TrialEvent,
    advance,
    finalize,
    new_session,
)
from .store import RecordsStore, SessionRecord
from .subject import SubjectParams, step_session


@dataclass(slots=True)
class RunRequest:
    """One exam run: exactly one subject source (simulator params or a replay
    sample stream)."""

    patient_id: str
    config: ExamConfig
    subject: SubjectParams | None = None
    replay_samples: list[GazeSample] | None = None
    thresholds: Thresholds | None = None
    session_id: str | None = None  # injectable for reproducible records
    started_at: str | None = None

    def validate(self) -> None:
        if (self.subject is None) == (self.replay_samples is None):
            raise ConfigError(
                "exactly one subject source required: simulator params or replay samples"
            )


def replay_steps(
    cfg: ExamConfig, samples: list[GazeSample]
) -> Iterator[tuple[ExamState, list[TrialEvent], SampleRecord | None]]:
    """Feed pre-recorded samples through the protocol, mirroring step_session."""
    state = new_session(cfg)
    for s in samples:
        if state.finished:
            break
        events, record = advance(state, s)
        yield state, events, record
    if not state.finished:
        raise SessionStateError(
            "replay stream ended before the configured duration; shorten duration_s"
        )


def run_steps(request: RunRequest):
    """The step generator for a request, regardless of subject source."""
    request.validate()
    if request.subject is not None:
        return step_session(request.config, request.subject)
    return replay_steps(request.config, request.replay_samples)


StepHook = Callable[[list[TrialEvent], SampleRecord | None], None]


def execute_run(
    request: RunRequest,
    store: RecordsStore,
    save: Callable[[SessionRecord, list[GazeSample]], str] | None = None,
    on_step: StepHook | None = None,
) -> SessionRecord:
    """Drive the run to completion, build the SessionRecord, persist it.

    ``on_step`` observes (events, record) after each consumed sample — the
    live streaming hook. ``save`` overrides direct store writing so a service
    can route persistence through its single writer.
    """
    store.get_patient(request.patient_id)  # referential check before running
    state: ExamState | None = None
    for state, events, record in run_steps(request):
        if on_step is not None:
            on_step(events, record)
    assert state is not None
    output: RawTestOutput = finalize(state)
    thresholds = request.thresholds or default_thresholds()
    report = compute_report(output, thresholds)
    session_id = request.session_id or store.new_session_id()
    record = SessionRecord(
        session_id=session_id,
        patient_id=request.patient_id,
        started_at=request.started_at or _now_iso(),
        config=output.config,
        report=report,
        events=output.events,
        records=output.records,
        samples_file=f"{session_id}.samples.csv",
    )
    writer = save or store.save_session
    writer(record, output.samples)
    return record


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")
