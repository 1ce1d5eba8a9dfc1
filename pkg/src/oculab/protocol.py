"""The three oculomotor tests as deterministic, seeded, sample-driven state machines.

Test 1 (saccade latency): the subject fixates a center sphere; after a random
delay a peripheral sphere lights up left or right and the time to reach it is
the trial latency. Test 2 (smooth pursuit): a sphere sweeps back and forth
horizontally and per-sample tracking errors are recorded. Test 3 (VOR): the
target stays put while the subject shakes their head; errors and head yaw are
recorded.

A session is advanced by exactly one owner, one GazeSample at a time. Given
the same config, seed, and sample stream, the emitted events and records are
bit-identical across runs and platforms (PCG64 rng, no wall-clock input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dc_fields
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, SessionStateError, StreamOrderError
from .geometry import (
    GazeSample,
    TargetSphere,
    angular_error,
    cyclopean,
    direction_from_yaw,
    hit_test,
)


class TestKind(str, Enum):
    SACCADE_LATENCY = "SACCADE_LATENCY"
    SMOOTH_PURSUIT = "SMOOTH_PURSUIT"
    VOR = "VOR"


class Side(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    NONE = "NONE"


class EventKind(str, Enum):
    CENTER_FIXATED = "CENTER_FIXATED"
    STIMULUS_ON = "STIMULUS_ON"
    STIMULUS_HIT = "STIMULUS_HIT"
    TRIAL_TIMEOUT = "TRIAL_TIMEOUT"
    GAP_WARNING = "GAP_WARNING"
    SESSION_END = "SESSION_END"


class Phase(str, Enum):
    AWAIT_CENTER = "AWAIT_CENTER"
    DELAY = "DELAY"
    STIMULUS = "STIMULUS"
    RUNNING = "RUNNING"


class TrialEvent(NamedTuple):
    """Discrete protocol event. ``latency_s`` is set on STIMULUS_HIT only and
    equals t_hit - t_stimulus_on of the same trial."""

    kind: EventKind
    t: float
    side: Side = Side.NONE
    latency_s: float | None = None


class SampleRecord(NamedTuple):
    """Per-sample derived record for tests 2-3 (angles in degrees).

    ``gaze_yaw`` is the cyclopean gaze yaw; it carries the sign that the
    unsigned error fields drop, which the pursuit-gain estimator needs.
    """

    t: float
    target_yaw: float
    error_left: float
    error_right: float
    error_cyclopean: float
    gaze_yaw: float
    head_yaw: float


@dataclass(slots=True)
class ExamConfig:
    """Per-test configuration. Fields irrelevant to a test kind are ignored
    but still validated for sanity."""

    test_kind: TestKind
    duration_s: float = 20.0
    sample_rate_hz: float = 120.0
    eccentricity_deg: float = 15.0  # test 1: angle between center and side objects
    travel_deg: float = 20.0  # test 2: full sweep angle
    period_s: float = 3.0  # test 2: sweep period
    isi_min_s: float = 2.0  # test 1: random delay range before the next stimulus
    isi_max_s: float = 5.0
    trial_timeout_s: float = 5.0  # test 1: a missed trial ends after this long
    center_dwell_s: float = 0.0  # test 1: continuous center fixation required
    require_hold: bool = False  # test 1: abort pending stimulus if gaze leaves center
    target_radius_m: float = 0.1
    target_distance_m: float = 2.0
    seed: int = 0

    def validate(self) -> None:
        bad: list[str] = []
        if not isinstance(self.test_kind, TestKind):
            bad.append("test_kind")
        if not self.duration_s > 0:
            bad.append("duration_s")
        if not 60.0 <= self.sample_rate_hz <= 120.0:
            bad.append("sample_rate_hz")
        if not self.eccentricity_deg > 0:
            bad.append("eccentricity_deg")
        if not self.travel_deg > 0:
            bad.append("travel_deg")
        if not self.period_s > 0:
            bad.append("period_s")
        if not 0 < self.isi_min_s <= self.isi_max_s:
            bad.append("isi_min_s/isi_max_s")
        if not self.trial_timeout_s > 0:
            bad.append("trial_timeout_s")
        if self.center_dwell_s < 0:
            bad.append("center_dwell_s")
        if not self.target_radius_m > 0:
            bad.append("target_radius_m")
        if not self.target_distance_m > self.target_radius_m:
            bad.append("target_distance_m")
        if bad:
            raise ConfigError(f"invalid exam config fields: {', '.join(bad)}", bad)

    def target_at_yaw(self, yaw_deg: float) -> TargetSphere:
        """Focus object on the stimulus arc at the given yaw."""
        d = direction_from_yaw(yaw_deg)
        r = self.target_distance_m
        return TargetSphere((d.x * r, d.y * r, d.z * r), self.target_radius_m)

    def side_yaw(self, side: Side) -> float:
        return self.eccentricity_deg if side is Side.RIGHT else -self.eccentricity_deg


def config_from_dict(data: dict) -> ExamConfig:
    """Build an ExamConfig from a plain dict (JSON payloads, config files)."""
    known = {f.name for f in dc_fields(ExamConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown exam config fields: {', '.join(unknown)}", unknown)
    if "test_kind" not in data:
        raise ConfigError("exam config requires test_kind", ["test_kind"])
    kwargs = dict(data)
    try:
        kwargs["test_kind"] = TestKind(str(kwargs["test_kind"]).upper())
    except ValueError:
        raise ConfigError(
            f"unknown test_kind {data['test_kind']!r}; expected one of "
            f"{[k.value for k in TestKind]}",
            ["test_kind"],
        ) from None
    cfg = ExamConfig(**kwargs)
    cfg.validate()
    return cfg


@dataclass(slots=True, eq=False)
class ExamState:
    """Running state of one session. Mutated in place by :func:`advance`;
    owned by a single caller at a time."""

    cfg: ExamConfig
    rng: np.random.Generator
    clock: float = 0.0
    phase: Phase = Phase.AWAIT_CENTER
    finished: bool = False
    pending_side: Side = Side.NONE
    onset_t: float = 0.0  # scheduled stimulus onset (DELAY) / actual onset (STIMULUS)
    dwell_start: float | None = None
    events: list[TrialEvent] = field(default_factory=list)
    records: list[SampleRecord] = field(default_factory=list)
    samples: list[GazeSample] = field(default_factory=list)
    # fixed focus objects, cached off the per-sample path
    center_target: TargetSphere | None = None
    side_targets: dict[Side, TargetSphere] = field(default_factory=dict)

    def snapshot(self) -> dict:
        """Comparable view of the state (rng state included), for tests."""
        return {
            "clock": self.clock,
            "phase": self.phase,
            "finished": self.finished,
            "pending_side": self.pending_side,
            "onset_t": self.onset_t,
            "events": list(self.events),
            "records": list(self.records),
            "rng": self.rng.bit_generator.state,
        }


@dataclass(slots=True)
class RawTestOutput:
    """Immutable bundle of a finished session, handed to metrics and persistence."""

    config: ExamConfig
    events: list[TrialEvent]
    records: list[SampleRecord]
    samples: list[GazeSample]


def pursuit_target_yaw(t: float, cfg: ExamConfig) -> float:
    """Test-2 target trajectory: horizontal sinusoid covering travel_deg."""
    return 0.5 * cfg.travel_deg * math.sin(2.0 * math.pi * t / cfg.period_s)


def draw_isi(rng: np.random.Generator, lo: float = 2.0, hi: float = 5.0) -> float:
    """Inter-stimulus delay, uniform on [lo, hi]."""
    return float(rng.uniform(lo, hi))


def draw_side(rng: np.random.Generator) -> Side:
    """Stimulus side, uniform over LEFT/RIGHT."""
    return Side.LEFT if rng.integers(0, 2) == 0 else Side.RIGHT


def new_session(cfg: ExamConfig) -> ExamState:
    """Validate the config and return the initial state (clock 0, seeded rng)."""
    cfg.validate()
    phase = Phase.AWAIT_CENTER if cfg.test_kind is TestKind.SACCADE_LATENCY else Phase.RUNNING
    state = ExamState(cfg=cfg, rng=np.random.default_rng(cfg.seed), phase=phase)
    state.center_target = cfg.target_at_yaw(0.0)
    state.side_targets = {
        Side.LEFT: cfg.target_at_yaw(cfg.side_yaw(Side.LEFT)),
        Side.RIGHT: cfg.target_at_yaw(cfg.side_yaw(Side.RIGHT)),
    }
    return state


def advance(
    state: ExamState, s: GazeSample
) -> tuple[list[TrialEvent], SampleRecord | None]:
    """Consume one sample; return the newly emitted events and, for tests 2-3,
    the per-sample record. Events carry scheduled times where one exists
    (stimulus onset, timeout, session end), so ISI and timeout contracts hold
    exactly rather than sample-quantized."""
    if state.finished:
        raise SessionStateError("session already finished")
    cfg = state.cfg
    if s.t <= state.clock:
        raise StreamOrderError(
            f"sample t={s.t} is not after the session clock {state.clock}"
        )
    new_events: list[TrialEvent] = []
    # gaps are between consecutive samples; a late-starting stream is not one
    if state.samples and s.t - state.clock > 3.0 / cfg.sample_rate_hz:
        new_events.append(TrialEvent(EventKind.GAP_WARNING, s.t))
    state.clock = s.t
    state.samples.append(s)

    if s.t >= cfg.duration_s:
        new_events.append(TrialEvent(EventKind.SESSION_END, cfg.duration_s))
        state.finished = True
        state.events.extend(new_events)
        return new_events, None

    record: SampleRecord | None = None
    if cfg.test_kind is TestKind.SACCADE_LATENCY:
        _advance_saccade_test(state, s, new_events)
    else:
        record = _advance_tracking_test(state, s)
    state.events.extend(new_events)
    if record is not None:
        state.records.append(record)
    return new_events, record


def _advance_saccade_test(
    state: ExamState, s: GazeSample, out: list[TrialEvent]
) -> None:
    cfg = state.cfg
    cyc = cyclopean(s)
    if state.phase is Phase.AWAIT_CENTER:
        if hit_test(cyc, state.center_target):
            if cfg.center_dwell_s > 0.0:
                if state.dwell_start is None:
                    state.dwell_start = s.t
                if s.t - state.dwell_start < cfg.center_dwell_s:
                    return
            state.dwell_start = None
            out.append(TrialEvent(EventKind.CENTER_FIXATED, s.t))
            isi = draw_isi(state.rng, cfg.isi_min_s, cfg.isi_max_s)
            state.pending_side = draw_side(state.rng)
            state.onset_t = s.t + isi
            state.phase = Phase.DELAY
        else:
            state.dwell_start = None
        return
    if state.phase is Phase.DELAY:
        if cfg.require_hold and not hit_test(cyc, state.center_target):
            state.phase = Phase.AWAIT_CENTER  # pending stimulus abandoned
            state.pending_side = Side.NONE
            return
        if s.t >= state.onset_t:
            out.append(TrialEvent(EventKind.STIMULUS_ON, state.onset_t, state.pending_side))
            state.phase = Phase.STIMULUS
            # fall through: the same sample may already resolve the trial
        else:
            return
    if state.phase is Phase.STIMULUS:
        side = state.pending_side
        if s.t >= state.onset_t + cfg.trial_timeout_s:
            out.append(
                TrialEvent(EventKind.TRIAL_TIMEOUT, state.onset_t + cfg.trial_timeout_s, side)
            )
            state.phase = Phase.AWAIT_CENTER
            state.pending_side = Side.NONE
        elif hit_test(cyc, state.side_targets[side]):
            out.append(
                TrialEvent(EventKind.STIMULUS_HIT, s.t, side, s.t - state.onset_t)
            )
            state.phase = Phase.AWAIT_CENTER
            state.pending_side = Side.NONE


def _advance_tracking_test(state: ExamState, s: GazeSample) -> SampleRecord:
    cfg = state.cfg
    if cfg.test_kind is TestKind.SMOOTH_PURSUIT:
        target_yaw = pursuit_target_yaw(s.t, cfg)
    else:
        target_yaw = 0.0
    target = cfg.target_at_yaw(target_yaw)
    cyc = cyclopean(s)
    d = cyc.dir
    # horizontal projection; a perfectly vertical gaze degenerates to yaw 0
    gaze_yaw = math.degrees(math.atan2(d.x, d.z))
    return SampleRecord(
        t=s.t,
        target_yaw=target_yaw,
        error_left=angular_error(s.left, target),
        error_right=angular_error(s.right, target),
        error_cyclopean=angular_error(cyc, target),
        gaze_yaw=gaze_yaw,
        head_yaw=s.head_yaw,
    )


def finalize(state: ExamState) -> RawTestOutput:
    """Freeze a finished session into an output bundle."""
    if not state.finished:
        raise SessionStateError("cannot finalize an unfinished session")
    return RawTestOutput(
        config=state.cfg,
        events=list(state.events),
        records=list(state.records),
        samples=list(state.samples),
    )
