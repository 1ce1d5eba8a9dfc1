"""Closed-loop synthetic oculomotor subject.

Produces GazeSample streams in response to protocol stimuli so every pipeline
is testable without a headset. The behavioral model is deliberately simple and
analytically checkable:

* saccades fly at constant speed after a Gaussian reaction latency (truncated
  at zero),
* smooth pursuit is a position servo on the lagged target, gaze = gain *
  target(t - lag), with ballistic catch-up saccades once the tracking error
  exceeds a threshold,
* the VOR counter-rotates the eyes by vor_gain times the head yaw, so the
  world-frame gaze error is exactly (1 - vor_gain) * head_yaw before noise.

None of the parameter defaults are clinical values; NORMAL/ABNORMAL presets
are internal calibration points for the screening thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields, replace

import numpy as np

from .errors import ConfigError
from .geometry import Direction3, GazeRay, GazeSample
from .protocol import (
    EventKind,
    ExamConfig,
    RawTestOutput,
    TestKind,
    TrialEvent,
    advance,
    finalize,
    new_session,
    pursuit_target_yaw,
)

_RAD = math.pi / 180.0


@dataclass(slots=True)
class SubjectParams:
    saccade_latency_mean_s: float = 0.20
    saccade_latency_sd_s: float = 0.02
    saccade_speed_dps: float = 400.0
    pursuit_gain: float = 0.95
    pursuit_lag_s: float = 0.12
    catchup_threshold_deg: float = 3.0  # math.inf disables catch-up saccades
    vor_gain: float = 0.95
    head_amp_deg: float = 20.0
    head_freq_hz: float = 0.5
    noise_sd_deg: float = 0.1
    ipd_m: float = 0.064
    seed: int = 0

    def validate(self) -> None:
        bad: list[str] = []
        if self.saccade_latency_mean_s < 0:
            bad.append("saccade_latency_mean_s")
        if self.saccade_latency_sd_s < 0:
            bad.append("saccade_latency_sd_s")
        if not self.saccade_speed_dps > 0:
            bad.append("saccade_speed_dps")
        if not 0 < self.pursuit_gain <= 1:
            bad.append("pursuit_gain")
        if self.pursuit_lag_s < 0:
            bad.append("pursuit_lag_s")
        if not self.catchup_threshold_deg > 0:
            bad.append("catchup_threshold_deg")
        if not 0 <= self.vor_gain <= 1.5:
            bad.append("vor_gain")
        if not self.head_amp_deg > 0:
            bad.append("head_amp_deg")
        if not self.head_freq_hz > 0:
            bad.append("head_freq_hz")
        if self.noise_sd_deg < 0:
            bad.append("noise_sd_deg")
        if not self.ipd_m > 0:
            bad.append("ipd_m")
        if bad:
            raise ConfigError(f"invalid subject params: {', '.join(bad)}", bad)


# Internal calibration presets, not clinical norms.
PRESETS: dict[str, SubjectParams] = {
    "normal": SubjectParams(
        saccade_latency_mean_s=0.20,
        pursuit_gain=0.95,
        vor_gain=0.95,
        pursuit_lag_s=0.12,
        catchup_threshold_deg=3.0,
        noise_sd_deg=0.1,
    ),
    "abnormal": SubjectParams(
        saccade_latency_mean_s=0.35,
        pursuit_gain=0.70,
        vor_gain=0.60,
        pursuit_lag_s=0.15,
        catchup_threshold_deg=4.5,
        noise_sd_deg=0.2,
    ),
}


def preset(name: str, seed: int = 0, **overrides) -> SubjectParams:
    """A fresh copy of a named preset with optional field overrides."""
    try:
        base = PRESETS[name.lower()]
    except KeyError:
        raise ConfigError(
            f"unknown subject preset {name!r}; expected one of {sorted(PRESETS)}"
        ) from None
    return replace(base, seed=seed, **overrides)


def params_from_dict(data: dict) -> SubjectParams:
    """Build SubjectParams from a plain dict; a "preset" key selects a base."""
    data = dict(data)
    name = data.pop("preset", None)
    known = {f.name for f in dc_fields(SubjectParams)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown subject fields: {', '.join(unknown)}", unknown)
    params = preset(name, **data) if name else SubjectParams(**data)
    params.validate()
    return params


def saccade_yaw(from_yaw: float, to_yaw: float, dt_since_onset: float, speed_dps: float) -> float:
    """Constant-speed flight from one yaw toward another, clamped at arrival."""
    if dt_since_onset <= 0.0:
        return from_yaw
    step = speed_dps * dt_since_onset
    delta = to_yaw - from_yaw
    if abs(delta) <= step:
        return to_yaw
    return from_yaw + math.copysign(step, delta)


def head_yaw_at(t: float, amp_deg: float, freq_hz: float) -> float:
    """Scripted head shake used in the VOR test."""
    return amp_deg * math.sin(2.0 * math.pi * freq_hz * t)


def vor_eye_in_head(head_yaw: float, vor_gain: float) -> float:
    """Eye-in-head counter-rotation; world gaze = head + this = (1-g)*head."""
    return -vor_gain * head_yaw


class PursuitTracker:
    """Position servo on the lagged target with ballistic catch-up saccades.

    Outside a catch-up, gaze = gain * target(max(0, t - lag)) + offset. The
    offset starts at zero (so the plain servo formula holds until the first
    catch-up) and is re-anchored whenever a catch-up lands, keeping gaze
    continuous; otherwise the error would snap straight back past the
    threshold. When the instantaneous error exceeds the threshold, the gaze
    chases the current target at saccade speed until the error drops below
    0.5 deg.
    """

    CATCHUP_EXIT_DEG = 0.5

    def __init__(self, gain: float, lag_s: float, threshold_deg: float, speed_dps: float):
        self.gain = gain
        self.lag_s = lag_s
        self.threshold_deg = threshold_deg
        self.speed_dps = speed_dps
        self.in_catchup = False
        self._offset = 0.0
        self._yaw = 0.0
        self._last_t: float | None = None

    def _servo(self, t: float, target_yaw_at) -> float:
        return self.gain * target_yaw_at(max(0.0, t - self.lag_s)) + self._offset

    def step(self, t: float, target_yaw_at) -> float:
        dt = 0.0 if self._last_t is None else t - self._last_t
        self._last_t = t
        target_now = target_yaw_at(t)
        if self.in_catchup:
            self._yaw = saccade_yaw(self._yaw, target_now, dt, self.speed_dps)
            if abs(target_now - self._yaw) < self.CATCHUP_EXIT_DEG:
                self.in_catchup = False
                raw = self.gain * target_yaw_at(max(0.0, t - self.lag_s))
                self._offset = self._yaw - raw
        else:
            self._yaw = self._servo(t, target_yaw_at)
            if abs(target_now - self._yaw) > self.threshold_deg:
                self.in_catchup = True
        return self._yaw


class SimulatedSubject:
    """Stateful gaze generator for one session; step with :meth:`sample_at`
    and report protocol events back through :meth:`observe`."""

    def __init__(self, params: SubjectParams, cfg: ExamConfig):
        params.validate()
        self.params = params
        self.cfg = cfg
        self.rng = np.random.default_rng(params.seed)
        self._fix_yaw = 0.0  # test 1: current fixation point
        self._plan: tuple[float, float, float] | None = None  # (start_t, from, to)
        self._tracker = PursuitTracker(
            params.pursuit_gain,
            params.pursuit_lag_s,
            params.catchup_threshold_deg,
            params.saccade_speed_dps,
        )

    # -- stimulus following ------------------------------------------------

    def _draw_latency(self) -> float:
        p = self.params
        return max(0.0, float(self.rng.normal(p.saccade_latency_mean_s, p.saccade_latency_sd_s)))

    def observe(self, events: list[TrialEvent]) -> None:
        """React to protocol events (test 1 only; tests 2-3 are open-loop)."""
        if self.cfg.test_kind is not TestKind.SACCADE_LATENCY:
            return
        for ev in events:
            if ev.kind is EventKind.STIMULUS_ON:
                self._settle(ev.t)
                target = self.cfg.side_yaw(ev.side)
                self._plan = (ev.t + self._draw_latency(), self._fix_yaw, target)
            elif ev.kind in (EventKind.STIMULUS_HIT, EventKind.TRIAL_TIMEOUT):
                # gaze returns to center after the trial resolves
                self._settle(ev.t)
                self._plan = (ev.t + self._draw_latency(), self._fix_yaw, 0.0)

    def _settle(self, t: float) -> None:
        """Freeze any in-flight saccade at its position at time t."""
        if self._plan is not None:
            start, frm, to = self._plan
            self._fix_yaw = saccade_yaw(frm, to, t - start, self.params.saccade_speed_dps)
            self._plan = None

    def _gaze_yaw_at(self, t: float) -> float:
        p = self.params
        kind = self.cfg.test_kind
        if kind is TestKind.SMOOTH_PURSUIT:
            return self._tracker.step(t, lambda u: pursuit_target_yaw(u, self.cfg))
        if kind is TestKind.VOR:
            head = head_yaw_at(t, p.head_amp_deg, p.head_freq_hz)
            return head + vor_eye_in_head(head, p.vor_gain)
        # saccade-latency test: hold fixation until a planned saccade lands
        if self._plan is not None:
            start, frm, to = self._plan
            if t >= start:
                y = saccade_yaw(frm, to, t - start, p.saccade_speed_dps)
                if y == to:
                    self._fix_yaw = to
                    self._plan = None
                return y
        return self._fix_yaw

    def head_yaw(self, t: float) -> float:
        if self.cfg.test_kind is TestKind.VOR:
            return head_yaw_at(t, self.params.head_amp_deg, self.params.head_freq_hz)
        return 0.0

    # -- sample synthesis ----------------------------------------------------

    def sample_at(self, t: float) -> GazeSample:
        """Binocular sample at time t: both eyes verge on the gaze point at
        stimulus-arc distance, with i.i.d. per-eye yaw noise."""
        p = self.params
        gaze_yaw = self._gaze_yaw_at(t)
        r = gaze_yaw * _RAD
        dist = self.cfg.target_distance_m
        gx, gz = dist * math.sin(r), dist * math.cos(r)
        half_ipd = 0.5 * p.ipd_m
        noise_l = float(self.rng.normal(0.0, p.noise_sd_deg))
        noise_r = float(self.rng.normal(0.0, p.noise_sd_deg))
        left = _eye_ray(-half_ipd, gx, gz, noise_l)
        right = _eye_ray(half_ipd, gx, gz, noise_r)
        return GazeSample(
            t=t,
            left=left,
            right=right,
            pupil_diameter_left=3.5,
            pupil_diameter_right=3.5,
            eye_openness_left=1.0,
            eye_openness_right=1.0,
            head_yaw=self.head_yaw(t),
        )


def _eye_ray(eye_x: float, gx: float, gz: float, noise_deg: float) -> GazeRay:
    yaw = math.atan2(gx - eye_x, gz) + noise_deg * _RAD
    return GazeRay((eye_x, 0.0, 0.0), Direction3(math.sin(yaw), 0.0, math.cos(yaw)))


def step_session(cfg: ExamConfig, subject: SubjectParams):
    """Generator driving one closed-loop session on the virtual sample clock.

    Yields (state, new_events, new_record) per consumed sample; the caller owns
    pacing (batch drains it, a live runner may throttle). The session is
    finished when the generator is exhausted.
    """
    state = new_session(cfg)
    subj = SimulatedSubject(subject, cfg)
    dt = 1.0 / cfg.sample_rate_hz
    k = 1
    while not state.finished:
        events, record = advance(state, subj.sample_at(k * dt))
        subj.observe(events)
        yield state, events, record
        k += 1


def run_closed_loop(cfg: ExamConfig, subject: SubjectParams) -> RawTestOutput:
    """Run a full session against the simulated subject; deterministic given
    both seeds."""
    state = None
    for state, _, _ in step_session(cfg, subject):
        pass
    assert state is not None
    return finalize(state)
