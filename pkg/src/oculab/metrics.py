"""Clinical measurements over finished sessions.

Turns a RawTestOutput (or imported streams) into the named test measurements:
trial latencies, focus-precision series and RMS, pursuit gain, head-rotation
frequency and speed. Also hosts the I-VT saccade detector and the
normal/abnormal screening. All functions are pure over immutable session data.

The screening thresholds shipped here are calibrated against the simulator
presets only; they are not clinical norms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dc_fields, replace
from enum import Enum
from importlib import resources

import numpy as np

from .errors import ConfigError, ValidationError
from .protocol import EventKind, RawTestOutput, SampleRecord, TestKind, TrialEvent


class Flag(str, Enum):
    NORMAL = "NORMAL"
    ABNORMAL = "ABNORMAL"
    UNDETERMINED = "UNDETERMINED"


# -- velocity estimation -------------------------------------------------

def median3(x: np.ndarray) -> np.ndarray:
    """3-sample median prefilter; tolerates single-sample dropouts."""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        return x.copy()
    out = x.copy()
    stacked = np.stack([x[:-2], x[1:-1], x[2:]])
    out[1:-1] = np.median(stacked, axis=0)
    return out


def yaw_velocity(yaw: np.ndarray, sample_rate_hz: float) -> np.ndarray:
    """Deg/s via central differences after a 3-sample median prefilter.
    One-sided differences at the ends."""
    y = median3(np.asarray(yaw, dtype=float))
    n = y.size
    if n < 2:
        return np.zeros(n)
    dt = 1.0 / sample_rate_hz
    v = np.empty(n)
    v[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    v[0] = (y[1] - y[0]) / dt
    v[-1] = (y[-1] - y[-2]) / dt
    return v


# -- saccade detection (I-VT) ---------------------------------------------

def saccade_mask(yaw: np.ndarray, sample_rate_hz: float, velocity_threshold_dps: float = 30.0) -> np.ndarray:
    """Boolean mask of saccadic samples: |velocity| > threshold, with runs
    separated by fewer than 2 sub-threshold samples merged."""
    v = yaw_velocity(yaw, sample_rate_hz)
    mask = np.abs(v) > velocity_threshold_dps
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return mask
    gaps = np.flatnonzero(np.diff(idx) == 2)  # exactly one quiet sample between runs
    for g in gaps:
        mask[idx[g] + 1] = True
    return mask


def detect_saccades(
    yaw: np.ndarray,
    sample_rate_hz: float,
    velocity_threshold_dps: float = 30.0,
    t: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """Saccade intervals as (start_t, end_t) pairs. Timestamps default to
    index / sample_rate when no explicit time axis is given."""
    yaw = np.asarray(yaw, dtype=float)
    if yaw.size < 3:
        raise ValidationError("saccade detection needs at least 3 samples")
    if t is None:
        t = np.arange(yaw.size) / sample_rate_hz
    else:
        t = np.asarray(t, dtype=float)
    mask = saccade_mask(yaw, sample_rate_hz, velocity_threshold_dps)
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, ends = edges[0::2], edges[1::2] - 1
    return [(float(t[i]), float(t[j])) for i, j in zip(starts, ends)]


# -- test-1 latency --------------------------------------------------------

def latency_stats(
    events: list[TrialEvent],
) -> tuple[list[float], float | None, float | None, int]:
    """(latencies, mean, sd, miss_count) from a test-1 event log. Timeouts
    count as misses and are excluded from the mean; zero completed trials
    leaves mean/sd undetermined (None)."""
    latencies = [e.latency_s for e in events if e.kind is EventKind.STIMULUS_HIT]
    misses = sum(1 for e in events if e.kind is EventKind.TRIAL_TIMEOUT)
    if not latencies:
        return [], None, None, misses
    arr = np.asarray(latencies)
    return latencies, float(arr.mean()), float(arr.std()), misses


# -- test-2/3 precision -----------------------------------------------------

@dataclass(slots=True)
class PrecisionSeries:
    """Per-eye focus-error series (the line-chart content) plus summary values.
    RMS is the headline precision figure; mean and max ride along."""

    t: np.ndarray
    left: np.ndarray
    right: np.ndarray
    cyclopean: np.ndarray
    rms_left: float
    rms_right: float
    rms_cyclopean: float
    mean_cyclopean: float
    max_cyclopean: float


def precision_series(records: list[SampleRecord]) -> PrecisionSeries:
    if not records:
        raise ValidationError("no sample records; cannot compute precision")
    t = np.array([r.t for r in records])
    left = np.array([r.error_left for r in records])
    right = np.array([r.error_right for r in records])
    cyc = np.array([r.error_cyclopean for r in records])
    rms = lambda a: float(np.sqrt(np.mean(a * a)))
    return PrecisionSeries(
        t=t,
        left=left,
        right=right,
        cyclopean=cyc,
        rms_left=rms(left),
        rms_right=rms(right),
        rms_cyclopean=rms(cyc),
        mean_cyclopean=float(cyc.mean()),
        max_cyclopean=float(cyc.max()),
    )


def precision_csv(series: PrecisionSeries) -> str:
    """Chart-ready CSV (t, left_error, right_error), one schema shared with
    the dashboard."""
    lines = ["t,left_error,right_error"]
    for t, l, r in zip(series.t, series.left, series.right):
        lines.append(f"{t:.9g},{l:.9g},{r:.9g}")
    return "\n".join(lines) + "\n"


# -- test-2 pursuit gain -----------------------------------------------------

def pursuit_gain_est(
    records: list[SampleRecord],
    sample_rate_hz: float,
    velocity_threshold_dps: float = 30.0,
) -> float | None:
    """Least-squares slope (through the origin) of gaze yaw velocity against
    target yaw velocity, with saccadic samples excluded. None when the
    estimate is undetermined (all samples saccadic, or a static target)."""
    if not records:
        raise ValidationError("no sample records; cannot estimate pursuit gain")
    t = np.array([r.t for r in records])
    if t[-1] - t[0] < 2.0:
        raise ValidationError("pursuit gain needs at least 2 s of records")
    gaze = np.array([r.gaze_yaw for r in records])
    target = np.array([r.target_yaw for r in records])
    keep = ~saccade_mask(gaze, sample_rate_hz, velocity_threshold_dps)
    if not keep.any():
        return None
    vg = yaw_velocity(gaze, sample_rate_hz)[keep]
    vt = yaw_velocity(target, sample_rate_hz)[keep]
    denom = float(np.dot(vt, vt))
    if denom < 1e-9:
        return None
    return float(np.dot(vg, vt) / denom)


# -- test-3 head metrics ------------------------------------------------------

def vor_frequency(
    t: np.ndarray,
    head_yaw: np.ndarray,
    hysteresis_deg: float,
    duration_s: float | None = None,
) -> tuple[int, float]:
    """(cycles, hz) from the head-yaw trace.

    A cycle pairs one excursion beyond +hysteresis with one beyond
    -hysteresis (either order) and is counted when the second excursion of
    the pair returns inside the band, i.e. when the left-right rotation
    completes. Repeated same-sign excursions do not re-pair.
    """
    if not hysteresis_deg > 0:
        raise ValidationError("hysteresis must be positive")
    t = np.asarray(t, dtype=float)
    head = np.asarray(head_yaw, dtype=float)
    if t.size == 0:
        raise ValidationError("empty head-yaw series")
    if duration_s is None:
        duration_s = float(t[-1] - t[0])
    if duration_s <= 0:
        raise ValidationError("zero-duration head-yaw series")
    cycles = 0
    pending = 0  # sign of the unpaired completed excursion, 0 if none
    current = 0  # sign of the in-progress excursion
    for y in head:
        if current == 0:
            if y > hysteresis_deg:
                current = 1
            elif y < -hysteresis_deg:
                current = -1
        elif (current == 1 and y <= hysteresis_deg) or (current == -1 and y >= -hysteresis_deg):
            # excursion completed: back inside the band
            if pending == -current:
                cycles += 1
                pending = 0
            elif pending == 0:
                pending = current
            current = 0
    return cycles, cycles / duration_s


def head_speed(
    t: np.ndarray, head_yaw: np.ndarray, sample_rate_hz: float
) -> tuple[float, float]:
    """(mean, peak) absolute head-rotation speed in deg/s."""
    head = np.asarray(head_yaw, dtype=float)
    if head.size < 2:
        raise ValidationError("head-speed needs at least 2 samples")
    v = np.abs(yaw_velocity(head, sample_rate_hz))
    return float(v.mean()), float(v.max())


# -- report + screening -------------------------------------------------------

@dataclass(slots=True)
class Thresholds:
    """Screening limits. Calibrated to separate the simulator presets; any
    field may be overridden from a config file. A None where the metric is
    present is a configuration error."""

    max_latency_s: float | None = 0.31
    max_precision_rms_deg: float | None = 2.3
    min_pursuit_gain: float | None = 0.81
    min_vor_gain_proxy: float | None = 0.775
    min_head_freq_hz: float | None = 0.2
    max_head_freq_hz: float | None = 2.0
    saccade_velocity_threshold_dps: float = 30.0
    cycle_hysteresis_frac: float = 0.25  # of the observed head-yaw peak


def _check_threshold_keys(data: dict) -> None:
    known = {f.name for f in dc_fields(Thresholds)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown threshold fields: {', '.join(unknown)}", unknown)


def default_thresholds() -> Thresholds:
    """Thresholds from the packaged, editable config file."""
    text = resources.files("oculab").joinpath("data/default_thresholds.json").read_text()
    data = json.loads(text)
    _check_threshold_keys(data)
    return Thresholds(**data)


def thresholds_from_dict(data: dict) -> Thresholds:
    """Overlay user-supplied fields onto the packaged defaults."""
    _check_threshold_keys(data)
    return replace(default_thresholds(), **data)


@dataclass(slots=True)
class ExamReport:
    """Computed metrics for one session plus the screening flags."""

    test_kind: TestKind
    duration_s: float
    sample_rate_hz: float
    latencies_s: list[float] | None = None
    latency_mean_s: float | None = None
    latency_sd_s: float | None = None
    miss_count: int | None = None
    precision_rms_deg: float | None = None
    precision_rms_left_deg: float | None = None
    precision_rms_right_deg: float | None = None
    precision_mean_deg: float | None = None
    precision_max_deg: float | None = None
    pursuit_gain_est: float | None = None
    vor_cycles: int | None = None
    vor_freq_hz: float | None = None
    vor_gain_proxy: float | None = None
    head_speed_mean_dps: float | None = None
    head_speed_peak_dps: float | None = None
    flags: dict[str, Flag] = field(default_factory=dict)
    overall: Flag = Flag.UNDETERMINED


#: report fields usable in trend queries
TREND_METRICS = (
    "latency_mean_s",
    "latency_sd_s",
    "miss_count",
    "precision_rms_deg",
    "precision_rms_left_deg",
    "precision_rms_right_deg",
    "precision_mean_deg",
    "precision_max_deg",
    "pursuit_gain_est",
    "vor_cycles",
    "vor_freq_hz",
    "vor_gain_proxy",
    "head_speed_mean_dps",
    "head_speed_peak_dps",
)


def compute_report(output: RawTestOutput, thresholds: Thresholds | None = None) -> ExamReport:
    """Compute every metric the test kind defines, then screen it."""
    cfg = output.config
    thr = thresholds or default_thresholds()
    report = ExamReport(
        test_kind=cfg.test_kind,
        duration_s=cfg.duration_s,
        sample_rate_hz=cfg.sample_rate_hz,
    )
    if cfg.test_kind is TestKind.SACCADE_LATENCY:
        lat, mean, sd, misses = latency_stats(output.events)
        report.latencies_s = lat
        report.latency_mean_s = mean
        report.latency_sd_s = sd
        report.miss_count = misses
    else:
        if output.records:
            series = precision_series(output.records)
            report.precision_rms_deg = series.rms_cyclopean
            report.precision_rms_left_deg = series.rms_left
            report.precision_rms_right_deg = series.rms_right
            report.precision_mean_deg = series.mean_cyclopean
            report.precision_max_deg = series.max_cyclopean
        if cfg.test_kind is TestKind.SMOOTH_PURSUIT and output.records:
            try:
                report.pursuit_gain_est = pursuit_gain_est(
                    output.records, cfg.sample_rate_hz, thr.saccade_velocity_threshold_dps
                )
            except ValidationError:
                report.pursuit_gain_est = None
        if cfg.test_kind is TestKind.VOR and output.records:
            t = np.array([r.t for r in output.records])
            head = np.array([r.head_yaw for r in output.records])
            peak = float(np.max(np.abs(head))) if head.size else 0.0
            if peak > 0.0:
                hyst = thr.cycle_hysteresis_frac * peak
                cycles, hz = vor_frequency(t, head, hyst, duration_s=cfg.duration_s)
                report.vor_cycles = cycles
                report.vor_freq_hz = hz
                mean_dps, peak_dps = head_speed(t, head, cfg.sample_rate_hz)
                report.head_speed_mean_dps = mean_dps
                report.head_speed_peak_dps = peak_dps
                head_rms = float(np.sqrt(np.mean(head * head)))
                if head_rms > 1e-9:
                    err = np.array([r.error_cyclopean for r in output.records])
                    err_rms = float(np.sqrt(np.mean(err * err)))
                    report.vor_gain_proxy = 1.0 - err_rms / head_rms
    return classify(report, thr)


def classify(report: ExamReport, thresholds: Thresholds) -> ExamReport:
    """Flag each computed metric against its threshold and roll up the overall
    flag: any ABNORMAL wins, else any UNDETERMINED, else NORMAL."""
    flags: dict[str, Flag] = {}

    def against(name: str, value, limit, abnormal_when_over: bool) -> None:
        if limit is None:
            raise ConfigError(f"threshold for metric {name!r} is missing", [name])
        if value is None:
            flags[name] = Flag.UNDETERMINED
        elif (value > limit) if abnormal_when_over else (value < limit):
            flags[name] = Flag.ABNORMAL
        else:
            flags[name] = Flag.NORMAL

    thr = thresholds
    if report.test_kind is TestKind.SACCADE_LATENCY:
        against("latency", report.latency_mean_s, thr.max_latency_s, True)
    else:
        against("precision", report.precision_rms_deg, thr.max_precision_rms_deg, True)
    if report.test_kind is TestKind.SMOOTH_PURSUIT:
        against("pursuit_gain", report.pursuit_gain_est, thr.min_pursuit_gain, False)
    if report.test_kind is TestKind.VOR:
        if thr.min_head_freq_hz is None or thr.max_head_freq_hz is None:
            raise ConfigError("head-frequency validity range is missing")
        freq = report.vor_freq_hz
        freq_ok = freq is not None and thr.min_head_freq_hz <= freq <= thr.max_head_freq_hz
        # out-of-range head movement is a protocol-compliance problem, not pathology
        flags["head_frequency"] = Flag.NORMAL if freq_ok else Flag.UNDETERMINED
        if not freq_ok:
            flags["vor_gain"] = Flag.UNDETERMINED
            if thr.min_vor_gain_proxy is None:
                raise ConfigError("threshold for metric 'vor_gain' is missing")
        else:
            against("vor_gain", report.vor_gain_proxy, thr.min_vor_gain_proxy, False)

    if any(f is Flag.ABNORMAL for f in flags.values()):
        overall = Flag.ABNORMAL
    elif any(f is Flag.UNDETERMINED for f in flags.values()):
        overall = Flag.UNDETERMINED
    else:
        overall = Flag.NORMAL
    report.flags = flags
    report.overall = overall
    return report
