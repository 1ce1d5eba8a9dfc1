"""oculab: a hardware-independent oculomotor examination engine.

Reimplements the three VR eye-tracking tests (saccade latency, smooth
pursuit, vestibulo-ocular reflex) as deterministic protocols over gaze/head
sample streams, with a closed-loop synthetic subject, clinical metrics and
screening, per-patient session records with trends, a dependency-graph
learning path, and a CLI + HTTP control plane.
"""

from .errors import (
    ConfigError,
    CycleError,
    GeometryError,
    LockedError,
    NotFoundError,
    OculabError,
    ReferentialError,
    SessionStateError,
    StreamOrderError,
    ValidationError,
)
from .geometry import (
    Direction3,
    GazeRay,
    GazeSample,
    TargetSphere,
    angular_error,
    cyclopean,
    direction,
    direction_from_yaw,
    hit_test,
    yaw_of,
)
from .metrics import (
    ExamReport,
    Flag,
    Thresholds,
    classify,
    compute_report,
    default_thresholds,
    detect_saccades,
    latency_stats,
    precision_series,
    pursuit_gain_est,
    vor_frequency,
)
from .protocol import (
    EventKind,
    ExamConfig,
    ExamState,
    Phase,
    RawTestOutput,
    SampleRecord,
    Side,
    TestKind,
    TrialEvent,
    advance,
    draw_isi,
    draw_side,
    finalize,
    new_session,
    pursuit_target_yaw,
)
from .runs import RunRequest, execute_run
from .store import PatientProfile, RecordsStore, SessionRecord
from .subject import PRESETS, SubjectParams, preset, run_closed_loop

__version__ = "0.1.0"
