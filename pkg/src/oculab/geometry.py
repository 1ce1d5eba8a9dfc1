"""Gaze geometry: directions, rays, angular errors, and gaze-vs-target hit testing.

Coordinate convention (right-handed): the subject sits at the origin, +z is
straight ahead, +x is the subject's right, +y is up. Yaw is the rotation about
the vertical axis, in degrees, with yaw 0 straight ahead and positive yaw to
the subject's right. Stimuli live on a horizontal arc (default radius 2 m).

Everything here is a pure function over immutable values and safe to call
from any thread. Scalar math on tuples is deliberate: these run inside the
per-sample protocol loop where numpy round-trips would dominate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import GeometryError

Vec3 = tuple[float, float, float]

_DEG = 180.0 / math.pi
_RAD = math.pi / 180.0


class Direction3(NamedTuple):
    """Unit direction vector. Invariant: |(x, y, z)| = 1 within 1e-9.

    Build through :func:`direction` or :func:`direction_from_yaw`; the raw
    constructor does not normalize (used on trusted/loaded data).
    """

    x: float
    y: float
    z: float


class GazeRay(NamedTuple):
    """A gaze ray: origin in meters plus a unit direction."""

    origin: Vec3
    dir: Direction3


@dataclass(frozen=True, slots=True)
class TargetSphere:
    """Focus object: a sphere the gaze can collide with."""

    center: Vec3
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise GeometryError(f"sphere radius must be > 0, got {self.radius}")


class GazeSample(NamedTuple):
    """One timestamped eye-tracker measurement.

    Invariants: ``t`` >= 0 and strictly increasing within a stream (enforced by
    the protocol), openness in [0, 1], pupil diameters >= 0 (enforced on import).
    ``head_yaw`` is in degrees.
    """

    t: float
    left: GazeRay
    right: GazeRay
    pupil_diameter_left: float
    pupil_diameter_right: float
    eye_openness_left: float
    eye_openness_right: float
    head_yaw: float


def direction(x: float, y: float, z: float) -> Direction3:
    """Normalize (x, y, z) into a Direction3."""
    n = math.sqrt(x * x + y * y + z * z)
    if n < 1e-12:
        raise GeometryError("cannot normalize a near-zero vector")
    return Direction3(x / n, y / n, z / n)


def direction_from_yaw(yaw_deg: float) -> Direction3:
    """Horizontal unit direction at the given yaw (0 = straight ahead = +z)."""
    r = yaw_deg * _RAD
    return Direction3(math.sin(r), 0.0, math.cos(r))


def yaw_of(d: Direction3) -> float:
    """Yaw in degrees of a direction's horizontal projection.

    Raises GeometryError for directions parallel to the vertical axis, where
    yaw is undefined.
    """
    if math.sqrt(d.x * d.x + d.z * d.z) < 1e-9:
        raise GeometryError("yaw undefined for a vertical direction")
    return math.atan2(d.x, d.z) * _DEG


def angular_error(ray: GazeRay, target: TargetSphere) -> float:
    """Angle in degrees, in [0, 180], between the gaze direction and the
    direction from the ray origin to the target center."""
    ox, oy, oz = ray.origin
    cx, cy, cz = target.center
    tx, ty, tz = cx - ox, cy - oy, cz - oz
    dist = math.sqrt(tx * tx + ty * ty + tz * tz)
    if dist < 1e-12:
        raise GeometryError("gaze origin coincides with target center")
    d = ray.dir
    dn = math.sqrt(d.x * d.x + d.y * d.y + d.z * d.z)
    c = (d.x * tx + d.y * ty + d.z * tz) / (dist * dn)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return math.acos(c) * _DEG


def hit_test(ray: GazeRay, target: TargetSphere) -> bool:
    """True iff the ray intersects the sphere (boundary counts as a hit).

    Solved via the ray-sphere quadratic, independently of angular_error: with
    o the origin-to-center offset, |t*d - o|^2 = r^2 has a real root t >= 0
    exactly when the gaze collides with the object. An origin inside the
    sphere always hits.
    """
    ox, oy, oz = ray.origin
    cx, cy, cz = target.center
    fx, fy, fz = cx - ox, cy - oy, cz - oz
    if math.sqrt(fx * fx + fy * fy + fz * fz) < 1e-12:
        raise GeometryError("gaze origin coincides with target center")
    d = ray.dir
    a = d.x * d.x + d.y * d.y + d.z * d.z
    b = d.x * fx + d.y * fy + d.z * fz  # half the usual -b term
    c = fx * fx + fy * fy + fz * fz - target.radius * target.radius
    if c <= 0.0:
        return True  # origin inside or on the sphere
    disc = b * b - a * c
    if disc < 0.0:
        return False
    # nearest root; with c > 0 both roots share the sign of b
    return b >= 0.0


def cyclopean(s: GazeSample) -> GazeRay:
    """Single combined gaze ray: midpoint origin, normalized mean direction."""
    lo, ro = s.left.origin, s.right.origin
    ld, rd = s.left.dir, s.right.dir
    mx = (ld.x + rd.x) * 0.5
    my = (ld.y + rd.y) * 0.5
    mz = (ld.z + rd.z) * 0.5
    n = math.sqrt(mx * mx + my * my + mz * mz)
    if n < 1e-6:
        raise GeometryError("eye directions are near-opposite; no cyclopean ray")
    origin = ((lo[0] + ro[0]) * 0.5, (lo[1] + ro[1]) * 0.5, (lo[2] + ro[2]) * 0.5)
    return GazeRay(origin, Direction3(mx / n, my / n, mz / n))


def acceptance_angle_deg(target: TargetSphere, origin: Vec3) -> float:
    """Half-angle of the cone from ``origin`` subtended by the sphere, degrees."""
    ox, oy, oz = origin
    cx, cy, cz = target.center
    dist = math.dist((ox, oy, oz), (cx, cy, cz))
    if dist <= target.radius:
        return 180.0
    return math.asin(target.radius / dist) * _DEG
