"""Rotation math for balance control.

Attitude is carried as a unit quaternion mapping body coordinates into
global coordinates, scalar first, kept in the w >= 0 half so every rotation
has exactly one representation.  On top of that sits the fused-angle view
used by the balance code: a twist about the global vertical (fused yaw) plus
two bounded tilt projections (fused pitch and fused roll) and a hemisphere
flag that distinguishes tilts beyond 90 degrees.

The tilt projections are taken from the global z axis expressed in body
coordinates, so they are invariant under heading changes: a forward lean
reads as pure fused pitch no matter which way the robot faces.  Both tilt
angles live in [-pi/2, pi/2] and satisfy sin^2(pitch) + sin^2(roll) <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError

TAU = 2.0 * math.pi

# Tolerances mirrored by the validity checks below.
_NORM_TOL = 1e-9
_DISC_TOL = 1e-12


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(angle, TAU)
    if r <= -math.pi:
        r += TAU
    return r


@dataclass(frozen=True)
class RotationQuat:
    """Unit quaternion (w, x, y, z), canonicalized to w >= 0 on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if not n > 1e-150:  # also rejects NaN
            raise InvalidArgumentError(f"quaternion norm {n} cannot be normalized")
        s = 1.0 / n
        if self.w < 0.0:
            s = -s
        if s != 1.0:
            object.__setattr__(self, "w", self.w * s)
            object.__setattr__(self, "x", self.x * s)
            object.__setattr__(self, "y", self.y * s)
            object.__setattr__(self, "z", self.z * s)

    @staticmethod
    def identity() -> "RotationQuat":
        return RotationQuat(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis, angle: float) -> "RotationQuat":
        """Rotation of ``angle`` rad about a unit ``axis`` (3-sequence)."""
        ax, ay, az = float(axis[0]), float(axis[1]), float(axis[2])
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if abs(n - 1.0) > 1e-6:
            raise InvalidArgumentError(f"axis norm {n} is not 1")
        h = 0.5 * angle
        s = math.sin(h) / n
        return RotationQuat(math.cos(h), ax * s, ay * s, az * s)

    @staticmethod
    def from_rotation_vector(v) -> "RotationQuat":
        """exp map: rotation by |v| rad about v. Safe at |v| = 0."""
        vx, vy, vz = float(v[0]), float(v[1]), float(v[2])
        t = math.sqrt(vx * vx + vy * vy + vz * vz)
        if t < 1e-12:
            # sin(t/2)/t -> 1/2; second-order term keeps this smooth.
            s = 0.5 - t * t / 48.0
            return RotationQuat(1.0 - t * t / 8.0, vx * s, vy * s, vz * s)
        s = math.sin(0.5 * t) / t
        return RotationQuat(math.cos(0.5 * t), vx * s, vy * s, vz * s)

    def multiply(self, o: "RotationQuat") -> "RotationQuat":
        """Hamilton product self * o (apply o first, then self)."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = o.w, o.x, o.y, o.z
        return RotationQuat(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    __mul__ = multiply

    def conjugate(self) -> "RotationQuat":
        return RotationQuat(self.w, -self.x, -self.y, -self.z)

    inverse = conjugate

    def rotate(self, v):
        """Rotate a 3-vector from body into global coordinates."""
        w, x, y, z = self.w, self.x, self.y, self.z
        vx, vy, vz = float(v[0]), float(v[1]), float(v[2])
        # v + 2*w*(q_v x v) + 2*(q_v x (q_v x v))
        tx = 2.0 * (y * vz - z * vy)
        ty = 2.0 * (z * vx - x * vz)
        tz = 2.0 * (x * vy - y * vx)
        return (
            vx + w * tx + (y * tz - z * ty),
            vy + w * ty + (z * tx - x * tz),
            vz + w * tz + (x * ty - y * tx),
        )

    def rotate_back(self, v):
        """Rotate a 3-vector from global into body coordinates."""
        return self.conjugate().rotate(v)

    def to_matrix(self):
        """3x3 rotation matrix as nested tuples (rows)."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return (
            (1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)),
            (2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)),
            (2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)),
        )

    def norm_error(self) -> float:
        return abs(
            math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2) - 1.0
        )


@dataclass(frozen=True)
class FusedAngles:
    """Fused yaw/pitch/roll plus hemisphere flag.

    ``hemisphere`` is +1 while the body z axis keeps a non-negative global
    z component and -1 beyond the 90-degree tilt boundary.
    """

    fused_yaw: float
    fused_pitch: float
    fused_roll: float
    hemisphere: int = 1

    def __post_init__(self):
        if self.hemisphere not in (1, -1):
            raise InvalidArgumentError(f"hemisphere must be +1 or -1, got {self.hemisphere}")
        half = 0.5 * math.pi
        for name in ("fused_pitch", "fused_roll"):
            v = getattr(self, name)
            if abs(v) > half + 1e-9:
                raise InvalidArgumentError(f"{name}={v} outside [-pi/2, pi/2]")
            if abs(v) > half:
                object.__setattr__(self, name, math.copysign(half, v))
        crit = math.sin(self.fused_pitch) ** 2 + math.sin(self.fused_roll) ** 2
        if crit > 1.0 + _DISC_TOL:
            raise InvalidArgumentError(
                f"sin^2(pitch)+sin^2(roll) = {crit} exceeds 1: no such tilt"
            )
        w = wrap_angle(self.fused_yaw)
        if w != self.fused_yaw:
            object.__setattr__(self, "fused_yaw", w)

    @staticmethod
    def identity() -> "FusedAngles":
        return FusedAngles(0.0, 0.0, 0.0, 1)


def fused_yaw_of(q: RotationQuat) -> float:
    """Fused yaw of a rotation: twist about the global vertical, (-pi, pi]."""
    # q is canonical (w >= 0), so 2*atan2 already lands in [-pi, pi].
    return wrap_angle(2.0 * math.atan2(q.z, q.w))


def fused_from_quat(q: RotationQuat) -> FusedAngles:
    """Decompose a rotation into fused angles."""
    psi = fused_yaw_of(q)
    s_pitch = 2.0 * (q.w * q.y - q.x * q.z)
    s_roll = 2.0 * (q.w * q.x + q.y * q.z)
    s_pitch = min(1.0, max(-1.0, s_pitch))
    s_roll = min(1.0, max(-1.0, s_roll))
    hemi = 1 if (q.x * q.x + q.y * q.y) <= 0.5 else -1
    return FusedAngles(psi, math.asin(s_pitch), math.asin(s_roll), hemi)


def quat_from_fused(f: FusedAngles) -> RotationQuat:
    """Reassemble the rotation from fused angles.

    Exact right-inverse of :func:`fused_from_quat` away from the inverted
    singularity (hemisphere -1 with zero tilt), where fused yaw is not
    observable and decomposition returns yaw 0.
    """
    s_pitch = math.sin(f.fused_pitch)
    s_roll = math.sin(f.fused_roll)
    crit = s_pitch * s_pitch + s_roll * s_roll
    if crit > 1.0 + _DISC_TOL:
        raise InvalidArgumentError(f"invalid fused pair, sin criterion {crit} > 1")
    # Half-angle terms for the tilt angle alpha, written so that neither
    # side cancels: 1 -+ cos(alpha) is expanded via crit/(1 + sqrt(1-crit)).
    # This keeps full relative precision for near-zero tilts on both
    # hemispheres (a plain acos/cos route loses ~8 digits there).
    s = math.sqrt(max(0.0, 1.0 - crit))
    minor = math.sqrt(crit / (2.0 * (1.0 + s)))
    major = math.sqrt(0.5 * (1.0 + s))
    if f.hemisphere >= 0:
        ch, sh = major, minor  # cos(alpha/2), sin(alpha/2)
    else:
        ch, sh = minor, major
    gamma = math.atan2(s_pitch, s_roll)
    hpsi = 0.5 * f.fused_yaw
    a = gamma + hpsi
    return RotationQuat(
        ch * math.cos(hpsi),
        sh * math.cos(a),
        sh * math.sin(a),
        ch * math.sin(hpsi),
    )


def quat_about_z(angle: float) -> RotationQuat:
    """Rotation about the global z axis (pure fused yaw)."""
    h = 0.5 * angle
    return RotationQuat(math.cos(h), 0.0, 0.0, math.sin(h))
