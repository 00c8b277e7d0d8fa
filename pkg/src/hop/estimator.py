"""Nonlinear complementary attitude filter with gyro bias adaptation.

The filter integrates rate-corrected gyro measurements on the quaternion
manifold.  The accelerometer supplies a tilt correction (cross product of
the measured and predicted gravity directions in body coordinates) that is
faded out whenever the accelerometer norm strays from 1 g, so transient
accelerations do not bend the attitude.  The magnetometer supplies a heading
correction applied as a twist about the global vertical after the body-frame
step, so it can never touch the tilt estimate.  Bias adapts from the
accelerometer correction alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

from .errors import InvalidArgumentError, SchemaError
from .orientation import FusedAngles, RotationQuat, fused_from_quat, quat_about_z

GRAVITY = 9.81

Vec3 = Tuple[float, float, float]

REPLAY_HEADER = ["t", "gx", "gy", "gz", "ax", "ay", "az", "mx", "my", "mz"]


@dataclass(frozen=True)
class ImuSample:
    """One IMU reading: rad/s, m/s^2, and a unitless field vector."""

    gyro: Vec3
    accel: Vec3
    mag: Vec3 = (0.0, 0.0, 0.0)


_IDENTITY_AFFINE = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


@dataclass(frozen=True)
class FilterConfig:
    """Gains and trust settings.

    kp:     tilt correction gain, 1/s
    ti:     bias integration time constant, s
    km:     relative weight of the magnetometer heading correction
            (0 disables the magnetometer entirely)
    accel_trust_band: half width, m/s^2, of the linear trust taper around 1 g
    mag_affine/mag_offset: pre-applied hard/soft-iron map, identity by default
    quick_learn_time/quick_learn_boost: for the first quick_learn_time
            seconds after init the correction gain is multiplied by a factor
            fading linearly from quick_learn_boost down to 1, while bias
            adaptation ramps up from 0 over the same window.  This locks on
            from a large initial error quickly without winding up the bias
            integrator.  A time of 0 disables the schedule.
    """

    kp: float = 2.2
    ti: float = 2.65
    km: float = 0.2
    accel_trust_band: float = 4.0
    mag_affine: Tuple[Vec3, Vec3, Vec3] = _IDENTITY_AFFINE
    mag_offset: Vec3 = (0.0, 0.0, 0.0)
    quick_learn_time: float = 3.0
    quick_learn_boost: float = 10.0

    def __post_init__(self):
        if not self.kp >= 0.0:
            raise InvalidArgumentError(f"kp must be >= 0, got {self.kp}")
        if not self.ti > 0.0:
            raise InvalidArgumentError(f"ti must be > 0, got {self.ti}")
        if not self.km >= 0.0:
            raise InvalidArgumentError(f"km must be >= 0, got {self.km}")
        if not self.accel_trust_band > 0.0:
            raise InvalidArgumentError(
                f"accel_trust_band must be > 0, got {self.accel_trust_band}"
            )
        if not self.quick_learn_time >= 0.0:
            raise InvalidArgumentError(
                f"quick_learn_time must be >= 0, got {self.quick_learn_time}"
            )
        if not self.quick_learn_boost >= 1.0:
            raise InvalidArgumentError(
                f"quick_learn_boost must be >= 1, got {self.quick_learn_boost}"
            )

    def to_dict(self) -> dict:
        return {
            "kp": self.kp,
            "ti": self.ti,
            "km": self.km,
            "accel_trust_band": self.accel_trust_band,
            "mag_affine": [list(row) for row in self.mag_affine],
            "mag_offset": list(self.mag_offset),
            "quick_learn_time": self.quick_learn_time,
            "quick_learn_boost": self.quick_learn_boost,
        }

    @staticmethod
    def from_dict(d: dict) -> "FilterConfig":
        if not isinstance(d, dict):
            raise SchemaError("filter config must be an object")
        known = {
            "kp",
            "ti",
            "km",
            "accel_trust_band",
            "mag_affine",
            "mag_offset",
            "quick_learn_time",
            "quick_learn_boost",
        }
        for k in d:
            if k not in known:
                raise SchemaError(f"unknown key {k!r}", path="filter")
        kwargs = {}
        for k in ("kp", "ti", "km", "accel_trust_band", "quick_learn_time", "quick_learn_boost"):
            if k in d:
                kwargs[k] = float(d[k])
        if "mag_affine" in d:
            rows = d["mag_affine"]
            if len(rows) != 3 or any(len(r) != 3 for r in rows):
                raise SchemaError("mag_affine must be 3x3", path="filter.mag_affine")
            kwargs["mag_affine"] = tuple(tuple(float(v) for v in r) for r in rows)
        if "mag_offset" in d:
            off = d["mag_offset"]
            if len(off) != 3:
                raise SchemaError("mag_offset must have 3 entries", path="filter.mag_offset")
            kwargs["mag_offset"] = tuple(float(v) for v in off)
        return FilterConfig(**kwargs)


@dataclass(frozen=True)
class FilterState:
    """Attitude estimate (body -> global), gyro bias, and the config.

    elapsed tracks time since init and drives the startup gain schedule.
    """

    attitude: RotationQuat
    bias: Vec3
    config: FilterConfig
    elapsed: float = 0.0


def filter_init(
    config: Optional[FilterConfig] = None,
    attitude: Optional[RotationQuat] = None,
    bias: Vec3 = (0.0, 0.0, 0.0),
) -> FilterState:
    return FilterState(
        attitude=attitude if attitude is not None else RotationQuat.identity(),
        bias=(float(bias[0]), float(bias[1]), float(bias[2])),
        config=config if config is not None else FilterConfig(),
    )


def filter_update(state: FilterState, sample: ImuSample, dt: float) -> FilterState:
    """Advance the estimate by one IMU sample over dt seconds."""
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    if dt > 0.1:
        raise InvalidArgumentError(f"dt {dt} exceeds 0.1 s; stream considered stalled")

    q = state.attitude
    cfg = state.config
    # Predicted up direction in body coordinates (global z back-rotated).
    gx = 2.0 * (q.x * q.z - q.w * q.y)
    gy = 2.0 * (q.y * q.z + q.w * q.x)
    gz = 1.0 - 2.0 * (q.x * q.x + q.y * q.y)

    ax, ay, az = sample.accel
    an = math.sqrt(ax * ax + ay * ay + az * az)
    ex = ey = ez = 0.0
    mu = 0.0
    if an > 0.0:
        mu = max(0.0, 1.0 - abs(an - GRAVITY) / cfg.accel_trust_band)
        if mu > 0.0:
            ux, uy, uz = ax / an, ay / an, az / an
            # measured-up x predicted-up, scaled by trust
            ex = mu * (uy * gz - uz * gy)
            ey = mu * (uz * gx - ux * gz)
            ez = mu * (ux * gy - uy * gx)

    heading_err = 0.0
    if cfg.km > 0.0:
        mx, my, mz = sample.mag
        a = cfg.mag_affine
        o = cfg.mag_offset
        mx, my, mz = (
            a[0][0] * mx + a[0][1] * my + a[0][2] * mz + o[0],
            a[1][0] * mx + a[1][1] * my + a[1][2] * mz + o[1],
            a[2][0] * mx + a[2][1] * my + a[2][2] * mz + o[2],
        )
        if mx * mx + my * my + mz * mz > 0.0:
            wx, wy, _ = q.rotate((mx, my, mz))
            # Horizontal projection: heading error of the field against the
            # global +x reference.  Skipped when the field is near-vertical.
            if math.hypot(wx, wy) > 1e-9:
                heading_err = math.atan2(wy, wx)

    # Startup schedule: boost the correction gain right after init, fading
    # linearly to the nominal value, and ramp bias adaptation in over the
    # same window so the transient cannot wind up the integrator.
    if cfg.quick_learn_time > 0.0:
        lam = min(1.0, state.elapsed / cfg.quick_learn_time)
    else:
        lam = 1.0
    kp_eff = cfg.kp * (cfg.quick_learn_boost * (1.0 - lam) + lam)

    bx, by, bz = state.bias
    ox = sample.gyro[0] - bx + kp_eff * ex
    oy = sample.gyro[1] - by + kp_eff * ey
    oz = sample.gyro[2] - bz + kp_eff * ez

    k_bias = lam * cfg.kp / cfg.ti * dt
    new_bias = (bx - k_bias * ex, by - k_bias * ey, bz - k_bias * ez)
    step = RotationQuat.from_rotation_vector((ox * dt, oy * dt, oz * dt))
    attitude = q.multiply(step)
    if heading_err != 0.0:
        # Heading correction as a twist about the global vertical, applied
        # after the body-frame step: fused pitch/roll are untouched exactly.
        attitude = quat_about_z(-kp_eff * cfg.km * heading_err * dt).multiply(attitude)
    return replace(
        state, attitude=attitude, bias=new_bias, elapsed=state.elapsed + dt
    )


def estimate_fused(state: FilterState) -> FusedAngles:
    """Current attitude in fused angles."""
    return fused_from_quat(state.attitude)


def load_replay_csv(path) -> List[Tuple[float, ImuSample]]:
    """Read a raw IMU stream: t,gx,gy,gz,ax,ay,az,mx,my,mz.

    Timestamps must be strictly increasing.
    """
    rows: List[Tuple[float, ImuSample]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != REPLAY_HEADER:
            raise SchemaError(
                f"replay header must be {','.join(REPLAY_HEADER)}", path=str(path)
            )
        prev_t = None
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != 10:
                raise SchemaError(f"row {i + 2}: expected 10 fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as e:
                raise SchemaError(f"row {i + 2}: {e}") from None
            t = vals[0]
            if prev_t is not None and not t > prev_t:
                raise SchemaError(f"row {i + 2}: timestamps must strictly increase")
            prev_t = t
            rows.append(
                (t, ImuSample(tuple(vals[1:4]), tuple(vals[4:7]), tuple(vals[7:10])))
            )
    return rows


def run_replay(
    samples: Iterable[Tuple[float, ImuSample]],
    config: Optional[FilterConfig] = None,
    initial: Optional[RotationQuat] = None,
) -> List[Tuple[float, FusedAngles]]:
    """Run the filter over a timestamped stream, yielding fused estimates."""
    state = filter_init(config, attitude=initial)
    out: List[Tuple[float, FusedAngles]] = []
    prev_t = None
    for t, sample in samples:
        if prev_t is not None:
            state = filter_update(state, sample, t - prev_t)
        prev_t = t
        out.append((t, estimate_fused(state)))
    return out
