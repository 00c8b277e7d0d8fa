"""Keyframe motions: cubic Hermite playback with orientation PID on top.

A motion is a list of timed keyframes carrying joint positions, joint
velocities, per-joint efforts and left/right support coefficients.
Positions/velocities interpolate as a C1 cubic Hermite spline (the cubic is
fixed by matching both values at the segment ends); efforts and support
interpolate linearly.  During playback an optional PID loop on the fused
pitch/roll estimate adds a correction, distributed over the joints by a
per-motion gain map, so a motion can lean against a measured tilt.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, SchemaError
from .model import JOINT_NAMES
from .orientation import FusedAngles

N_JOINTS = len(JOINT_NAMES)


@dataclass(frozen=True)
class AxisPid:
    enabled: bool = False
    p: float = 0.0
    i: float = 0.0
    d: float = 0.0


@dataclass(frozen=True)
class MotionPid:
    pitch: AxisPid = AxisPid()
    roll: AxisPid = AxisPid()
    i_clamp: float = 0.25
    joint_gain_map: Tuple[float, ...] = (0.0,) * N_JOINTS


@dataclass
class Keyframe:
    time: float
    positions: np.ndarray
    velocities: np.ndarray
    efforts: np.ndarray
    support: Tuple[float, float]  # (left, right)


@dataclass
class Motion:
    name: str
    keyframes: List[Keyframe]
    pid: MotionPid = MotionPid()

    @property
    def duration(self) -> float:
        return self.keyframes[-1].time

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "keyframes": [
                {
                    "t": kf.time,
                    "pos": [float(v) for v in kf.positions],
                    "vel": [float(v) for v in kf.velocities],
                    "eff": [float(v) for v in kf.efforts],
                    "sup": {"l": kf.support[0], "r": kf.support[1]},
                }
                for kf in self.keyframes
            ],
            "pid": {
                "pitch": _axis_dict(self.pid.pitch),
                "roll": _axis_dict(self.pid.roll),
                "i_clamp": self.pid.i_clamp,
                "joint_gain_map": list(self.pid.joint_gain_map),
            },
        }


def _axis_dict(a: AxisPid) -> dict:
    return {"enabled": a.enabled, "p": a.p, "i": a.i, "d": a.d}


def _vector(raw, n: int, path: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n:
        raise SchemaError(f"expected {n} numbers", path=path)
    try:
        arr = np.array([float(v) for v in raw])
    except (TypeError, ValueError):
        raise SchemaError("expected numbers", path=path) from None
    if not np.all(np.isfinite(arr)):
        raise SchemaError("values must be finite", path=path)
    return arr


def _axis_pid(raw, path: str) -> AxisPid:
    if not isinstance(raw, dict):
        raise SchemaError("expected an object", path=path)
    allowed = {"enabled", "p", "i", "d"}
    for k in raw:
        if k not in allowed:
            raise SchemaError(f"unknown field {k!r}", path=path)
    try:
        a = AxisPid(
            enabled=bool(raw.get("enabled", False)),
            p=float(raw.get("p", 0.0)),
            i=float(raw.get("i", 0.0)),
            d=float(raw.get("d", 0.0)),
        )
    except (TypeError, ValueError):
        raise SchemaError("gains must be numbers", path=path) from None
    for v in (a.p, a.i, a.d):
        if not math.isfinite(v):
            raise SchemaError("gains must be finite", path=path)
    return a


def load_motion(doc: dict) -> Motion:
    """Validate a motion document; rejects unknown fields."""
    if not isinstance(doc, dict):
        raise SchemaError("motion document must be an object")
    allowed = {"name", "keyframes", "pid"}
    for k in doc:
        if k not in allowed:
            raise SchemaError(f"unknown field {k!r}", path="motion")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise SchemaError("missing motion name", path="name")
    raw_kfs = doc.get("keyframes")
    if not isinstance(raw_kfs, list) or len(raw_kfs) < 2:
        raise SchemaError("keyframes must be a list of at least 2", path="keyframes")

    keyframes: List[Keyframe] = []
    prev_t = None
    for i, raw in enumerate(raw_kfs):
        path = f"keyframes[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError("keyframe must be an object", path=path)
        allowed = {"t", "pos", "vel", "eff", "sup"}
        for k in raw:
            if k not in allowed:
                raise SchemaError(f"unknown field {k!r}", path=path)
        try:
            t = float(raw["t"])
        except (KeyError, TypeError, ValueError):
            raise SchemaError("missing or invalid time", path=f"{path}.t") from None
        if t < 0.0 or not math.isfinite(t):
            raise SchemaError("time must be finite and >= 0", path=f"{path}.t")
        if prev_t is not None and not t > prev_t:
            raise SchemaError(
                f"time {t} not after previous keyframe {prev_t}", path=f"{path}.t"
            )
        prev_t = t
        pos = _vector(raw.get("pos"), N_JOINTS, f"{path}.pos")
        vel = _vector(raw.get("vel"), N_JOINTS, f"{path}.vel")
        eff = _vector(raw.get("eff"), N_JOINTS, f"{path}.eff")
        if np.any(eff < 0.0) or np.any(eff > 1.0):
            raise SchemaError("efforts must lie in [0, 1]", path=f"{path}.eff")
        sup = raw.get("sup")
        if not isinstance(sup, dict) or set(sup) != {"l", "r"}:
            raise SchemaError("sup must be {l, r}", path=f"{path}.sup")
        try:
            support = (float(sup["l"]), float(sup["r"]))
        except (TypeError, ValueError):
            raise SchemaError("support must be numbers", path=f"{path}.sup") from None
        if not all(0.0 <= s <= 1.0 for s in support):
            raise SchemaError("support must lie in [0, 1]", path=f"{path}.sup")
        keyframes.append(Keyframe(t, pos, vel, eff, support))

    pid = MotionPid()
    if "pid" in doc:
        raw = doc["pid"]
        if not isinstance(raw, dict):
            raise SchemaError("pid must be an object", path="pid")
        allowed = {"pitch", "roll", "i_clamp", "joint_gain_map"}
        for k in raw:
            if k not in allowed:
                raise SchemaError(f"unknown field {k!r}", path="pid")
        gain_map = (0.0,) * N_JOINTS
        if "joint_gain_map" in raw:
            arr = _vector(raw["joint_gain_map"], N_JOINTS, "pid.joint_gain_map")
            if np.any(np.abs(arr) > 1.0):
                raise SchemaError("weights must lie in [-1, 1]", path="pid.joint_gain_map")
            gain_map = tuple(float(v) for v in arr)
        i_clamp = float(raw.get("i_clamp", 0.25))
        if not (math.isfinite(i_clamp) and i_clamp >= 0.0):
            raise SchemaError("i_clamp must be >= 0", path="pid.i_clamp")
        pid = MotionPid(
            pitch=_axis_pid(raw["pitch"], "pid.pitch") if "pitch" in raw else AxisPid(),
            roll=_axis_pid(raw["roll"], "pid.roll") if "roll" in raw else AxisPid(),
            i_clamp=i_clamp,
            joint_gain_map=gain_map,
        )
    return Motion(name, keyframes, pid)


@dataclass
class Frame:
    positions: np.ndarray
    velocities: np.ndarray
    efforts: np.ndarray
    support: Tuple[float, float]


def interpolate(motion: Motion, t: float) -> Frame:
    """Frame at time t; t may overshoot the ends by at most 1e-6 s."""
    kfs = motion.keyframes
    t0, t1 = kfs[0].time, kfs[-1].time
    if t < t0 - 1e-6 or t > t1 + 1e-6:
        raise InvalidArgumentError(f"time {t} outside motion range [{t0}, {t1}]")
    t = min(t1, max(t0, t))
    times = [kf.time for kf in kfs]
    seg = min(len(kfs) - 2, max(0, bisect_right(times, t) - 1))
    a, b = kfs[seg], kfs[seg + 1]
    h = b.time - a.time
    s = (t - a.time) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    pos = h00 * a.positions + h10 * h * a.velocities + h01 * b.positions + h11 * h * b.velocities
    d00 = (6 * s2 - 6 * s) / h
    d10 = 3 * s2 - 4 * s + 1
    d01 = (-6 * s2 + 6 * s) / h
    d11 = 3 * s2 - 2 * s
    vel = d00 * a.positions + d10 * a.velocities + d01 * b.positions + d11 * b.velocities
    eff = (1 - s) * a.efforts + s * b.efforts
    support = (
        (1 - s) * a.support[0] + s * b.support[0],
        (1 - s) * a.support[1] + s * b.support[1],
    )
    return Frame(pos, vel, eff, support)


@dataclass
class PlayState:
    motion: Motion
    t: float = 0.0
    integ_pitch: float = 0.0
    integ_roll: float = 0.0
    prev_pitch: Optional[float] = None
    prev_roll: Optional[float] = None
    done: bool = False


def play_init(motion: Motion) -> PlayState:
    return PlayState(motion=motion, t=motion.keyframes[0].time)


def _axis_correction(
    axis: AxisPid, dev: float, integ: float, prev: Optional[float], dt: float, clamp: float
) -> Tuple[float, float]:
    """(correction, new integrator) for one axis."""
    if not axis.enabled:
        return 0.0, integ
    integ = min(clamp, max(-clamp, integ + dev * dt))
    rate = 0.0 if prev is None else (dev - prev) / dt
    return axis.p * dev + axis.i * integ + axis.d * rate, integ


def play_tick(state: PlayState, fused: FusedAngles, dt: float) -> Tuple[PlayState, Frame, bool]:
    """One playback step: frame at the current time, then advance.

    Returns (new state, commanded frame, completion flag).  With PID
    disabled the commanded positions are a pure function of time.
    """
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    frame = interpolate(state.motion, state.t)
    pid = state.motion.pid
    dev_p, dev_r = fused.fused_pitch, fused.fused_roll
    corr_p, integ_p = _axis_correction(
        pid.pitch, dev_p, state.integ_pitch, state.prev_pitch, dt, pid.i_clamp
    )
    corr_r, integ_r = _axis_correction(
        pid.roll, dev_r, state.integ_roll, state.prev_roll, dt, pid.i_clamp
    )
    corr = corr_p + corr_r
    if corr != 0.0:
        frame = Frame(
            frame.positions + np.array(pid.joint_gain_map) * corr,
            frame.velocities,
            frame.efforts,
            frame.support,
        )
    new_t = state.t + dt
    duration = state.motion.duration
    # tolerance so accumulated dt rounding cannot miss the final tick
    done = new_t >= duration - 1e-9
    new_state = replace(
        state,
        t=duration if done else new_t,
        integ_pitch=integ_p,
        integ_roll=integ_r,
        prev_pitch=dev_p if pid.pitch.enabled else None,
        prev_roll=dev_r if pid.roll.enabled else None,
        done=done,
    )
    return new_state, frame, done
