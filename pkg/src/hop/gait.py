"""Central-pattern walking core with fused-angle feedback channels.

The open-loop layer is a function of a single phase angle: each leg runs a
limb phase (right shifted by pi), swing legs shorten, leg angles follow the
commanded velocities as cosine waves, and a common lateral sway shifts the
weight side to side.  On top of that, six PD feedback channels driven by the
deviation of measured fused pitch/roll from their expected values push the
pose back (arm, hip and foot angle offsets in abstract space, plus a swing
foot height offset applied through leg IK), and a timing channel holds the
phase back while the lateral sway has not returned.

Every channel output is exactly 0.0 at zero deviation and the correction
stage is skipped entirely in that case, so a zero-deviation run reproduces
the open-loop joint trajectory bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, SchemaError, UnreachableError
from .kinematics import (
    AbstractPose,
    ArmAbstract,
    LegAbstract,
    abstract_to_joint,
    apply_leg_solution,
    clamp_to_limits,
    forward_kinematics,
    leg_inverse_kinematics,
)
from .model import RobotModel
from .orientation import TAU, FusedAngles, wrap_angle

CHANNELS = ("arm", "hipY", "hipX", "footY", "footX", "footHeight")

# sagittal channels take the pitch deviation, lateral ones the roll deviation
_CHANNEL_AXIS = {
    "arm": "pitch",
    "hipY": "pitch",
    "footY": "pitch",
    "hipX": "roll",
    "footX": "roll",
    "footHeight": "roll",
}

_RATE_FILTER_TC = 0.05  # s, first-order smoothing of the deviation rate


@dataclass(frozen=True)
class GaitCommand:
    """Normalized walking command; components clamp to [-1, 1]."""

    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0
    walk: bool = False

    def __post_init__(self):
        for name in ("vx", "vy", "wz"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, min(1.0, max(-1.0, float(v))))


@dataclass(frozen=True)
class ChannelGains:
    p: float = 0.0
    d: float = 0.0
    sat: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.p) and math.isfinite(self.d)):
            raise InvalidArgumentError("channel gains must be finite")
        if not self.sat >= 0.0:
            raise InvalidArgumentError(f"saturation must be >= 0, got {self.sat}")


_DEFAULT_CHANNELS = {
    "arm": ChannelGains(0.4, 0.05, 0.3),
    "hipY": ChannelGains(0.25, 0.04, 0.15),
    "hipX": ChannelGains(0.25, 0.04, 0.15),
    "footY": ChannelGains(0.2, 0.03, 0.2),
    "footX": ChannelGains(0.2, 0.03, 0.2),
    "footHeight": ChannelGains(0.06, 0.01, 0.04),
}


@dataclass(frozen=True)
class GaitConfig:
    """Amplitudes, gains and rates of the walking core."""

    a_sag: float = 0.08
    a_lat: float = 0.05
    a_rot: float = 0.25
    a_step: float = 0.12
    a_sway: float = 0.025
    a_arm: float = 0.25
    freq: float = 1.4
    eta0: float = 0.05
    expected_pitch: float = 0.0
    expected_roll: float = 0.0
    deadband: float = math.radians(0.5)
    slew: float = 2.0
    timing_gain: float = 4.0
    channels: Dict[str, ChannelGains] = field(
        default_factory=lambda: dict(_DEFAULT_CHANNELS)
    )

    def __post_init__(self):
        if not self.freq > 0.0:
            raise InvalidArgumentError(f"freq must be > 0, got {self.freq}")
        if not 0.0 <= self.eta0 <= 1.0:
            raise InvalidArgumentError(f"eta0 must lie in [0, 1], got {self.eta0}")
        if not self.slew > 0.0:
            raise InvalidArgumentError(f"slew must be > 0, got {self.slew}")
        if not self.deadband >= 0.0:
            raise InvalidArgumentError("deadband must be >= 0")
        if not self.timing_gain >= 0.0:
            raise InvalidArgumentError("timing_gain must be >= 0")
        if set(self.channels) != set(CHANNELS):
            raise InvalidArgumentError(f"channels must be exactly {CHANNELS}")

    def to_dict(self) -> dict:
        doc = {
            "A_sag": self.a_sag,
            "A_lat": self.a_lat,
            "A_rot": self.a_rot,
            "A_step": self.a_step,
            "A_sway": self.a_sway,
            "A_arm": self.a_arm,
            "freq": self.freq,
            "eta0": self.eta0,
            "expectedPitch": self.expected_pitch,
            "expectedRoll": self.expected_roll,
            "deadband": self.deadband,
            "slew": self.slew,
            "timingGain": self.timing_gain,
            "channels": {
                name: {"P": g.p, "D": g.d, "sat": g.sat}
                for name, g in self.channels.items()
            },
        }
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "GaitConfig":
        if not isinstance(doc, dict):
            raise SchemaError("gait config must be an object")
        scalar_keys = {
            "A_sag": "a_sag",
            "A_lat": "a_lat",
            "A_rot": "a_rot",
            "A_step": "a_step",
            "A_sway": "a_sway",
            "A_arm": "a_arm",
            "freq": "freq",
            "eta0": "eta0",
            "expectedPitch": "expected_pitch",
            "expectedRoll": "expected_roll",
            "deadband": "deadband",
            "slew": "slew",
            "timingGain": "timing_gain",
        }
        kwargs = {}
        for k in doc:
            if k not in scalar_keys and k != "channels":
                raise SchemaError(f"unknown key {k!r}", path="gait")
        for k, attr in scalar_keys.items():
            if k in doc:
                try:
                    kwargs[attr] = float(doc[k])
                except (TypeError, ValueError):
                    raise SchemaError("expected a number", path=f"gait.{k}") from None
        if "channels" in doc:
            raw = doc["channels"]
            if not isinstance(raw, dict):
                raise SchemaError("channels must be an object", path="gait.channels")
            channels = dict(_DEFAULT_CHANNELS)
            for name, rec in raw.items():
                if name not in CHANNELS:
                    raise SchemaError(f"unknown channel {name!r}", path="gait.channels")
                if not isinstance(rec, dict) or set(rec) - {"P", "D", "sat"}:
                    raise SchemaError("channel must be {P, D, sat}", path=f"gait.channels.{name}")
                try:
                    channels[name] = ChannelGains(
                        p=float(rec.get("P", 0.0)),
                        d=float(rec.get("D", 0.0)),
                        sat=float(rec.get("sat", 0.0)),
                    )
                except (TypeError, ValueError):
                    raise SchemaError("expected numbers", path=f"gait.channels.{name}") from None
            kwargs["channels"] = channels
        try:
            return GaitConfig(**kwargs)
        except InvalidArgumentError as e:
            raise SchemaError(str(e), path="gait") from None


@dataclass(frozen=True)
class CorrectiveActions:
    """Feedback outputs; every field is exactly 0.0 at zero deviation."""

    arm_y: float = 0.0
    hip_y: float = 0.0
    hip_x: float = 0.0
    foot_y: float = 0.0
    foot_x: float = 0.0
    foot_height: float = 0.0
    timing_adjust: float = 0.0

    def all_zero(self) -> bool:
        return (
            self.arm_y == 0.0
            and self.hip_y == 0.0
            and self.hip_x == 0.0
            and self.foot_y == 0.0
            and self.foot_x == 0.0
            and self.foot_height == 0.0
            and self.timing_adjust == 0.0
        )


@dataclass(frozen=True)
class GaitState:
    phase: float = 0.0
    command: GaitCommand = GaitCommand()
    prev_dev: Tuple[float, float] = (0.0, 0.0)  # pitch, roll
    dev_rate: Tuple[float, float] = (0.0, 0.0)  # filtered rates
    support_leg: str = "right"
    ik_fallback: bool = False


def gait_init(phase: float = 0.0, command: Optional[GaitCommand] = None) -> GaitState:
    return GaitState(
        phase=wrap_angle(phase), command=command if command is not None else GaitCommand()
    )


def phase_advance(phase: float, freq: float, dt: float, timing_adjust: float = 0.0) -> float:
    if not freq > 0.0:
        raise InvalidArgumentError(f"freq must be > 0, got {freq}")
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be > 0, got {dt}")
    return wrap_angle(phase + TAU * freq * dt + timing_adjust * dt)


def open_loop_waveform(phase: float, cmd: GaitCommand, config: GaitConfig) -> AbstractPose:
    """Pure CPG pose at the given phase; no feedback anywhere."""
    pose = AbstractPose()
    for leg, lp in ((pose.left_leg, phase), (pose.right_leg, wrap_angle(phase - math.pi))):
        c, s = math.cos(lp), math.sin(lp)
        leg.extension = config.eta0 + config.a_step * max(0.0, s)
        leg.leg_angle_y = -config.a_sag * cmd.vx * c
        leg.leg_angle_x = config.a_lat * cmd.vy * c + config.a_sway * math.sin(phase)
        leg.leg_angle_z = config.a_rot * cmd.wz * c
    for arm, lp in ((pose.left_arm, phase), (pose.right_arm, wrap_angle(phase - math.pi))):
        arm.extension = config.eta0
        arm.arm_angle_y = config.a_arm * cmd.vx * math.cos(lp)
    return pose


def _deadbanded(dev: float, band: float) -> float:
    return dev if abs(dev) >= band else 0.0


def _saturate(value: float, bound: float) -> float:
    if value > bound:
        return bound
    if value < -bound:
        return -bound
    return value


def feedback_corrections(
    dev_pitch: float,
    dev_roll: float,
    rate_pitch: float,
    rate_roll: float,
    phase: float,
    config: GaitConfig,
) -> CorrectiveActions:
    """PD channel outputs for the given deviations.

    Deviations inside the deadband count as zero, including for the D term,
    so a quiet robot gets exact zeros.  The timing channel slows the phase
    (down to a freeze, never backwards) while the roll deviation points
    toward the swing leg, i.e. the weight has not shifted onto the support
    leg yet.
    """
    dp = _deadbanded(dev_pitch, config.deadband)
    dr = _deadbanded(dev_roll, config.deadband)
    rp = rate_pitch if dp != 0.0 else 0.0
    rr = rate_roll if dr != 0.0 else 0.0

    values = {}
    for name in CHANNELS:
        g = config.channels[name]
        dev, rate = (dp, rp) if _CHANNEL_AXIS[name] == "pitch" else (dr, rr)
        if dev == 0.0 and rate == 0.0:
            values[name] = 0.0
        else:
            values[name] = _saturate(g.p * dev + g.d * rate, g.sat)

    timing = 0.0
    if dr != 0.0:
        swing_sign = 1.0 if math.sin(phase) > 0.0 else -1.0  # +1: left leg swings
        if math.copysign(1.0, dr) == swing_sign:
            slow = min(1.0, config.timing_gain * abs(dr))
            timing = -TAU * config.freq * slow

    return CorrectiveActions(
        arm_y=values["arm"],
        hip_y=values["hipY"],
        hip_x=values["hipX"],
        foot_y=values["footY"],
        foot_x=values["footX"],
        foot_height=values["footHeight"],
        timing_adjust=timing,
    )


def halt_pose(config: GaitConfig) -> AbstractPose:
    """Crouched standing pose used while walking is off."""
    pose = AbstractPose()
    for leg in (pose.left_leg, pose.right_leg):
        leg.extension = config.eta0
    for arm in (pose.left_arm, pose.right_arm):
        arm.extension = config.eta0
    return pose


def _slew_command(current: GaitCommand, target: GaitCommand, dt: float, rate: float) -> GaitCommand:
    def step(cur, tgt):
        lim = rate * dt
        return cur + min(lim, max(-lim, tgt - cur))

    return GaitCommand(
        vx=step(current.vx, target.vx),
        vy=step(current.vy, target.vy),
        wz=step(current.wz, target.wz),
        walk=target.walk,
    )


def open_loop_joint_targets(
    phase: float, cmd: GaitCommand, model: RobotModel, config: GaitConfig
) -> np.ndarray:
    """Joint targets of the pure open-loop pipeline (no feedback stage)."""
    pose = open_loop_waveform(phase, cmd, config)
    q, _ = clamp_to_limits(model, abstract_to_joint(pose, model))
    return q


def _apply_foot_height(
    q: np.ndarray, model: RobotModel, phase: float, foot_height: float
) -> Tuple[np.ndarray, bool]:
    """Raise/lower the swing foot in trunk coordinates via leg IK.

    The offset is signed +left/-right so the lateral geometry mirrors
    cleanly.  If the raised target leaves the reachable sphere the offset
    is halved until it fits; the fallback flag reports that.
    """
    side = "l" if math.sin(phase) > 0.0 else "r"
    sign = 1.0 if side == "l" else -1.0
    dz = sign * foot_height
    fk = forward_kinematics(model, q)
    foot = fk[f"{side}_ankle_roll"]
    fallback = False
    for _ in range(8):
        target = (foot.position[0], foot.position[1], foot.position[2] + dz)
        try:
            sol = leg_inverse_kinematics(model, side, target, foot.orientation)
        except UnreachableError:
            dz *= 0.5
            fallback = True
            continue
        return apply_leg_solution(q, model, sol), fallback
    return q, True


def gait_tick(
    state: GaitState,
    cmd: GaitCommand,
    fused: FusedAngles,
    model: RobotModel,
    dt: float,
    config: GaitConfig,
) -> Tuple[GaitState, np.ndarray]:
    """One control tick: (new state, joint targets within limits)."""
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")

    smoothed = _slew_command(state.command, cmd, dt, config.slew)

    if not smoothed.walk:
        q, _ = clamp_to_limits(model, abstract_to_joint(halt_pose(config), model))
        return replace(state, command=smoothed, ik_fallback=False), q

    dev_p = fused.fused_pitch - config.expected_pitch
    dev_r = fused.fused_roll - config.expected_roll
    alpha = math.exp(-dt / _RATE_FILTER_TC)
    rate_p = alpha * state.dev_rate[0] + (1.0 - alpha) * (dev_p - state.prev_dev[0]) / dt
    rate_r = alpha * state.dev_rate[1] + (1.0 - alpha) * (dev_r - state.prev_dev[1]) / dt

    actions = feedback_corrections(dev_p, dev_r, rate_p, rate_r, state.phase, config)

    phase = phase_advance(state.phase, config.freq, dt, actions.timing_adjust)
    pose = open_loop_waveform(phase, smoothed, config)

    fallback = False
    if actions.all_zero():
        q, _ = clamp_to_limits(model, abstract_to_joint(pose, model))
    else:
        for leg in (pose.left_leg, pose.right_leg):
            leg.leg_angle_y += actions.hip_y
            leg.leg_angle_x += actions.hip_x
            leg.foot_angle_y += actions.foot_y
            leg.foot_angle_x += actions.foot_x
        for arm in (pose.left_arm, pose.right_arm):
            arm.arm_angle_y += actions.arm_y
        q = abstract_to_joint(pose, model)
        if actions.foot_height != 0.0:
            q, fallback = _apply_foot_height(q, model, phase, actions.foot_height)
        q, _ = clamp_to_limits(model, q)

    new_state = GaitState(
        phase=phase,
        command=smoothed,
        prev_dev=(dev_p, dev_r),
        dev_rate=(rate_p, rate_r),
        support_leg="right" if math.sin(phase) > 0.0 else "left",
        ik_fallback=fallback,
    )
    return new_state, q
