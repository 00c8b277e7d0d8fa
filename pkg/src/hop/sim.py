"""Deterministic desk-scale simulator closing the loop around the stack.

There is no contact or balance physics here: the trunk orientation truth is
a script (smooth pulse disturbances on pitch and roll), because the
feedback paths under test are input-to-output behaviours.  Joints follow a
first-order lag toward their commanded targets, the IMU is synthesized
from the scripted truth with seeded Gaussian noise, and a scenario run
ticks estimator, controller, servo layer and plant in sequence, logging a
CSV row per tick.  Identical scenario and seed give byte-identical logs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import HopError, InvalidArgumentError, SchemaError
from .estimator import (
    GRAVITY,
    FilterConfig,
    FilterState,
    ImuSample,
    estimate_fused,
    filter_init,
    filter_update,
)
from .gait import GaitCommand, GaitConfig, gait_init, gait_tick
from .kinematics import abstract_to_joint, clamp_to_limits
from .model import JOINT_NAMES, RobotModel
from .motions import Motion, play_init, play_tick
from .orientation import FusedAngles, RotationQuat, quat_from_fused
from .servo import ServoCalibration, ServoCommand, package_commands, ticks_to_angle

SERVO_TIME_CONSTANT = 0.06  # s, first-order lag at effort 1
RNG_KIND = "numpy-pcg64"
LOG_HEADER = (
    "t,truth_pitch,truth_roll,est_pitch,est_roll,phase,"
    + ",".join(f"target_{n}" for n in JOINT_NAMES)
    + ","
    + ",".join(f"actual_{n}" for n in JOINT_NAMES)
)


@dataclass(frozen=True)
class ImuNoiseConfig:
    """Sensor noise magnitudes; gyro density converts to per-sample sigma."""

    gyro_noise_density: float = 0.002  # rad/s/sqrt(Hz)
    gyro_bias: float = 0.02  # rad/s, per-axis scale of the seeded bias draw
    accel_noise: float = 0.05  # m/s^2 per sample
    mag_noise: float = 0.01  # per sample

    def __post_init__(self):
        for name in ("gyro_noise_density", "gyro_bias", "accel_noise", "mag_noise"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise InvalidArgumentError(f"{name} must be >= 0, got {v}")

    def to_dict(self) -> dict:
        return {
            "gyro_noise_density": self.gyro_noise_density,
            "gyro_bias": self.gyro_bias,
            "accel_noise": self.accel_noise,
            "mag_noise": self.mag_noise,
        }

    @staticmethod
    def from_dict(doc: dict) -> "ImuNoiseConfig":
        if not isinstance(doc, dict):
            raise SchemaError("noise must be an object", path="scenario.noise")
        allowed = {"gyro_noise_density", "gyro_bias", "accel_noise", "mag_noise"}
        extra = set(doc) - allowed
        if extra:
            raise SchemaError(f"unknown keys {sorted(extra)}", path="scenario.noise")
        kwargs = {}
        for k, v in doc.items():
            try:
                kwargs[k] = float(v)
            except (TypeError, ValueError):
                raise SchemaError("expected a number", path=f"scenario.noise.{k}") from None
        try:
            return ImuNoiseConfig(**kwargs)
        except InvalidArgumentError as e:
            raise SchemaError(str(e), path="scenario.noise") from None


@dataclass(frozen=True)
class Disturbance:
    """One smooth orientation pulse: amplitude/2 * (1 - cos) over [t, t+width]."""

    t: float
    axis: str  # "pitch" or "roll"
    amplitude: float
    width: float

    def __post_init__(self):
        if self.axis not in ("pitch", "roll"):
            raise InvalidArgumentError(f"axis must be pitch or roll, got {self.axis!r}")
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise InvalidArgumentError("t must be >= 0")
        if not (math.isfinite(self.width) and self.width > 0.0):
            raise InvalidArgumentError("width must be > 0")
        if not math.isfinite(self.amplitude):
            raise InvalidArgumentError("amplitude must be finite")

    def value(self, now: float) -> float:
        if now <= self.t or now >= self.t + self.width:
            return 0.0
        return 0.5 * self.amplitude * (1.0 - math.cos(2.0 * math.pi * (now - self.t) / self.width))


class TruthScript:
    """Scripted trunk orientation truth built from disturbance pulses."""

    def __init__(self, disturbances: Sequence[Disturbance] = ()):
        self.disturbances = tuple(disturbances)

    def fused_at(self, t: float) -> Tuple[float, float]:
        pitch = sum(d.value(t) for d in self.disturbances if d.axis == "pitch")
        roll = sum(d.value(t) for d in self.disturbances if d.axis == "roll")
        return pitch, roll

    def attitude(self, t: float) -> RotationQuat:
        pitch, roll = self.fused_at(t)
        return quat_from_fused(FusedAngles(0.0, pitch, roll, 1))

    def body_rate(self, t: float, h: float = 1e-6) -> Tuple[float, float, float]:
        qa = self.attitude(max(0.0, t - h))
        qb = self.attitude(t + h)
        span = (t + h) - max(0.0, t - h)
        delta = qa.conjugate().multiply(qb)
        return _rotation_vector(delta, 1.0 / span)


def _rotation_vector(q: RotationQuat, scale: float) -> Tuple[float, float, float]:
    w, x, y, z = q.w, q.x, q.y, q.z
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    s = math.sqrt(x * x + y * y + z * z)
    if s < 1e-12:
        return (2.0 * x * scale, 2.0 * y * scale, 2.0 * z * scale)
    angle = 2.0 * math.atan2(s, w)
    k = angle / s * scale
    return (x * k, y * k, z * k)


@dataclass
class SimState:
    """Plant state; the rng advances in place as noise is drawn."""

    q: np.ndarray
    qd: np.ndarray
    attitude: RotationQuat
    rate: Tuple[float, float, float]
    time: float
    rng: np.random.Generator
    gyro_bias: np.ndarray


def sim_init(
    model: RobotModel,
    seed: int,
    noise: Optional[ImuNoiseConfig] = None,
    q0: Optional[np.ndarray] = None,
) -> SimState:
    noise = noise if noise is not None else ImuNoiseConfig()
    rng = np.random.default_rng(seed)
    bias = noise.gyro_bias * rng.standard_normal(3)
    q = np.zeros(model.dof) if q0 is None else np.asarray(q0, dtype=float).copy()
    if q.shape != (model.dof,):
        raise InvalidArgumentError(f"q0 must have shape ({model.dof},)")
    return SimState(
        q=q,
        qd=np.zeros(model.dof),
        attitude=RotationQuat.identity(),
        rate=(0.0, 0.0, 0.0),
        time=0.0,
        rng=rng,
        gyro_bias=bias,
    )


def sim_step(
    state: SimState,
    commands: Sequence[ServoCommand],
    dt: float,
    model: RobotModel,
    script: Optional[TruthScript] = None,
    cal: Optional[ServoCalibration] = None,
) -> SimState:
    """Advance the plant one step under the given servo commands.

    Joints relax toward their decoded targets with time constant
    ``SERVO_TIME_CONSTANT / effort``; zero effort holds position.
    """
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    cal = cal if cal is not None else ServoCalibration.identity()
    q = state.q.copy()
    qd = np.zeros_like(state.qd)
    for cmd in commands:
        idx = model.joint_index[cmd.joint]
        target = ticks_to_angle(cmd.target_ticks, cal.joints[cmd.joint])
        if cmd.effort <= 0.0:
            qd[idx] = 0.0
            continue
        decay = math.exp(-dt * cmd.effort / SERVO_TIME_CONSTANT)
        new = target + (q[idx] - target) * decay
        q[idx] = new
        qd[idx] = (target - new) * cmd.effort / SERVO_TIME_CONSTANT

    now = state.time + dt
    if script is not None:
        attitude = script.attitude(now)
        rate = script.body_rate(now)
    else:
        attitude, rate = state.attitude, state.rate
    return replace(state, q=q, qd=qd, attitude=attitude, rate=rate, time=now)


def synthesize_imu(state: SimState, noise: ImuNoiseConfig, rate_hz: float) -> ImuSample:
    """Sample the IMU from the scripted truth with seeded Gaussian noise."""
    sigma_g = noise.gyro_noise_density * math.sqrt(rate_hz / 2.0)
    ng = state.rng.standard_normal(3)
    na = state.rng.standard_normal(3)
    nm = state.rng.standard_normal(3)
    gyro = (
        state.rate[0] + state.gyro_bias[0] + sigma_g * ng[0],
        state.rate[1] + state.gyro_bias[1] + sigma_g * ng[1],
        state.rate[2] + state.gyro_bias[2] + sigma_g * ng[2],
    )
    ax, ay, az = state.attitude.rotate_back((0.0, 0.0, GRAVITY))
    mx, my, mz = state.attitude.rotate_back((1.0, 0.0, 0.0))
    accel = (
        ax + noise.accel_noise * na[0],
        ay + noise.accel_noise * na[1],
        az + noise.accel_noise * na[2],
    )
    mag = (
        mx + noise.mag_noise * nm[0],
        my + noise.mag_noise * nm[1],
        mz + noise.mag_noise * nm[2],
    )
    return ImuSample(gyro=gyro, accel=accel, mag=mag)


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration: float
    rate: float = 100.0
    controller: str = "gait"
    motion: Optional[str] = None
    command: GaitCommand = field(default_factory=lambda: GaitCommand(walk=True))
    noise: ImuNoiseConfig = field(default_factory=ImuNoiseConfig)
    disturbances: Tuple[Disturbance, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise InvalidArgumentError("scenario name must be non-empty")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise InvalidArgumentError("seed must be a non-negative integer")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise InvalidArgumentError("duration must be > 0")
        if not 10.0 <= self.rate <= 1000.0:
            raise InvalidArgumentError(f"rate must lie in [10, 1000] Hz, got {self.rate}")
        if self.controller not in ("gait", "motion"):
            raise InvalidArgumentError(f"controller must be gait or motion, got {self.controller!r}")
        if self.controller == "motion" and not self.motion:
            raise InvalidArgumentError("motion controller needs a motion name")


def load_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("scenario must be an object")
    allowed = {"name", "seed", "duration", "rate", "controller", "motion", "command", "noise", "disturbances"}
    extra = set(doc) - allowed
    if extra:
        raise SchemaError(f"unknown keys {sorted(extra)}", path="scenario")
    for key in ("name", "seed", "duration"):
        if key not in doc:
            raise SchemaError(f"missing {key}", path="scenario")
    if not isinstance(doc["name"], str):
        raise SchemaError("name must be a string", path="scenario.name")
    if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool):
        raise SchemaError("seed must be an integer", path="scenario.seed")
    kwargs = {"name": doc["name"], "seed": doc["seed"]}
    for key in ("duration", "rate"):
        if key in doc:
            try:
                kwargs[key] = float(doc[key])
            except (TypeError, ValueError):
                raise SchemaError("expected a number", path=f"scenario.{key}") from None
    if "controller" in doc:
        kwargs["controller"] = doc["controller"]
    if "motion" in doc:
        if not isinstance(doc["motion"], str):
            raise SchemaError("motion must be a string", path="scenario.motion")
        kwargs["motion"] = doc["motion"]
    if "command" in doc:
        c = doc["command"]
        if not isinstance(c, dict) or set(c) - {"vx", "vy", "wz", "walk"}:
            raise SchemaError("command must be {vx, vy, wz, walk}", path="scenario.command")
        try:
            kwargs["command"] = GaitCommand(
                vx=float(c.get("vx", 0.0)),
                vy=float(c.get("vy", 0.0)),
                wz=float(c.get("wz", 0.0)),
                walk=bool(c.get("walk", False)),
            )
        except (TypeError, ValueError, InvalidArgumentError):
            raise SchemaError("bad command values", path="scenario.command") from None
    if "noise" in doc:
        kwargs["noise"] = ImuNoiseConfig.from_dict(doc["noise"])
    if "disturbances" in doc:
        raw = doc["disturbances"]
        if not isinstance(raw, list):
            raise SchemaError("disturbances must be a list", path="scenario.disturbances")
        pulses = []
        for i, rec in enumerate(raw):
            where = f"scenario.disturbances[{i}]"
            if not isinstance(rec, dict) or set(rec) != {"t", "axis", "amplitude", "width"}:
                raise SchemaError("pulse must be {t, axis, amplitude, width}", path=where)
            try:
                pulses.append(
                    Disturbance(
                        t=float(rec["t"]),
                        axis=rec["axis"],
                        amplitude=float(rec["amplitude"]),
                        width=float(rec["width"]),
                    )
                )
            except (TypeError, ValueError) as e:
                raise SchemaError(str(e), path=where) from None
            except InvalidArgumentError as e:
                raise SchemaError(str(e), path=where) from None
        kwargs["disturbances"] = tuple(pulses)
    try:
        return Scenario(**kwargs)
    except InvalidArgumentError as e:
        raise SchemaError(str(e), path="scenario") from None


def load_scenario_file(path) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}", path=str(path)) from None
    return load_scenario(doc)


@dataclass(frozen=True)
class SimRun:
    scenario: Scenario
    header: str
    rows: Tuple[str, ...]
    motion_done: bool

    @property
    def text(self) -> str:
        return "".join(
            [
                f"# rng={RNG_KIND} seed={self.scenario.seed} scenario={self.scenario.name}\n",
                self.header + "\n",
            ]
            + [r + "\n" for r in self.rows]
        )


def run_scenario(
    scenario: Scenario,
    model: RobotModel,
    gait_config: Optional[GaitConfig] = None,
    motion: Optional[Motion] = None,
    servo_cal: Optional[ServoCalibration] = None,
    filter_config: Optional[FilterConfig] = None,
) -> SimRun:
    """Tick estimator, controller, servo layer and plant; return the log."""
    if scenario.controller == "motion" and motion is None:
        raise InvalidArgumentError(f"scenario wants motion {scenario.motion!r} but none was given")
    gait_config = gait_config if gait_config is not None else GaitConfig()
    cal = servo_cal if servo_cal is not None else ServoCalibration.identity()
    script = TruthScript(scenario.disturbances)
    dt = 1.0 / scenario.rate
    n = int(round(scenario.duration * scenario.rate))

    sim = sim_init(model, scenario.seed, scenario.noise)
    est = filter_init(filter_config if filter_config is not None else FilterConfig())
    gait = gait_init()
    play = play_init(motion) if motion is not None else None
    zeros = np.zeros(model.dof)
    ones = np.ones(model.dof)

    rows: List[str] = []
    motion_done = False
    for i in range(n):
        # truth at the instant the IMU samples it, before the plant advances
        truth_pitch, truth_roll = script.fused_at(sim.time)
        sample = synthesize_imu(sim, scenario.noise, scenario.rate)
        est = filter_update(est, sample, dt)
        fused = estimate_fused(est)
        try:
            if scenario.controller == "gait":
                gait, targets = gait_tick(gait, scenario.command, fused, model, dt, gait_config)
                phase = gait.phase
            else:
                play, frame, motion_done = play_tick(play, fused, dt)
                targets, _ = clamp_to_limits(model, frame.positions)
                phase = play.t
        except HopError as e:
            raise HopError(f"controller failed at tick {i}: {e}") from e
        commands, _ = package_commands(targets, zeros, ones, cal)
        sim = sim_step(sim, commands, dt, model, script=script, cal=cal)
        cells = [
            repr(float(i * dt)),
            repr(float(truth_pitch)),
            repr(float(truth_roll)),
            repr(float(fused.fused_pitch)),
            repr(float(fused.fused_roll)),
            repr(float(phase)),
        ]
        cells.extend(repr(float(v)) for v in targets)
        cells.extend(repr(float(v)) for v in sim.q)
        rows.append(",".join(cells))

    return SimRun(scenario=scenario, header=LOG_HEADER, rows=tuple(rows), motion_done=motion_done)
