"""Servo abstraction: tick conversion, feed-forward offsets, command packing.

Actuators are position controlled with 4096-tick encoders over a full
revolution.  Feed-forward torque compensation maps an expected holding
torque to a small setpoint offset through a per-joint stiffness constant;
the servo's own position loop then works around the loaded equilibrium.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError, SchemaError
from .model import JOINT_NAMES

TICKS_PER_REV = 4096
RAD_PER_TICK = 2.0 * math.pi / TICKS_PER_REV
HALF_TICK = math.pi / TICKS_PER_REV


@dataclass(frozen=True)
class JointCalibration:
    """Per-joint servo mapping; stiffness in N*m/rad, max_offset in rad."""

    tick_offset: int = 2048
    direction: int = 1
    stiffness: float = 10.0
    max_offset: float = 0.15

    def __post_init__(self):
        if self.direction not in (-1, 1):
            raise InvalidArgumentError(f"direction must be +1 or -1, got {self.direction}")
        if not 0 <= self.tick_offset < TICKS_PER_REV:
            raise InvalidArgumentError(f"tick_offset {self.tick_offset} outside [0, 4095]")
        if not self.stiffness > 0.0:
            raise InvalidArgumentError(f"stiffness must be > 0, got {self.stiffness}")
        if not self.max_offset > 0.0:
            raise InvalidArgumentError(f"max_offset must be > 0, got {self.max_offset}")


@dataclass(frozen=True)
class ServoCommand:
    joint: str
    target_ticks: int
    effort: float


class ServoCalibration:
    """Calibration records for all 20 joints, keyed by joint name."""

    def __init__(self, joints: Dict[str, JointCalibration]):
        missing = [n for n in JOINT_NAMES if n not in joints]
        if missing:
            raise SchemaError(f"calibration missing joints: {missing}")
        unknown = [n for n in joints if n not in JOINT_NAMES]
        if unknown:
            raise SchemaError(f"calibration has unknown joints: {unknown}")
        self.joints = dict(joints)

    def __getitem__(self, name: str) -> JointCalibration:
        return self.joints[name]

    @staticmethod
    def identity() -> "ServoCalibration":
        return ServoCalibration({n: JointCalibration() for n in JOINT_NAMES})

    @staticmethod
    def from_dict(doc: dict) -> "ServoCalibration":
        if not isinstance(doc, dict):
            raise SchemaError("servo calibration must be an object")
        joints = {}
        for name, rec in doc.items():
            if not isinstance(rec, dict):
                raise SchemaError(f"record must be an object", path=f"servos.{name}")
            allowed = {"tick_offset", "direction", "stiffness", "max_offset", "note"}
            for k in rec:
                if k not in allowed:
                    raise SchemaError(f"unknown field {k!r}", path=f"servos.{name}")
            try:
                joints[name] = JointCalibration(
                    tick_offset=int(rec.get("tick_offset", 2048)),
                    direction=int(rec.get("direction", 1)),
                    stiffness=float(rec.get("stiffness", 10.0)),
                    max_offset=float(rec.get("max_offset", 0.15)),
                )
            except InvalidArgumentError as e:
                raise SchemaError(str(e), path=f"servos.{name}") from None
        return ServoCalibration(joints)

    def to_dict(self) -> dict:
        return {
            name: {
                "tick_offset": jc.tick_offset,
                "direction": jc.direction,
                "stiffness": jc.stiffness,
                "max_offset": jc.max_offset,
            }
            for name, jc in self.joints.items()
        }


def angle_to_ticks(angle: float, cal: JointCalibration) -> int:
    """Encoder target for a joint angle, clamped into [0, 4095]."""
    if not math.isfinite(angle):
        raise InvalidArgumentError(f"angle must be finite, got {angle}")
    raw = round(cal.tick_offset + cal.direction * angle / RAD_PER_TICK)
    return min(TICKS_PER_REV - 1, max(0, int(raw)))


def ticks_to_angle(ticks: int, cal: JointCalibration) -> float:
    return cal.direction * (int(ticks) - cal.tick_offset) * RAD_PER_TICK


def feedforward_offsets(
    torques: Sequence[float], cal: ServoCalibration
) -> np.ndarray:
    """Setpoint offsets (rad) compensating the given joint torques."""
    torques = np.asarray(torques, dtype=float)
    if torques.shape != (len(JOINT_NAMES),):
        raise InvalidArgumentError(f"expected {len(JOINT_NAMES)} torques")
    if not np.all(np.isfinite(torques)):
        raise InvalidArgumentError("torques must be finite")
    out = np.empty_like(torques)
    for i, name in enumerate(JOINT_NAMES):
        jc = cal[name]
        out[i] = min(jc.max_offset, max(-jc.max_offset, torques[i] / jc.stiffness))
    return out


def package_commands(
    positions: Sequence[float],
    offsets: Sequence[float],
    efforts: Sequence[float],
    cal: ServoCalibration,
) -> Tuple[List[ServoCommand], List[str]]:
    """Tick commands for all joints; second value lists clamped joints."""
    positions = np.asarray(positions, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    efforts = np.asarray(efforts, dtype=float)
    n = len(JOINT_NAMES)
    if positions.shape != (n,) or offsets.shape != (n,) or efforts.shape != (n,):
        raise InvalidArgumentError("positions, offsets, efforts must have one value per joint")
    commands: List[ServoCommand] = []
    clamped: List[str] = []
    for i, name in enumerate(JOINT_NAMES):
        jc = cal[name]
        target = float(positions[i] + offsets[i])
        raw = round(jc.tick_offset + jc.direction * target / RAD_PER_TICK)
        ticks = min(TICKS_PER_REV - 1, max(0, int(raw)))
        if ticks != raw:
            clamped.append(name)
        effort = min(1.0, max(0.0, float(efforts[i])))
        commands.append(ServoCommand(name, ticks, effort))
    return commands, clamped


def write_command_log(path, rows: Iterable[Tuple[float, ServoCommand, float]]) -> None:
    """CSV log of issued commands: t,joint,target_ticks,offset_rad,effort."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "joint", "target_ticks", "offset_rad", "effort"])
        for t, cmd, offset in rows:
            w.writerow([repr(float(t)), cmd.joint, cmd.target_ticks, repr(float(offset)), repr(float(cmd.effort))])
