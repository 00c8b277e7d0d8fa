"""Pose spaces and conversions: joint angles, abstract limb pose, leg IK.

Three views of the same robot configuration:

* joint space — flat array of the 20 joint angles in canonical order;
* abstract space — per-limb (extension, limb angles, foot angles), the
  currency of the gait: extension 0 is a straight limb, 1 fully folded,
  and the limb angles give the pitch/roll/yaw of the hip-to-ankle axis
  regardless of how bent the knee is;
* inverse space — per-limb end-effector transform relative to the trunk.

Leg pitch joints rotate about +y, rolls about +x, yaws about +z.  The knee
folds on the knee-forward branch only (knee angle >= 0); with extension e
the knee angle is k = 2*acos(1 - e), the thigh leads the leg axis by k/2
and the shank trails it by k/2, so hip pitch = legAngleY - k/2 and ankle
pitch = footAngleY - legAngleY - k/2, making the pitch chain sum to
footAngleY exactly (flat foot at zero abstract pose).  Elbows fold the
opposite way (elbow = -2*acos(1 - e)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np

from .errors import InvalidArgumentError, UnreachableError
from .model import RobotModel
from .orientation import RotationQuat, wrap_angle

Vec3 = Tuple[float, float, float]


@dataclass(frozen=True)
class Transform:
    """Pose of a link frame relative to the trunk."""

    position: Vec3
    orientation: RotationQuat

    def point(self, local) -> Vec3:
        px, py, pz = self.orientation.rotate(local)
        return (self.position[0] + px, self.position[1] + py, self.position[2] + pz)


@dataclass
class LegAbstract:
    extension: float = 0.0
    leg_angle_x: float = 0.0
    leg_angle_y: float = 0.0
    leg_angle_z: float = 0.0
    foot_angle_x: float = 0.0
    foot_angle_y: float = 0.0


@dataclass
class ArmAbstract:
    extension: float = 0.0
    arm_angle_x: float = 0.0
    arm_angle_y: float = 0.0


@dataclass
class AbstractPose:
    left_leg: LegAbstract = field(default_factory=LegAbstract)
    right_leg: LegAbstract = field(default_factory=LegAbstract)
    left_arm: ArmAbstract = field(default_factory=ArmAbstract)
    right_arm: ArmAbstract = field(default_factory=ArmAbstract)


def zero_pose(model: RobotModel) -> np.ndarray:
    return np.zeros(model.dof)


def clamp_to_limits(model: RobotModel, q: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Clamp joints into their limits; second value reports whether any moved."""
    lim = model.joint_limits()
    clamped = np.clip(q, lim[:, 0], lim[:, 1])
    return clamped, bool(np.any(clamped != q))


def forward_kinematics(model: RobotModel, q: np.ndarray) -> Dict[str, Transform]:
    """Pose of every link frame in trunk coordinates."""
    q = np.asarray(q, dtype=float)
    if q.shape != (model.dof,):
        raise InvalidArgumentError(f"expected {model.dof} joint angles, got shape {q.shape}")
    out: Dict[str, Transform] = {}
    poses = []
    for i, link in enumerate(model.links):
        if link.parent is None:
            t = Transform((0.0, 0.0, 0.0), RotationQuat.identity())
        else:
            pp, pq = poses[model.parent_index[i]]
            ox, oy, oz = pq.rotate(link.origin)
            pos = (pp[0] + ox, pp[1] + oy, pp[2] + oz)
            if link.axis is None:
                rot = pq
            else:
                rot = pq.multiply(
                    RotationQuat.from_axis_angle(link.axis, float(q[model.joint_index[link.name]]))
                )
            t = Transform(pos, rot)
        poses.append((t.position, t.orientation))
        out[link.name] = t
    return out


def _fold_angle(extension: float, which: str) -> float:
    if not 0.0 <= extension <= 1.0:
        raise InvalidArgumentError(f"{which} extension {extension} outside [0, 1]")
    return 2.0 * math.acos(1.0 - extension)


def abstract_to_joint(pose: AbstractPose, model: RobotModel) -> np.ndarray:
    """Joint angles realizing an abstract pose (head joints zero)."""
    q = np.zeros(model.dof)
    ji = model.joint_index
    for side, leg in (("l", pose.left_leg), ("r", pose.right_leg)):
        k = _fold_angle(leg.extension, f"{side} leg")
        q[ji[f"{side}_hip_yaw"]] = leg.leg_angle_z
        q[ji[f"{side}_hip_roll"]] = leg.leg_angle_x
        q[ji[f"{side}_hip_pitch"]] = leg.leg_angle_y - 0.5 * k
        q[ji[f"{side}_knee_pitch"]] = k
        q[ji[f"{side}_ankle_pitch"]] = leg.foot_angle_y - leg.leg_angle_y - 0.5 * k
        q[ji[f"{side}_ankle_roll"]] = leg.foot_angle_x - leg.leg_angle_x
    for side, arm in (("l", pose.left_arm), ("r", pose.right_arm)):
        k = _fold_angle(arm.extension, f"{side} arm")
        q[ji[f"{side}_shoulder_pitch"]] = arm.arm_angle_y + 0.5 * k
        q[ji[f"{side}_shoulder_roll"]] = arm.arm_angle_x
        q[ji[f"{side}_elbow_pitch"]] = -k
    return q


def joint_to_abstract(q: np.ndarray, model: RobotModel) -> AbstractPose:
    """Abstract limb pose of a joint configuration (head ignored)."""
    q = np.asarray(q, dtype=float)
    ji = model.joint_index
    pose = AbstractPose()
    for side, leg in (("l", pose.left_leg), ("r", pose.right_leg)):
        k = float(q[ji[f"{side}_knee_pitch"]])
        if k < -1e-12:
            raise InvalidArgumentError(f"{side} knee {k} hyperextended (< 0)")
        if k > math.pi + 1e-12:
            raise InvalidArgumentError(f"{side} knee {k} beyond full fold (> pi)")
        k = min(max(k, 0.0), math.pi)
        leg.extension = 1.0 - math.cos(0.5 * k)
        leg.leg_angle_z = float(q[ji[f"{side}_hip_yaw"]])
        leg.leg_angle_x = float(q[ji[f"{side}_hip_roll"]])
        leg.leg_angle_y = float(q[ji[f"{side}_hip_pitch"]]) + 0.5 * k
        leg.foot_angle_y = float(q[ji[f"{side}_ankle_pitch"]]) + leg.leg_angle_y + 0.5 * k
        leg.foot_angle_x = float(q[ji[f"{side}_ankle_roll"]]) + leg.leg_angle_x
    for side, arm in (("l", pose.left_arm), ("r", pose.right_arm)):
        e = float(q[ji[f"{side}_elbow_pitch"]])
        if e > 1e-12:
            raise InvalidArgumentError(f"{side} elbow {e} hyperextended (> 0)")
        if e < -math.pi - 1e-12:
            raise InvalidArgumentError(f"{side} elbow {e} beyond full fold (< -pi)")
        k = min(max(-e, 0.0), math.pi)
        arm.extension = 1.0 - math.cos(0.5 * k)
        arm.arm_angle_y = float(q[ji[f"{side}_shoulder_pitch"]]) - 0.5 * k
        arm.arm_angle_x = float(q[ji[f"{side}_shoulder_roll"]])
    return pose


def _rot_matrix(q: RotationQuat) -> np.ndarray:
    return np.array(q.to_matrix())


def leg_inverse_kinematics(
    model: RobotModel,
    side: str,
    position,
    orientation: RotationQuat,
) -> Dict[str, float]:
    """Closed-form 6-DOF leg IK.

    ``position``/``orientation`` give the foot frame (origin at the ankle
    joint centre) in trunk coordinates.  Returns the six joint angles by
    name.  Raises :class:`UnreachableError` when the ankle target lies
    outside the thigh+shank sphere; the straight-knee singularity itself
    is fine (no iteration involved).
    """
    if side not in ("l", "r"):
        raise InvalidArgumentError(f"side must be 'l' or 'r', got {side!r}")
    lt, ls, _ = model.leg_segments(side)
    hip = np.array(model.hip_offset(side))
    target = np.asarray(position, dtype=float)
    u = target - hip
    d = float(np.linalg.norm(u))
    if d > lt + ls:
        raise UnreachableError(
            f"{side} leg target {d:.6f} m from hip exceeds reach {lt + ls:.6f} m",
            excess=d - (lt + ls),
        )
    if d < abs(lt - ls):
        raise UnreachableError(
            f"{side} leg target {d:.6f} m from hip inside inner workspace bound",
            excess=abs(lt - ls) - d,
        )

    cos_k = (d * d - lt * lt - ls * ls) / (2.0 * lt * ls)
    knee = math.acos(min(1.0, max(-1.0, cos_k)))

    rf = _rot_matrix(orientation)
    w = rf.T @ (hip - target)  # hip seen from the foot frame
    ankle_roll = math.atan2(w[1], w[2])
    wz = math.hypot(w[1], w[2])
    # Rotate (w_x, wz) onto the in-plane hip direction (-lt*sin k, ls + lt*cos k).
    hx = -lt * math.sin(knee)
    hz = ls + lt * math.cos(knee)
    ankle_pitch = wrap_angle(math.atan2(hx, hz) - math.atan2(w[0], wz))

    cr, sr = math.cos(ankle_roll), math.sin(ankle_roll)
    cp, sp = math.cos(ankle_pitch + knee), math.sin(ankle_pitch + knee)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, sr], [0.0, -sr, cr]])  # Rx(-ankle_roll)
    ry = np.array([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]])  # Ry(-(ankle_pitch+knee))
    m = rf @ rx @ ry  # = Rz(hip_yaw) Rx(hip_roll) Ry(hip_pitch)
    hip_roll = math.asin(min(1.0, max(-1.0, m[2, 1])))
    hip_yaw = math.atan2(-m[0, 1], m[1, 1])
    hip_pitch = math.atan2(-m[2, 0], m[2, 2])

    return {
        f"{side}_hip_yaw": hip_yaw,
        f"{side}_hip_roll": hip_roll,
        f"{side}_hip_pitch": hip_pitch,
        f"{side}_knee_pitch": knee,
        f"{side}_ankle_pitch": ankle_pitch,
        f"{side}_ankle_roll": ankle_roll,
    }


def apply_leg_solution(q: np.ndarray, model: RobotModel, solution: Dict[str, float]) -> np.ndarray:
    out = np.array(q, dtype=float)
    for name, angle in solution.items():
        out[model.joint_index[name]] = angle
    return out


def limb_transforms(model: RobotModel, q: np.ndarray) -> Dict[str, Transform]:
    """End-effector transforms per limb (foot frames, hand frames)."""
    fk = forward_kinematics(model, q)
    return {
        "left_leg": fk["l_ankle_roll"],
        "right_leg": fk["r_ankle_roll"],
        "left_arm": fk["l_hand"],
        "right_arm": fk["r_hand"],
    }


_MIRROR_EXCHANGE = [("l_", "r_")]


def mirror_joint_pose(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Reflect a pose across the sagittal plane.

    Swaps left/right joints and negates every roll (x axis) and yaw
    (z axis) angle; pitch joints are preserved.
    """
    out = np.empty_like(np.asarray(q, dtype=float))
    for name in model.joint_names:
        if name.startswith("l_"):
            src = "r_" + name[2:]
        elif name.startswith("r_"):
            src = "l_" + name[2:]
        else:
            src = name
        axis = model.link(name).axis
        sign = -1.0 if abs(axis[0]) > 0.5 or abs(axis[2]) > 0.5 else 1.0
        out[model.joint_index[name]] = sign * q[model.joint_index[src]]
    return out
