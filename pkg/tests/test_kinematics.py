import math
import random

import numpy as np
import pytest

from hop.errors import InvalidArgumentError, UnreachableError
from hop.kinematics import (
    AbstractPose,
    LegAbstract,
    ArmAbstract,
    abstract_to_joint,
    apply_leg_solution,
    clamp_to_limits,
    forward_kinematics,
    joint_to_abstract,
    leg_inverse_kinematics,
    limb_transforms,
    mirror_joint_pose,
    zero_pose,
)
from hop.model import load_default_model
from hop.orientation import RotationQuat


@pytest.fixture(scope="module")
def model():
    return load_default_model()


def quat_dist(a: RotationQuat, b: RotationQuat) -> float:
    dot = abs(a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z)
    return 2.0 * math.acos(min(1.0, dot))


# ---------------------------------------------------------------- abstract


def test_zero_abstract_is_zero_joints(model):
    q = abstract_to_joint(AbstractPose(), model)
    assert np.all(q == 0.0)


def test_half_radian_fold_example(model):
    # extension chosen so the fold angle is exactly 1 rad
    ext = 1.0 - math.cos(0.5)
    pose = AbstractPose(left_leg=LegAbstract(extension=ext))
    q = abstract_to_joint(pose, model)
    ji = model.joint_index
    assert q[ji["l_knee_pitch"]] == pytest.approx(1.0, abs=1e-12)
    assert q[ji["l_hip_pitch"]] == pytest.approx(-0.5, abs=1e-12)
    assert q[ji["l_ankle_pitch"]] == pytest.approx(-0.5, abs=1e-12)
    assert q[ji["l_hip_roll"]] == 0.0
    assert q[ji["l_ankle_roll"]] == 0.0


def test_right_angle_knee_extension(model):
    q = zero_pose(model)
    ji = model.joint_index
    q[ji["r_knee_pitch"]] = math.pi / 2
    q[ji["r_hip_pitch"]] = -math.pi / 4
    q[ji["r_ankle_pitch"]] = -math.pi / 4
    pose = joint_to_abstract(q, model)
    assert pose.right_leg.extension == pytest.approx(1.0 - math.cos(math.pi / 4), abs=1e-12)
    assert pose.right_leg.leg_angle_y == pytest.approx(0.0, abs=1e-12)
    assert pose.right_leg.foot_angle_y == pytest.approx(0.0, abs=1e-12)


def test_arm_fold_direction(model):
    pose = AbstractPose(left_arm=ArmAbstract(extension=1.0 - math.cos(0.5)))
    q = abstract_to_joint(pose, model)
    ji = model.joint_index
    assert q[ji["l_elbow_pitch"]] == pytest.approx(-1.0, abs=1e-12)
    assert q[ji["l_shoulder_pitch"]] == pytest.approx(0.5, abs=1e-12)


def test_abstract_round_trip_random(model):
    rng = random.Random(7)
    for _ in range(2000):
        pose = AbstractPose(
            left_leg=LegAbstract(
                extension=rng.uniform(0, 1),
                leg_angle_x=rng.uniform(-0.5, 0.5),
                leg_angle_y=rng.uniform(-1, 1),
                leg_angle_z=rng.uniform(-1, 1),
                foot_angle_x=rng.uniform(-0.5, 0.5),
                foot_angle_y=rng.uniform(-1, 1),
            ),
            right_leg=LegAbstract(extension=rng.uniform(0, 1)),
            left_arm=ArmAbstract(
                extension=rng.uniform(0, 1),
                arm_angle_x=rng.uniform(-1, 1),
                arm_angle_y=rng.uniform(-1, 1),
            ),
        )
        q = abstract_to_joint(pose, model)
        back = joint_to_abstract(q, model)
        for limb in ("left_leg", "right_leg"):
            a, b = getattr(pose, limb), getattr(back, limb)
            for f in ("extension", "leg_angle_x", "leg_angle_y", "leg_angle_z", "foot_angle_x", "foot_angle_y"):
                assert abs(getattr(a, f) - getattr(b, f)) < 1e-9, f"{limb}.{f}"
        for limb in ("left_arm", "right_arm"):
            a, b = getattr(pose, limb), getattr(back, limb)
            for f in ("extension", "arm_angle_x", "arm_angle_y"):
                assert abs(getattr(a, f) - getattr(b, f)) < 1e-9, f"{limb}.{f}"


def test_extension_validation(model):
    with pytest.raises(InvalidArgumentError):
        abstract_to_joint(AbstractPose(left_leg=LegAbstract(extension=1.2)), model)
    with pytest.raises(InvalidArgumentError):
        abstract_to_joint(AbstractPose(left_leg=LegAbstract(extension=-0.1)), model)


def test_hyperextension_rejected(model):
    q = zero_pose(model)
    q[model.joint_index["l_knee_pitch"]] = -0.01
    with pytest.raises(InvalidArgumentError):
        joint_to_abstract(q, model)
    q = zero_pose(model)
    q[model.joint_index["r_elbow_pitch"]] = 0.01
    with pytest.raises(InvalidArgumentError):
        joint_to_abstract(q, model)


# ---------------------------------------------------------------- forward


def test_fk_zero_pose_feet(model):
    fk = forward_kinematics(model, zero_pose(model))
    for side, sign in (("l", 1.0), ("r", -1.0)):
        ankle = fk[f"{side}_ankle_roll"]
        assert ankle.position == pytest.approx((0.0, sign * 0.055, -0.4), abs=1e-12)
        assert quat_dist(ankle.orientation, RotationQuat.identity()) < 1e-12
        sole = fk[f"{side}_sole"]
        assert sole.position[2] == pytest.approx(-0.445, abs=1e-12)


def test_fk_flat_foot_for_pure_pitch_abstract(model):
    # Pitch-only abstract poses keep the sole orientation at Ry(foot_angle_y),
    # whatever the extension or leg angle.
    rng = random.Random(3)
    for _ in range(200):
        leg = LegAbstract(
            extension=rng.uniform(0, 0.9),
            leg_angle_y=rng.uniform(-1, 1),
            foot_angle_y=rng.uniform(-0.8, 0.8),
        )
        q = abstract_to_joint(AbstractPose(left_leg=leg), model)
        fk = forward_kinematics(model, q)
        want = RotationQuat.from_axis_angle((0.0, 1.0, 0.0), leg.foot_angle_y)
        assert quat_dist(fk["l_ankle_roll"].orientation, want) < 1e-9


def test_fk_rejects_wrong_shape(model):
    with pytest.raises(InvalidArgumentError):
        forward_kinematics(model, np.zeros(7))


def test_limb_transforms_keys(model):
    lt = limb_transforms(model, zero_pose(model))
    assert set(lt) == {"left_leg", "right_leg", "left_arm", "right_arm"}
    assert lt["left_arm"].position[2] > lt["left_leg"].position[2]


def test_clamp_to_limits(model):
    q = zero_pose(model)
    clamped, changed = clamp_to_limits(model, q)
    assert not changed
    q[model.joint_index["l_knee_pitch"]] = 9.0
    clamped, changed = clamp_to_limits(model, q)
    assert changed
    assert clamped[model.joint_index["l_knee_pitch"]] == pytest.approx(3.15)


# ---------------------------------------------------------------- leg IK


def random_leg_joints(model, rng, side):
    """In-limit leg sample, biased away from the straight-knee singularity."""
    ji = model.joint_index
    q = zero_pose(model)
    q[ji[f"{side}_hip_yaw"]] = rng.uniform(-1.0, 1.0)
    lo, hi = model.link(f"{side}_hip_roll").limits
    q[ji[f"{side}_hip_roll"]] = rng.uniform(lo + 0.05, hi - 0.05)
    q[ji[f"{side}_hip_pitch"]] = rng.uniform(-1.5, 1.5)
    q[ji[f"{side}_knee_pitch"]] = rng.uniform(0.0, 2.8)
    q[ji[f"{side}_ankle_pitch"]] = rng.uniform(-1.5, 1.5)
    q[ji[f"{side}_ankle_roll"]] = rng.uniform(-0.9, 0.9)
    return q


@pytest.mark.parametrize("side", ["l", "r"])
def test_ik_zero_pose(model, side):
    sol = leg_inverse_kinematics(
        model,
        side,
        (0.0, 0.055 if side == "l" else -0.055, -0.4),
        RotationQuat.identity(),
    )
    for name, angle in sol.items():
        assert abs(angle) < 1e-9, name


@pytest.mark.parametrize("side", ["l", "r"])
def test_ik_recovers_fk_pose(model, side):
    rng = random.Random(11 if side == "l" else 12)
    for _ in range(300):
        q = random_leg_joints(model, rng, side)
        fk = forward_kinematics(model, q)
        foot = fk[f"{side}_ankle_roll"]
        sol = leg_inverse_kinematics(model, side, foot.position, foot.orientation)
        q2 = apply_leg_solution(zero_pose(model), model, sol)
        fk2 = forward_kinematics(model, q2)
        foot2 = fk2[f"{side}_ankle_roll"]
        err_p = max(abs(a - b) for a, b in zip(foot.position, foot2.position))
        err_q = quat_dist(foot.orientation, foot2.orientation)
        assert err_p < 1e-6
        assert err_q < 1e-6


@pytest.mark.parametrize("side", ["l", "r"])
def test_ik_exact_joint_recovery_on_moderate_poses(model, side):
    # Away from the alternate Euler branch (hip well above the foot plane)
    # the solver returns the generating joints themselves, not merely an
    # equivalent pose.
    rng = random.Random(21)
    ji = model.joint_index
    for _ in range(300):
        q = zero_pose(model)
        q[ji[f"{side}_hip_yaw"]] = rng.uniform(-0.8, 0.8)
        q[ji[f"{side}_hip_roll"]] = rng.uniform(-0.4, 0.4)
        q[ji[f"{side}_hip_pitch"]] = rng.uniform(-1.0, 0.3)
        q[ji[f"{side}_knee_pitch"]] = rng.uniform(0.2, 1.6)
        q[ji[f"{side}_ankle_pitch"]] = rng.uniform(-0.5, 0.5)
        q[ji[f"{side}_ankle_roll"]] = rng.uniform(-0.5, 0.5)
        fk = forward_kinematics(model, q)
        foot = fk[f"{side}_ankle_roll"]
        sol = leg_inverse_kinematics(model, side, foot.position, foot.orientation)
        for name in sol:
            assert abs(sol[name] - q[ji[name]]) < 1e-9, name


def test_ik_out_of_reach(model):
    with pytest.raises(UnreachableError) as e:
        leg_inverse_kinematics(model, "l", (0.0, 0.055, -0.5), RotationQuat.identity())
    assert e.value.excess == pytest.approx(0.1, abs=1e-9)


def test_ik_rejects_bad_side(model):
    with pytest.raises(InvalidArgumentError):
        leg_inverse_kinematics(model, "left", (0, 0, -0.3), RotationQuat.identity())


def test_ik_straight_knee_exact_reach(model):
    # Exactly at full stretch: no error, knee 0.
    sol = leg_inverse_kinematics(model, "l", (0.0, 0.055, -0.4), RotationQuat.identity())
    assert sol["l_knee_pitch"] == pytest.approx(0.0, abs=1e-6)


# ---------------------------------------------------------------- mirror


def test_mirror_swaps_and_flips(model):
    rng = random.Random(5)
    q = np.array([rng.uniform(-1, 1) for _ in range(model.dof)])
    m = mirror_joint_pose(model, q)
    ji = model.joint_index
    assert m[ji["l_hip_pitch"]] == q[ji["r_hip_pitch"]]
    assert m[ji["r_knee_pitch"]] == q[ji["l_knee_pitch"]]
    assert m[ji["l_hip_roll"]] == -q[ji["r_hip_roll"]]
    assert m[ji["l_hip_yaw"]] == -q[ji["r_hip_yaw"]]
    assert m[ji["neck_yaw"]] == -q[ji["neck_yaw"]]
    assert m[ji["head_pitch"]] == q[ji["head_pitch"]]


def test_mirror_is_involution(model):
    rng = random.Random(6)
    q = np.array([rng.uniform(-1, 1) for _ in range(model.dof)])
    assert np.array_equal(mirror_joint_pose(model, mirror_joint_pose(model, q)), q)


def test_mirror_preserves_fk_geometry(model):
    # Mirrored pose puts the left foot where the right foot was, reflected in y.
    rng = random.Random(8)
    q = random_leg_joints(model, rng, "l")
    fk = forward_kinematics(model, q)
    fkm = forward_kinematics(model, mirror_joint_pose(model, q))
    lp = fk["l_ankle_roll"].position
    rp = fkm["r_ankle_roll"].position
    assert rp[0] == pytest.approx(lp[0], abs=1e-12)
    assert rp[1] == pytest.approx(-lp[1], abs=1e-12)
    assert rp[2] == pytest.approx(lp[2], abs=1e-12)
