import json
import math
import random

import numpy as np
import pytest

from hop.dynamics import gravity_torques, inverse_dynamics, kinetic_energy
from hop.errors import InvalidArgumentError
from hop.kinematics import forward_kinematics, zero_pose
from hop.model import load_default_model, parse_model

G = 9.81

# double pendulum parameters, embedded in the leg pitch chain
M1, LC1, I1 = 0.65, 0.08, 0.002
M2, LC2, I2 = 0.50, 0.12, 0.0015
L1 = 0.2  # hip-to-knee distance fixed by the model geometry


@pytest.fixture(scope="module")
def model():
    return load_default_model()


@pytest.fixture(scope="module")
def pendulum_model():
    """Real link tree with all mass stripped except the left thigh and shank.

    Driving only the two leg pitch joints then makes the exact closed-form
    planar double pendulum, which the recursion must reproduce.
    """
    doc = json.load(open("src/hop/data/model.json"))
    for link in doc["links"]:
        link["mass"] = 0.0
        link["com"] = [0.0, 0.0, 0.0]
        link["inertia"] = [0.0] * 6
    by_name = {l["name"]: l for l in doc["links"]}
    by_name["l_hip_pitch"].update(mass=M1, com=[0.0, 0.0, -LC1], inertia=[0, I1, 0, 0, 0, 0])
    by_name["l_knee_pitch"].update(mass=M2, com=[0.0, 0.0, -LC2], inertia=[0, I2, 0, 0, 0, 0])
    assert by_name["l_knee_pitch"]["origin"] == [0.0, 0.0, -L1]
    return parse_model(doc)


def pendulum_reference(t1, t2, dt1, dt2, ddt1, ddt2):
    """Closed-form torques; angles measured from hanging, relative elbow."""
    c2, s2 = math.cos(t2), math.sin(t2)
    m11 = M1 * LC1 ** 2 + I1 + I2 + M2 * (L1 ** 2 + LC2 ** 2 + 2 * L1 * LC2 * c2)
    m12 = M2 * (LC2 ** 2 + L1 * LC2 * c2) + I2
    m22 = M2 * LC2 ** 2 + I2
    h = M2 * L1 * LC2 * s2
    g1 = (M1 * LC1 + M2 * L1) * G * math.sin(t1) + M2 * LC2 * G * math.sin(t1 + t2)
    g2 = M2 * LC2 * G * math.sin(t1 + t2)
    tau1 = m11 * ddt1 + m12 * ddt2 - h * (2 * dt1 * dt2 + dt2 * dt2) + g1
    tau2 = m12 * ddt1 + m22 * ddt2 + h * dt1 * dt1 + g2
    return tau1, tau2


def test_matches_double_pendulum_closed_form(pendulum_model):
    m = pendulum_model
    ji = m.joint_index
    hip, knee = ji["l_hip_pitch"], ji["l_knee_pitch"]
    rng = random.Random(42)
    worst = 0.0
    for _ in range(1000):
        q = np.zeros(m.dof)
        qd = np.zeros(m.dof)
        qdd = np.zeros(m.dof)
        q[hip], q[knee] = rng.uniform(-math.pi, math.pi), rng.uniform(-2.5, 2.5)
        qd[hip], qd[knee] = rng.uniform(-8, 8), rng.uniform(-8, 8)
        qdd[hip], qdd[knee] = rng.uniform(-40, 40), rng.uniform(-40, 40)
        tau = inverse_dynamics(m, q, qd, qdd)
        # pendulum angles are measured the other way around the y axis
        ref1, ref2 = pendulum_reference(
            -q[hip], -q[knee], -qd[hip], -qd[knee], -qdd[hip], -qdd[knee]
        )
        worst = max(worst, abs(tau[hip] + ref1), abs(tau[knee] + ref2))
    assert worst < 1e-6


def test_pendulum_distal_joints_unloaded(pendulum_model):
    m = pendulum_model
    q = np.zeros(m.dof)
    q[m.joint_index["l_hip_pitch"]] = 0.7
    q[m.joint_index["l_knee_pitch"]] = 1.1
    tau = gravity_torques(m, q)
    assert abs(tau[m.joint_index["l_ankle_pitch"]]) < 1e-12
    assert abs(tau[m.joint_index["r_hip_pitch"]]) < 1e-12
    assert abs(tau[m.joint_index["neck_yaw"]]) < 1e-12


def subtree_indices(model, root_index):
    out = set()
    for i in range(len(model.links)):
        j = i
        while j != -1:
            if j == root_index:
                out.add(i)
                break
            j = model.parent_index[j]
    return out


def test_static_torques_match_world_frame_moments(model):
    # Independent oracle: world-frame moment of each subtree's weight about
    # the joint pivot, projected on the world joint axis.
    rng = random.Random(9)
    lim = model.joint_limits()
    for _ in range(25):
        q = np.array([rng.uniform(lo, hi) for lo, hi in lim])
        fk = forward_kinematics(model, q)
        tau = gravity_torques(model, q)
        for name in model.joint_names:
            li = model.link_index[name]
            pivot = np.array(fk[name].position)
            axis_w = np.array(fk[name].orientation.rotate(model.link(name).axis))
            total = np.zeros(3)
            for i in subtree_indices(model, li):
                link = model.links[i]
                if link.mass == 0.0:
                    continue
                com_w = np.array(fk[link.name].point(link.com))
                total += np.cross(com_w - pivot, np.array([0.0, 0.0, G * link.mass]))
            assert abs(tau[model.joint_index[name]] - float(axis_w @ total)) < 1e-9, name


def _trajectory(model, t):
    n = model.dof
    i = np.arange(n)
    amp = 0.4 + 0.02 * i
    om = 1.0 + 0.13 * i
    ph = 0.37 * i
    q = amp * np.sin(om * t + ph)
    qd = amp * om * np.cos(om * t + ph)
    qdd = -amp * om * om * np.sin(om * t + ph)
    return q, qd, qdd


def potential_energy(model, q):
    fk = forward_kinematics(model, q)
    return sum(
        link.mass * G * fk[link.name].point(link.com)[2]
        for link in model.links
        if link.mass > 0.0
    )


def test_power_balance_along_trajectory(model):
    # Joint power must equal the rate of change of total mechanical energy.
    h = 1e-5
    for t in np.linspace(0.3, 2.7, 9):
        q, qd, qdd = _trajectory(model, t)
        tau = inverse_dynamics(model, q, qd, qdd)
        power = float(tau @ qd)
        energies = []
        for tt in (t - h, t + h):
            qq, qqd, _ = _trajectory(model, tt)
            energies.append(kinetic_energy(model, qq, qqd) + potential_energy(model, qq))
        dedt = (energies[1] - energies[0]) / (2 * h)
        assert abs(power - dedt) <= 1e-3 * max(1.0, abs(power))


def test_kinetic_energy_matches_finite_difference_motion(model):
    # KE recomputed purely from world-frame finite differences of link poses.
    t = 1.234
    h = 1e-6
    q, qd, _ = _trajectory(model, t)
    qm, _, _ = _trajectory(model, t - h)
    qp, _, _ = _trajectory(model, t + h)
    fkm = forward_kinematics(model, qm)
    fkp = forward_kinematics(model, qp)
    fk = forward_kinematics(model, q)
    total = 0.0
    for link in model.links:
        if link.mass == 0.0 and all(v == 0.0 for v in link.inertia):
            continue
        cm = np.array(fkm[link.name].point(link.com))
        cp = np.array(fkp[link.name].point(link.com))
        v = (cp - cm) / (2 * h)
        qa, qb = fkm[link.name].orientation, fkp[link.name].orientation
        dq = qb.multiply(qa.inverse())  # small world-frame rotation over 2h
        ang = 2.0 * math.atan2(math.sqrt(dq.x ** 2 + dq.y ** 2 + dq.z ** 2), dq.w)
        if ang > 1e-30:
            axis = np.array([dq.x, dq.y, dq.z]) / math.sqrt(
                dq.x ** 2 + dq.y ** 2 + dq.z ** 2
            )
        else:
            axis = np.zeros(3)
        w_world = axis * (ang / (2 * h))
        r = np.array(fk[link.name].orientation.to_matrix())
        w_local = r.T @ w_world
        total += 0.5 * link.mass * float(v @ v)
        total += 0.5 * float(w_local @ (link.inertia_matrix() @ w_local))
    ke = kinetic_energy(model, q, qd)
    assert ke == pytest.approx(total, rel=1e-5)


def test_zero_motion_zero_gravity_is_torque_free(model):
    q = zero_pose(model)
    tau = inverse_dynamics(model, q, q, q, gravity=(0.0, 0.0, 0.0))
    assert np.all(np.abs(tau) < 1e-15)


def test_shape_validation(model):
    with pytest.raises(InvalidArgumentError):
        inverse_dynamics(model, np.zeros(3), np.zeros(20), np.zeros(20))
