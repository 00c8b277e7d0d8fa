"""Recursive Newton-Euler inverse dynamics over the link tree.

The trunk is treated as a fixed base that accelerates at minus gravity,
which loads every link with its weight without special-casing gravity
anywhere else.  All quantities propagate in link-local frames; the result
is the torque each joint must exert to realize (q, qd, qdd).  Cost is
linear in the number of links.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .errors import InvalidArgumentError
from .model import RobotModel
from .orientation import RotationQuat


def _axis_rotation(axis: Tuple[float, float, float], angle: float) -> np.ndarray:
    return np.array(RotationQuat.from_axis_angle(axis, angle).to_matrix())


def inverse_dynamics(
    model: RobotModel,
    q: np.ndarray,
    qd: np.ndarray,
    qdd: np.ndarray,
    gravity=(0.0, 0.0, -9.81),
) -> np.ndarray:
    """Joint torques for the given motion state, N*m, in joint order."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    qdd = np.asarray(qdd, dtype=float)
    n = model.dof
    if q.shape != (n,) or qd.shape != (n,) or qdd.shape != (n,):
        raise InvalidArgumentError("q, qd, qdd must each hold one value per joint")

    nl = len(model.links)
    rot_to_parent = [np.eye(3)] * nl  # R such that v_parent = R @ v_child
    omega = [np.zeros(3)] * nl
    alpha = [np.zeros(3)] * nl
    acc_origin = [np.zeros(3)] * nl
    force = [np.zeros(3)] * nl  # net inertial force at each link COM
    torque_com = [np.zeros(3)] * nl

    g = np.asarray(gravity, dtype=float)

    for i, link in enumerate(model.links):
        if link.parent is None:
            acc_origin[i] = -g  # fixed-base gravity trick
            continue
        p = model.parent_index[i]
        origin = np.asarray(link.origin)
        if link.axis is None:
            r = np.eye(3)
            w = omega[p]
            a = alpha[p]
        else:
            ji = model.joint_index[link.name]
            r = _axis_rotation(link.axis, float(q[ji]))
            ax = np.asarray(link.axis)
            w_parent_local = r.T @ omega[p]
            w = w_parent_local + ax * qd[ji]
            a = r.T @ alpha[p] + ax * qdd[ji] + np.cross(w_parent_local, ax * qd[ji])
        rot_to_parent[i] = r
        omega[i] = w
        alpha[i] = a
        acc_origin[i] = r.T @ (
            acc_origin[p]
            + np.cross(alpha[p], origin)
            + np.cross(omega[p], np.cross(omega[p], origin))
        )
        com = np.asarray(link.com)
        a_com = acc_origin[i] + np.cross(a, com) + np.cross(w, np.cross(w, com))
        force[i] = link.mass * a_com
        inertia = link.inertia_matrix()
        torque_com[i] = inertia @ a + np.cross(w, inertia @ w)

    tau = np.zeros(n)
    f_acc = [np.zeros(3) for _ in range(nl)]
    n_acc = [np.zeros(3) for _ in range(nl)]
    for i in range(nl - 1, 0, -1):
        link = model.links[i]
        com = np.asarray(link.com)
        f_total = force[i] + f_acc[i]
        n_total = torque_com[i] + np.cross(com, force[i]) + n_acc[i]
        if link.axis is not None:
            tau[model.joint_index[link.name]] = float(np.dot(link.axis, n_total))
        p = model.parent_index[i]
        r = rot_to_parent[i]
        origin = np.asarray(link.origin)
        f_parent = r @ f_total
        f_acc[p] = f_acc[p] + f_parent
        n_acc[p] = n_acc[p] + r @ n_total + np.cross(origin, f_parent)
    return tau


def gravity_torques(model: RobotModel, q: np.ndarray, gravity=(0.0, 0.0, -9.81)) -> np.ndarray:
    """Static holding torques (qd = qdd = 0)."""
    z = np.zeros(model.dof)
    return inverse_dynamics(model, q, z, z, gravity)


def kinetic_energy(model: RobotModel, q: np.ndarray, qd: np.ndarray) -> float:
    """Total kinetic energy via link velocity propagation."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    nl = len(model.links)
    omega = [np.zeros(3)] * nl
    vel_origin = [np.zeros(3)] * nl
    total = 0.0
    for i, link in enumerate(model.links):
        if link.parent is None:
            continue
        p = model.parent_index[i]
        origin = np.asarray(link.origin)
        if link.axis is None:
            r = np.eye(3)
            w = omega[p]
        else:
            ji = model.joint_index[link.name]
            r = _axis_rotation(link.axis, float(q[ji]))
            w = r.T @ omega[p] + np.asarray(link.axis) * qd[ji]
        omega[i] = w
        vel_origin[i] = r.T @ (vel_origin[p] + np.cross(omega[p], origin))
        com = np.asarray(link.com)
        v_com = vel_origin[i] + np.cross(w, com)
        total += 0.5 * link.mass * float(v_com @ v_com)
        total += 0.5 * float(w @ (link.inertia_matrix() @ w))
    return total
