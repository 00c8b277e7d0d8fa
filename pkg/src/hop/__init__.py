"""Humanoid control stack.

Orientation math, attitude estimation, kinematics and dynamics over a
20-DOF model, gait generation, keyframe motions, servo and fisheye camera
geometry, and a deterministic simulation harness, exposed through the
``hop`` command line tool and a small HTTP service.
"""

__version__ = "0.1.0"

from .orientation import FusedAngles, RotationQuat, fused_from_quat, quat_from_fused

__all__ = [
    "FusedAngles",
    "RotationQuat",
    "fused_from_quat",
    "quat_from_fused",
    "__version__",
]
