"""Rigid-body tree: link/joint description, loading, validation.

The model file is JSON: a ``links`` array in topological order (parents
first).  Each link carries its joint-to-parent geometry (``origin`` in the
parent frame, rotation ``axis`` in the child frame) plus mass properties.
Links with ``axis: null`` are fixed attachments (foot soles, hands, camera
mount) and contribute no degree of freedom.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import SchemaError

SCHEMA_VERSION = 1

# Canonical joint layout: 2 head + 3 per arm + 6 per leg = 20.
JOINT_NAMES = [
    "neck_yaw",
    "head_pitch",
    "l_shoulder_pitch",
    "l_shoulder_roll",
    "l_elbow_pitch",
    "r_shoulder_pitch",
    "r_shoulder_roll",
    "r_elbow_pitch",
    "l_hip_yaw",
    "l_hip_roll",
    "l_hip_pitch",
    "l_knee_pitch",
    "l_ankle_pitch",
    "l_ankle_roll",
    "r_hip_yaw",
    "r_hip_roll",
    "r_hip_pitch",
    "r_knee_pitch",
    "r_ankle_pitch",
    "r_ankle_roll",
]


@dataclass(frozen=True)
class Link:
    name: str
    parent: Optional[str]
    axis: Optional[Tuple[float, float, float]]  # unit, child frame; None = fixed
    origin: Tuple[float, float, float]  # joint position in parent frame
    mass: float
    com: Tuple[float, float, float]  # in child frame
    inertia: Tuple[float, float, float, float, float, float]  # xx yy zz xy xz yz
    limits: Optional[Tuple[float, float]]  # rad; None for fixed links

    def inertia_matrix(self) -> np.ndarray:
        xx, yy, zz, xy, xz, yz = self.inertia
        return np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]], dtype=float)


class RobotModel:
    """Validated kinematic tree with fast name/index lookups."""

    def __init__(self, name: str, links: Sequence[Link]):
        self.name = name
        self.links: List[Link] = list(links)
        self.link_index: Dict[str, int] = {}
        seen_root = None
        for i, link in enumerate(self.links):
            if link.name in self.link_index:
                raise SchemaError("duplicate link name", path=f"links[{i}].name")
            if link.parent is None:
                if seen_root is not None:
                    raise SchemaError("second root link", path=f"links[{i}]")
                seen_root = link.name
            else:
                if link.parent not in self.link_index:
                    raise SchemaError(
                        f"parent {link.parent!r} must precede its child",
                        path=f"links[{i}].parent",
                    )
            self.link_index[link.name] = i
        if seen_root is None:
            raise SchemaError("no root link")
        self.root = seen_root

        self.joint_names = [l.name for l in self.links if l.axis is not None]
        if self.joint_names != JOINT_NAMES:
            raise SchemaError(
                f"jointed links must be exactly the canonical 20 in order; got {self.joint_names}"
            )
        self.joint_index = {n: i for i, n in enumerate(self.joint_names)}
        self.parent_index = [
            -1 if l.parent is None else self.link_index[l.parent] for l in self.links
        ]

    @property
    def dof(self) -> int:
        return len(self.joint_names)

    def link(self, name: str) -> Link:
        return self.links[self.link_index[name]]

    def total_mass(self) -> float:
        return sum(l.mass for l in self.links)

    def joint_limits(self) -> np.ndarray:
        """(20, 2) array of [lo, hi] per joint."""
        out = np.empty((self.dof, 2))
        for i, n in enumerate(self.joint_names):
            out[i] = self.link(n).limits
        return out

    def leg_segments(self, side: str) -> Tuple[float, float, float]:
        """(thigh, shank, sole drop) lengths for 'l' or 'r'."""
        thigh = abs(self.link(f"{side}_knee_pitch").origin[2])
        shank = abs(self.link(f"{side}_ankle_pitch").origin[2])
        sole = abs(self.link(f"{side}_sole").origin[2])
        return thigh, shank, sole

    def arm_segments(self, side: str) -> Tuple[float, float]:
        """(upper arm, forearm) lengths for 'l' or 'r'."""
        upper = abs(self.link(f"{side}_elbow_pitch").origin[2])
        fore = abs(self.link(f"{side}_hand").origin[2])
        return upper, fore

    def hip_offset(self, side: str) -> Tuple[float, float, float]:
        return self.link(f"{side}_hip_yaw").origin


def _require(cond: bool, msg: str, path: str):
    if not cond:
        raise SchemaError(msg, path=path)


def _vec(value, n: int, path: str) -> tuple:
    _require(
        isinstance(value, (list, tuple)) and len(value) == n,
        f"expected {n} numbers",
        path,
    )
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SchemaError("expected numbers", path=path) from None


def parse_model(doc: dict) -> RobotModel:
    if not isinstance(doc, dict):
        raise SchemaError("model document must be an object")
    _require(doc.get("schema_version") == SCHEMA_VERSION, "unsupported schema_version", "schema_version")
    _require(isinstance(doc.get("name"), str) and doc["name"], "missing model name", "name")
    raw_links = doc.get("links")
    _require(isinstance(raw_links, list) and raw_links, "links must be a non-empty array", "links")

    links: List[Link] = []
    for i, rl in enumerate(raw_links):
        path = f"links[{i}]"
        _require(isinstance(rl, dict), "link must be an object", path)
        allowed = {"name", "parent", "axis", "origin", "mass", "com", "inertia", "limits"}
        for key in rl:
            _require(key in allowed, f"unknown field {key!r}", path)
        name = rl.get("name")
        _require(isinstance(name, str) and bool(name), "missing name", f"{path}.name")
        parent = rl.get("parent")
        _require(parent is None or isinstance(parent, str), "parent must be a string or null", f"{path}.parent")
        axis = rl.get("axis")
        if axis is not None:
            axis = _vec(axis, 3, f"{path}.axis")
            norm = math.sqrt(sum(v * v for v in axis))
            _require(abs(norm - 1.0) < 1e-9, f"axis norm {norm} != 1", f"{path}.axis")
        origin = _vec(rl.get("origin"), 3, f"{path}.origin")
        mass = rl.get("mass")
        _require(isinstance(mass, (int, float)) and mass >= 0.0, "mass must be >= 0", f"{path}.mass")
        com = _vec(rl.get("com"), 3, f"{path}.com")
        inertia = _vec(rl.get("inertia"), 6, f"{path}.inertia")
        _require(all(inertia[k] >= 0.0 for k in range(3)), "principal inertias must be >= 0", f"{path}.inertia")
        limits = rl.get("limits")
        if axis is None:
            _require(limits is None, "fixed link cannot have limits", f"{path}.limits")
        else:
            limits = _vec(limits, 2, f"{path}.limits")
            _require(limits[0] < limits[1], "limits must satisfy lo < hi", f"{path}.limits")
        links.append(Link(name, parent, axis, origin, float(mass), com, inertia, limits))

    return RobotModel(doc["name"], links)


def load_model(path) -> RobotModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not valid JSON: {e}", path=str(path)) from None
    return parse_model(doc)


def default_model_path() -> str:
    return str(resources.files("hop.data").joinpath("model.json"))


def load_default_model() -> RobotModel:
    return load_model(default_model_path())
