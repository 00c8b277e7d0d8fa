"""Wide-angle camera geometry: radial distortion, ground projection, calibration.

The lens model is an equidistant fisheye with a polynomial radial correction:
a ray at angle theta from the optical axis lands at radius
``f * theta_d`` where ``theta_d = theta * (1 + k1 t^2 + k2 t^4 + k3 t^6 +
k4 t^8)``.  Inversion runs Newton-Raphson on that scalar polynomial.
Lookup tables trade a little memory for constant-time conversion of whole
point sets.  Extrinsic calibration fits the camera pose (position plus
fused pitch/roll/yaw offsets) to ground-truth point observations with a
Nelder-Mead simplex search.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CalibrationError,
    InvalidArgumentError,
    NoIntersectionError,
    NumericalError,
    OutOfViewError,
    SchemaError,
)
from .kinematics import Transform
from .orientation import FusedAngles, RotationQuat, fused_from_quat, quat_from_fused

RATED_HALF_FOV = math.radians(75.0)
FOV_MARGIN = 1.2  # rays accepted up to margin * rated half-FOV
_NEWTON_TOL = 1e-10
_NEWTON_MAX_ITER = 20
_MONOTONE_GRID = 1e-3  # rad, radial monotonicity check resolution


@dataclass(frozen=True)
class CameraModel:
    width: int = 640
    height: int = 480
    fx: float = 269.8257210366022
    fy: float = 269.8257210366022
    cx: float = 320.0
    cy: float = 240.0
    k1: float = -0.06
    k2: float = 0.003
    k3: float = 0.0
    k4: float = 0.0
    extrinsic: Transform = field(
        default_factory=lambda: Transform((0.03, 0.0, 0.02), RotationQuat.identity())
    )

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidArgumentError("image size must be positive")
        if not (self.fx > 0.0 and self.fy > 0.0):
            raise InvalidArgumentError("focal lengths must be positive")
        for name in ("fx", "fy", "cx", "cy", "k1", "k2", "k3", "k4"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")

    def to_dict(self) -> dict:
        e = self.extrinsic
        return {
            "width": self.width,
            "height": self.height,
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "k": [self.k1, self.k2, self.k3, self.k4],
            "extrinsic": {
                "position": list(e.position),
                "orientation": [e.orientation.w, e.orientation.x, e.orientation.y, e.orientation.z],
            },
        }

    @staticmethod
    def from_dict(doc: dict) -> "CameraModel":
        if not isinstance(doc, dict):
            raise SchemaError("camera model must be an object")
        allowed = {"width", "height", "fx", "fy", "cx", "cy", "k", "extrinsic"}
        extra = set(doc) - allowed
        if extra:
            raise SchemaError(f"unknown keys {sorted(extra)}", path="camera")
        kwargs = {}
        for name in ("width", "height"):
            if name in doc:
                if not isinstance(doc[name], int) or isinstance(doc[name], bool):
                    raise SchemaError("expected an integer", path=f"camera.{name}")
                kwargs[name] = doc[name]
        for name in ("fx", "fy", "cx", "cy"):
            if name in doc:
                try:
                    kwargs[name] = float(doc[name])
                except (TypeError, ValueError):
                    raise SchemaError("expected a number", path=f"camera.{name}") from None
        if "k" in doc:
            k = doc["k"]
            if not isinstance(k, list) or len(k) != 4:
                raise SchemaError("k must be a list of 4 numbers", path="camera.k")
            try:
                kwargs["k1"], kwargs["k2"], kwargs["k3"], kwargs["k4"] = (float(v) for v in k)
            except (TypeError, ValueError):
                raise SchemaError("k must be a list of 4 numbers", path="camera.k") from None
        if "extrinsic" in doc:
            ext = doc["extrinsic"]
            if (
                not isinstance(ext, dict)
                or set(ext) != {"position", "orientation"}
                or not isinstance(ext.get("position"), list)
                or len(ext["position"]) != 3
                or not isinstance(ext.get("orientation"), list)
                or len(ext["orientation"]) != 4
            ):
                raise SchemaError(
                    "extrinsic must be {position: [3], orientation: [4]}", path="camera.extrinsic"
                )
            try:
                pos = tuple(float(v) for v in ext["position"])
                w, x, y, z = (float(v) for v in ext["orientation"])
            except (TypeError, ValueError):
                raise SchemaError("expected numbers", path="camera.extrinsic") from None
            kwargs["extrinsic"] = Transform(pos, RotationQuat(w, x, y, z))
        try:
            return CameraModel(**kwargs)
        except InvalidArgumentError as e:
            raise SchemaError(str(e), path="camera") from None


def _radial(model: CameraModel, theta: float) -> float:
    t2 = theta * theta
    return theta * (1.0 + t2 * (model.k1 + t2 * (model.k2 + t2 * (model.k3 + t2 * model.k4))))


def _radial_slope(model: CameraModel, theta: float) -> float:
    t2 = theta * theta
    return 1.0 + t2 * (
        3.0 * model.k1 + t2 * (5.0 * model.k2 + t2 * (7.0 * model.k3 + t2 * 9.0 * model.k4))
    )


def default_camera_model() -> CameraModel:
    """Synthetic wide-angle intrinsics: 75 deg half-FOV spans half the width."""
    base = CameraModel()
    fx = (base.width / 2.0) / _radial(base, RATED_HALF_FOV)
    return replace(base, fx=fx, fy=fx)


def distort_point(ray: Sequence[float], model: CameraModel) -> Tuple[float, float]:
    """Project a camera-frame ray (+z optical axis) onto the sensor."""
    rx, ry, rz = (float(v) for v in ray)
    norm = math.sqrt(rx * rx + ry * ry + rz * rz)
    if not (math.isfinite(norm) and norm > 0.0):
        raise InvalidArgumentError("ray must be a nonzero finite vector")
    cos_angle = max(-1.0, min(1.0, rz / norm))
    if not cos_angle > math.cos(RATED_HALF_FOV * FOV_MARGIN):
        raise OutOfViewError(
            f"ray at {math.degrees(math.acos(cos_angle)):.1f} deg exceeds the rated view cone"
        )
    theta = math.acos(cos_angle)
    alpha = math.atan2(ry, rx)
    theta_d = _radial(model, theta)
    return (
        model.cx + model.fx * theta_d * math.cos(alpha),
        model.cy + model.fy * theta_d * math.sin(alpha),
    )


def invert_radial(model: CameraModel, theta_d: float) -> Tuple[float, int]:
    """Solve radial(theta) = theta_d by Newton-Raphson; returns (theta, iterations)."""
    theta = theta_d
    for i in range(1, _NEWTON_MAX_ITER + 1):
        residual = _radial(model, theta) - theta_d
        slope = _radial_slope(model, theta)
        if slope <= 0.0:
            raise NumericalError(
                f"radial polynomial not locally monotonic at theta={theta:.6f}",
                residual=residual,
            )
        step = residual / slope
        theta -= step
        if abs(step) <= _NEWTON_TOL:
            return theta, i
    raise NumericalError(
        f"radial inversion did not converge for theta_d={theta_d:.6f}",
        residual=_radial(model, theta) - theta_d,
    )


def undistort_pixel(pixel: Sequence[float], model: CameraModel) -> Tuple[float, float, float]:
    """Invert the projection: pixel back to a unit camera-frame ray."""
    u, v = (float(c) for c in pixel)
    if not (math.isfinite(u) and math.isfinite(v)):
        raise InvalidArgumentError("pixel must be finite")
    du = (u - model.cx) / model.fx
    dv = (v - model.cy) / model.fy
    theta_d = math.hypot(du, dv)
    if theta_d == 0.0:
        return (0.0, 0.0, 1.0)
    try:
        theta, _ = invert_radial(model, theta_d)
    except NumericalError as e:
        raise NumericalError(f"pixel ({u:g}, {v:g}): {e}", residual=e.residual) from None
    alpha = math.atan2(dv, du)
    s = math.sin(theta)
    return (s * math.cos(alpha), s * math.sin(alpha), math.cos(theta))


def check_radial_monotonic(model: CameraModel) -> None:
    """Reject coefficient sets whose radial map folds inside the view cone."""
    theta_max = RATED_HALF_FOV * FOV_MARGIN
    thetas = np.arange(0.0, theta_max + _MONOTONE_GRID, _MONOTONE_GRID)
    t2 = thetas * thetas
    vals = thetas * (1.0 + t2 * (model.k1 + t2 * (model.k2 + t2 * (model.k3 + t2 * model.k4))))
    if np.any(np.diff(vals) <= 0.0):
        idx = int(np.argmax(np.diff(vals) <= 0.0))
        raise InvalidArgumentError(
            f"radial polynomial is not monotonic near theta={thetas[idx]:.3f} rad"
        )


def _ideal_pixel(ray: Tuple[float, float, float], model: CameraModel) -> Tuple[float, float]:
    # pure equidistant projection (k = 0); the LUT's intermediate coordinate
    rx, ry, rz = ray
    theta = math.acos(max(-1.0, min(1.0, rz)))
    alpha = math.atan2(ry, rx)
    return (model.cx + model.fx * theta * math.cos(alpha), model.cy + model.fy * theta * math.sin(alpha))


def _ray_from_ideal(pixel: Tuple[float, float], model: CameraModel) -> Tuple[float, float, float]:
    du = (pixel[0] - model.cx) / model.fx
    dv = (pixel[1] - model.cy) / model.fy
    theta = math.hypot(du, dv)
    if theta == 0.0:
        return (0.0, 0.0, 1.0)
    alpha = math.atan2(dv, du)
    s = math.sin(theta)
    return (s * math.cos(alpha), s * math.sin(alpha), math.cos(theta))


class _GridMap:
    """Bilinear sampler over values tabulated on a rectangular node grid."""

    def __init__(self, us: np.ndarray, vs: np.ndarray, values: np.ndarray):
        self.us = us
        self.vs = vs
        self.values = values  # shape (len(vs), len(us), 2)

    def sample(self, u: float, v: float) -> Tuple[float, float]:
        i = int(np.searchsorted(self.us, u, side="right")) - 1
        j = int(np.searchsorted(self.vs, v, side="right")) - 1
        i = max(0, min(i, len(self.us) - 2))
        j = max(0, min(j, len(self.vs) - 2))
        u0, u1 = self.us[i], self.us[i + 1]
        v0, v1 = self.vs[j], self.vs[j + 1]
        tu = (u - u0) / (u1 - u0)
        tv = (v - v0) / (v1 - v0)
        row0 = self.values[j, i] + tu * (self.values[j, i + 1] - self.values[j, i])
        row1 = self.values[j + 1, i] + tu * (self.values[j + 1, i + 1] - self.values[j + 1, i])
        out = row0 + tv * (row1 - row0)
        return (float(out[0]), float(out[1]))


@dataclass(frozen=True)
class ProjectionLUT:
    """Tabulated distort/undistort maps in pixel coordinates.

    ``undistort`` sends a sensor pixel to its ideal (zero-coefficient
    equidistant) pixel; ``distort`` sends an ideal pixel back to the sensor.
    Each query costs one bilinear interpolation regardless of polynomial
    order.
    """

    model: CameraModel
    stride: int
    _inverse: _GridMap
    _forward: _GridMap

    def undistort(self, pixel: Sequence[float]) -> Tuple[float, float]:
        return self._inverse.sample(float(pixel[0]), float(pixel[1]))

    def distort(self, pixel: Sequence[float]) -> Tuple[float, float]:
        return self._forward.sample(float(pixel[0]), float(pixel[1]))


def _grid_nodes(extent: int, stride: int) -> np.ndarray:
    nodes = list(range(0, extent, stride))
    if nodes[-1] != extent - 1:
        nodes.append(extent - 1)
    return np.asarray(nodes, dtype=float)


def build_luts(model: CameraModel, stride: int = 8) -> ProjectionLUT:
    if stride < 1:
        raise InvalidArgumentError(f"stride must be >= 1, got {stride}")
    check_radial_monotonic(model)

    us = _grid_nodes(model.width, stride)
    vs = _grid_nodes(model.height, stride)
    inv = np.empty((len(vs), len(us), 2))
    for j, v in enumerate(vs):
        for i, u in enumerate(us):
            inv[j, i] = _ideal_pixel(undistort_pixel((u, v), model), model)

    # forward grid spans the ideal-coordinate footprint of the whole sensor;
    # the radial scale is smooth everywhere so out-of-cone nodes still hold
    # finite values for the edge cells to interpolate against
    u_lo = math.floor(float(inv[:, :, 0].min())) - stride
    u_hi = math.ceil(float(inv[:, :, 0].max())) + stride
    v_lo = math.floor(float(inv[:, :, 1].min())) - stride
    v_hi = math.ceil(float(inv[:, :, 1].max())) + stride
    fus = np.arange(u_lo, u_hi + stride, stride, dtype=float)
    fvs = np.arange(v_lo, v_hi + stride, stride, dtype=float)
    fwd = np.empty((len(fvs), len(fus), 2))
    for j, v in enumerate(fvs):
        for i, u in enumerate(fus):
            du, dv = u - model.cx, v - model.cy
            theta = math.hypot(du / model.fx, dv / model.fy)
            if theta == 0.0:
                fwd[j, i] = (u, v)
            else:
                scale = _radial(model, theta) / theta
                fwd[j, i] = (model.cx + du * scale, model.cy + dv * scale)

    return ProjectionLUT(
        model=model, stride=stride, _inverse=_GridMap(us, vs, inv), _forward=_GridMap(fus, fvs, fwd)
    )


@dataclass(frozen=True)
class ViewState:
    """Everything outside the camera needed to tie pixels to the ground."""

    head: Transform  # head link pose in the trunk frame
    trunk: FusedAngles  # trunk orientation in the world
    height: float  # trunk origin height above the ground plane, m

    def __post_init__(self):
        if not (math.isfinite(self.height) and self.height > 0.0):
            raise InvalidArgumentError(f"height must be positive, got {self.height}")


def _camera_world_pose(view: ViewState, model: CameraModel) -> Tuple[Tuple[float, float, float], RotationQuat]:
    trunk_q = quat_from_fused(view.trunk)
    head_pos_w = trunk_q.rotate(view.head.position)
    head_q_w = trunk_q.multiply(view.head.orientation)
    cam_off_w = head_q_w.rotate(model.extrinsic.position)
    cam_pos = (
        head_pos_w[0] + cam_off_w[0],
        head_pos_w[1] + cam_off_w[1],
        view.height + head_pos_w[2] + cam_off_w[2],
    )
    cam_q = head_q_w.multiply(model.extrinsic.orientation)
    return cam_pos, cam_q


def project_to_ground(pixel: Sequence[float], view: ViewState, model: CameraModel) -> Tuple[float, float]:
    """Map a pixel to the ground plane in yaw-free egocentric coordinates.

    The returned (x, y) is the ground intersection expressed in a frame at
    the robot's footprint centre with x forward: world coordinates rotated
    back by the trunk's fused yaw.
    """
    ray_c = undistort_pixel(pixel, model)
    cam_pos, cam_q = _camera_world_pose(view, model)
    dx, dy, dz = cam_q.rotate(ray_c)
    if dz >= 0.0:
        raise NoIntersectionError(f"pixel ({pixel[0]:g}, {pixel[1]:g}) looks at or above the horizon")
    t = -cam_pos[2] / dz
    gx = cam_pos[0] + t * dx
    gy = cam_pos[1] + t * dy
    psi = view.trunk.fused_yaw
    c, s = math.cos(psi), math.sin(psi)
    # rotate by -psi
    return (c * gx + s * gy, -s * gx + c * gy)


def render_ground_point(point_xy: Sequence[float], view: ViewState, model: CameraModel) -> Tuple[float, float]:
    """Inverse of project_to_ground for test scenes: ground point to pixel."""
    psi = view.trunk.fused_yaw
    c, s = math.cos(psi), math.sin(psi)
    gx = c * point_xy[0] - s * point_xy[1]
    gy = s * point_xy[0] + c * point_xy[1]
    cam_pos, cam_q = _camera_world_pose(view, model)
    d = (gx - cam_pos[0], gy - cam_pos[1], -cam_pos[2])
    ray_c = cam_q.rotate_back(d)
    return distort_point(ray_c, model)


@dataclass(frozen=True)
class NelderMeadConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    tol: float = 1e-8
    max_iter: int = 500

    def __post_init__(self):
        if self.max_iter < 0:
            raise InvalidArgumentError("max_iter must be >= 0")
        if not self.tol >= 0.0:
            raise InvalidArgumentError("tol must be >= 0")


def _simplex_diameter(vertices: List[np.ndarray]) -> float:
    best = 0.0
    for a in range(len(vertices)):
        for b in range(a + 1, len(vertices)):
            best = max(best, float(np.linalg.norm(vertices[a] - vertices[b])))
    return best


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    config: Optional[NelderMeadConfig] = None,
) -> np.ndarray:
    """Derivative-free simplex minimizer; deterministic for given inputs."""
    cfg = config if config is not None else NelderMeadConfig()
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size < 1:
        raise InvalidArgumentError("x0 must be a 1-D point")
    if not np.all(np.isfinite(x0)):
        raise InvalidArgumentError("x0 must be finite")
    if cfg.max_iter == 0:
        return x0.copy()

    def f(x: np.ndarray) -> float:
        val = float(objective(x))
        if not math.isfinite(val):
            raise NumericalError(f"objective not finite at {x.tolist()}", residual=val)
        return val

    n = x0.size
    verts = [x0.copy()]
    for i in range(n):
        step = 0.05 * x0[i] if x0[i] != 0.0 else 0.00025
        v = x0.copy()
        v[i] += step
        verts.append(v)
    vals = [f(v) for v in verts]

    for _ in range(cfg.max_iter):
        order = np.argsort(vals, kind="stable")
        verts = [verts[i] for i in order]
        vals = [vals[i] for i in order]
        if _simplex_diameter(verts) < cfg.tol:
            break
        centroid = np.mean(verts[:-1], axis=0)
        worst = verts[-1]
        reflected = centroid + cfg.reflection * (centroid - worst)
        fr = f(reflected)
        if fr < vals[0]:
            expanded = centroid + cfg.expansion * (reflected - centroid)
            fe = f(expanded)
            if fe < fr:
                verts[-1], vals[-1] = expanded, fe
            else:
                verts[-1], vals[-1] = reflected, fr
        elif fr < vals[-2]:
            verts[-1], vals[-1] = reflected, fr
        else:
            if fr < vals[-1]:
                contracted = centroid + cfg.contraction * (reflected - centroid)
            else:
                contracted = centroid + cfg.contraction * (worst - centroid)
            fc = f(contracted)
            if fc < min(fr, vals[-1]):
                verts[-1], vals[-1] = contracted, fc
            else:
                best = verts[0]
                verts = [best] + [best + cfg.shrink * (v - best) for v in verts[1:]]
                vals = [vals[0]] + [f(v) for v in verts[1:]]

    order = np.argsort(vals, kind="stable")
    return verts[order[0]].copy()


Correspondence = Tuple[Tuple[float, float], Tuple[float, float]]


def load_correspondences(path) -> List[Correspondence]:
    """Read ground-point/pixel pairs from `world_x,world_y,pixel_u,pixel_v` CSV."""
    out: List[Correspondence] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["world_x", "world_y", "pixel_u", "pixel_v"]:
            raise SchemaError("expected header world_x,world_y,pixel_u,pixel_v", path=str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SchemaError(f"line {lineno}: expected 4 fields", path=str(path))
            try:
                wx, wy, u, v = (float(c) for c in row)
            except ValueError:
                raise SchemaError(f"line {lineno}: non-numeric field", path=str(path)) from None
            out.append(((wx, wy), (u, v)))
    return out


@dataclass(frozen=True)
class CalibrationResult:
    extrinsic: Transform
    rms: float
    initial_rms: float


def _collinear(points: np.ndarray) -> bool:
    centered = points - points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    return sv[-1] <= 1e-9 * max(1.0, sv[0])


def _apply_offsets(base: Transform, params: np.ndarray) -> Transform:
    dp = params[:3]
    delta = quat_from_fused(FusedAngles(params[5], params[3], params[4], 1))
    return Transform(
        (base.position[0] + dp[0], base.position[1] + dp[1], base.position[2] + dp[2]),
        base.orientation.multiply(delta),
    )


def calibrate_extrinsics(
    correspondences: Sequence[Correspondence],
    view: ViewState,
    model: CameraModel,
    config: Optional[NelderMeadConfig] = None,
) -> CalibrationResult:
    """Fit camera position and orientation offsets to observed ground points.

    Six parameters: position delta in the head frame and fused
    pitch/roll/yaw angles of a rotation composed onto the initial
    orientation.  The returned pose never reprojects worse than the
    initial one.
    """
    if len(correspondences) < 4:
        raise CalibrationError(f"need at least 4 correspondences, got {len(correspondences)}")
    ground = np.asarray([c[0] for c in correspondences], dtype=float)
    if _collinear(ground):
        raise CalibrationError("ground points are collinear; spread them over the view")
    pixels = np.asarray([c[1] for c in correspondences], dtype=float)
    if not (np.all(np.isfinite(ground)) and np.all(np.isfinite(pixels))):
        raise CalibrationError("correspondences must be finite")

    cfg = config if config is not None else NelderMeadConfig(tol=1e-10, max_iter=4000)

    def mean_sq(params: np.ndarray) -> float:
        cam = replace(model, extrinsic=_apply_offsets(model.extrinsic, params))
        total = 0.0
        for (wx, wy), (u, v) in zip(ground, pixels):
            try:
                pu, pv = render_ground_point((wx, wy), view, cam)
            except OutOfViewError:
                return 1e12
            total += (pu - u) ** 2 + (pv - v) ** 2
        return total / len(ground)

    x0 = np.zeros(6)
    best = x0
    best_val = mean_sq(x0)
    initial_rms = math.sqrt(best_val)
    # deterministic restarts (fresh simplex around the incumbent) dig the
    # search out of the flat valleys a 6-parameter reprojection surface has
    for _ in range(3):
        cand = nelder_mead(mean_sq, best, cfg)
        cand_val = mean_sq(cand)
        if cand_val < best_val:
            best, best_val = cand, cand_val
        else:
            break

    return CalibrationResult(
        extrinsic=_apply_offsets(model.extrinsic, best),
        rms=math.sqrt(best_val),
        initial_rms=initial_rms,
    )
