"""Equisolid fisheye camera: projection, unprojection, focal, distance.

Mapping between the incidence angle theta (from the optical axis) and the
radial distance r on the sensor: ``r = 2 * f * sin(theta / 2)``. Pixels are
square, the principal point sits at the image center, and mm convert to
pixels via ``image_width / sensor_width_mm``.

Sensor frame (standard image convention): +X along pixel u, +Y along
pixel v (downward), +Z the optical axis. The yaw/pitch/roll pose angles
orient the camera *mount* in the vehicle frame (+Y up, +Z forward, like
every other entity); at zero angles the camera faces vehicle +Z with
image-up matching vehicle up. Angles at exactly fov/2 count as inside
the field of view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfFOVError
from .geometry import rotation_from_quat, rotation_ypr

EQUISOLID_FISHEYE = "equisolid_fisheye"

_FOV_EPS_RAD = 1e-12

# Sensor-to-mount rotation: at zero mount angles the sensor's +X (pixel u)
# points to vehicle -X and its +Y (pixel v, down) to vehicle -Y, so the
# image is upright and un-mirrored for a +Z-facing camera.
_SENSOR_IN_MOUNT = np.diag([-1.0, -1.0, 1.0])


def focal_from_fov(fov_deg: float, sensor_width_mm: float) -> float:
    """Focal length (mm) placing the half-FOV ray at the sensor half-width."""
    if fov_deg <= 0.0:
        raise ValueError(f"fov_deg must be positive, got {fov_deg}")
    if fov_deg > 360.0:
        raise ValueError(f"fov_deg must be <= 360, got {fov_deg}")
    if sensor_width_mm <= 0.0:
        raise ValueError(f"sensor_width_mm must be positive, got {sensor_width_mm}")
    return (sensor_width_mm / 2.0) / (2.0 * math.sin(math.radians(fov_deg) / 4.0))


@dataclass(frozen=True)
class PixelPoint:
    """Continuous pixel coordinates plus an in-FOV/in-frame flag."""

    u: float
    v: float
    valid: bool


@dataclass
class CameraSpec:
    """Pose and intrinsics of the scene camera.

    ``focal_length_mm`` is derived from fov and sensor width unless set
    explicitly. Orientation is yaw/pitch/roll degrees in the vehicle frame
    (see geometry module); a quaternion, when given, takes precedence.
    """

    model: str = EQUISOLID_FISHEYE
    fov_deg: float = 180.0
    sensor_width_mm: float = 5.3
    focal_length_mm: float | None = None
    image_size: tuple[int, int] = (640, 480)
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    roll_deg: float = 0.0
    quat: tuple[float, float, float, float] | None = field(default=None)

    @property
    def focal_mm(self) -> float:
        if self.focal_length_mm is not None:
            return self.focal_length_mm
        return focal_from_fov(self.fov_deg, self.sensor_width_mm)

    @property
    def width(self) -> int:
        return int(self.image_size[0])

    @property
    def height(self) -> int:
        return int(self.image_size[1])

    @property
    def px_per_mm(self) -> float:
        return self.width / self.sensor_width_mm

    def rotation(self) -> np.ndarray:
        """Sensor-to-world rotation matrix.

        A quaternion, when given, is the full sensor-to-world rotation;
        yaw/pitch/roll orient the mount and compose with the fixed
        sensor-in-mount base rotation.
        """
        if self.quat is not None:
            return rotation_from_quat(self.quat)
        return rotation_ypr(self.yaw_deg, self.pitch_deg, self.roll_deg) @ _SENSOR_IN_MOUNT

    def max_radius_mm(self) -> float:
        """Sensor radius of the FOV boundary: r(fov/2)."""
        return 2.0 * self.focal_mm * math.sin(math.radians(self.fov_deg) / 4.0)

    def to_dict(self) -> dict:
        d = {
            "model": self.model,
            "fov_deg": self.fov_deg,
            "sensor_width_mm": self.sensor_width_mm,
            "focal_length_mm": self.focal_length_mm,
            "image_size": list(self.image_size),
            "position": list(self.position),
            "yaw_deg": self.yaw_deg,
            "pitch_deg": self.pitch_deg,
            "roll_deg": self.roll_deg,
        }
        if self.quat is not None:
            d["quat"] = list(self.quat)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CameraSpec":
        return cls(
            model=d.get("model", EQUISOLID_FISHEYE),
            fov_deg=float(d.get("fov_deg", 180.0)),
            sensor_width_mm=float(d.get("sensor_width_mm", 5.3)),
            focal_length_mm=(
                None if d.get("focal_length_mm") is None else float(d["focal_length_mm"])
            ),
            image_size=tuple(int(v) for v in d.get("image_size", (640, 480))),
            position=tuple(float(v) for v in d.get("position", (0.0, 0.0, 0.0))),
            yaw_deg=float(d.get("yaw_deg", 0.0)),
            pitch_deg=float(d.get("pitch_deg", 0.0)),
            roll_deg=float(d.get("roll_deg", 0.0)),
            quat=tuple(float(v) for v in d["quat"]) if d.get("quat") else None,
        )


def project(point_world, camera: CameraSpec) -> PixelPoint:
    """Project a 3D world point through the equisolid mapping.

    ``valid`` is False when the incidence angle exceeds fov/2 or the pixel
    falls outside the frame; u/v are still returned for diagnostics.
    """
    p = np.asarray(point_world, dtype=float) - np.asarray(camera.position, dtype=float)
    pc = camera.rotation().T @ p
    norm = float(np.linalg.norm(pc))
    if norm == 0.0:
        raise ValueError("cannot project a point at the camera origin")

    theta = math.acos(max(-1.0, min(1.0, pc[2] / norm)))
    r_px = 2.0 * camera.focal_mm * math.sin(theta / 2.0) * camera.px_per_mm

    lateral = math.hypot(pc[0], pc[1])
    if lateral == 0.0:
        du, dv = 0.0, 0.0
    else:
        du = pc[0] / lateral
        dv = pc[1] / lateral  # sensor +Y is pixel-down already

    u = camera.width / 2.0 + r_px * du
    v = camera.height / 2.0 + r_px * dv

    half_fov = math.radians(camera.fov_deg) / 2.0
    in_fov = theta <= half_fov + _FOV_EPS_RAD
    in_frame = 0.0 <= u < camera.width and 0.0 <= v < camera.height
    return PixelPoint(u, v, in_fov and in_frame)


def unproject(pixel, camera: CameraSpec) -> np.ndarray:
    """Unit ray in the camera frame for a pixel (PixelPoint or (u, v))."""
    u, v = (pixel.u, pixel.v) if isinstance(pixel, PixelPoint) else (pixel[0], pixel[1])
    x_mm = (u - camera.width / 2.0) / camera.px_per_mm
    y_mm = (v - camera.height / 2.0) / camera.px_per_mm
    r_mm = math.hypot(x_mm, y_mm)

    f = camera.focal_mm
    rel = 1e-12 * max(1.0, r_mm)
    if r_mm > 2.0 * f + rel:
        raise OutOfFOVError(f"radial distance {r_mm:.6f} mm exceeds the lens limit {2 * f:.6f} mm")
    if r_mm > camera.max_radius_mm() + rel:
        raise OutOfFOVError(
            f"radial distance {r_mm:.6f} mm is beyond the {camera.fov_deg} degree field of view"
        )

    theta = 2.0 * math.asin(min(1.0, r_mm / (2.0 * f)))
    if r_mm == 0.0:
        du, dv = 0.0, 0.0
    else:
        du, dv = x_mm / r_mm, y_mm / r_mm
    s = math.sin(theta)
    ray = np.array([s * du, s * dv, math.cos(theta)])
    return ray / np.linalg.norm(ray)


def distance_to_camera(point_world, camera: CameraSpec) -> float:
    """Euclidean (radial) distance from the camera position to the point."""
    p = np.asarray(point_world, dtype=float) - np.asarray(camera.position, dtype=float)
    return float(np.linalg.norm(p))


def unproject_grid(camera: CameraSpec) -> tuple[np.ndarray, np.ndarray]:
    """Rays for every pixel center, vectorized.

    Returns ``(dirs, valid)``: dirs is (H, W, 3) unit rays in the camera
    frame (undefined where invalid), valid is the (H, W) in-FOV mask.
    Pixels are sampled at their centers (u + 0.5, v + 0.5).
    """
    w, h = camera.width, camera.height
    u = np.arange(w, dtype=float) + 0.5
    v = np.arange(h, dtype=float) + 0.5
    x_mm = (u - w / 2.0) / camera.px_per_mm
    y_mm = (v - h / 2.0) / camera.px_per_mm
    xg, yg = np.meshgrid(x_mm, y_mm)

    r = np.hypot(xg, yg)
    f = camera.focal_mm
    valid = (r <= 2.0 * f) & (r <= camera.max_radius_mm() + _FOV_EPS_RAD)

    theta = 2.0 * np.arcsin(np.clip(r / (2.0 * f), 0.0, 1.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        du = np.where(r > 0.0, xg / r, 0.0)
        dv = np.where(r > 0.0, yg / r, 0.0)
    s = np.sin(theta)
    dirs = np.stack([s * du, s * dv, np.cos(theta)], axis=-1)
    return dirs, valid
