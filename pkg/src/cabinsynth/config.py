"""Generation configuration: the seeded randomization space.

A config fully determines a dataset: human pool, seat layout, pose
ranges, background/light pools, camera, and the master seed. Configs are
stored as JSON with keys matching the field names below.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .camera import CameraSpec
from .errors import ConfigError
from .rng import mix64

LIGHT_KINDS = ("hdri_background", "point", "spot", "directional", "area")
POSE_AXES = ("vertical", "horizontal", "roll")

DEFAULT_CLOTHING_ASSETS = ("tshirt_jeans", "hoodie_casual", "shirt_office", "dress_summer")
DEFAULT_HAIR_ASSETS = ("short_dark", "long_straight", "curly_mid", "bald")
DEFAULT_SKELETON = "cmu_compatible_rig"

DEFAULT_SLIDER_RANGES: dict[str, tuple[float, float]] = {
    "height": (0.35, 0.85),
    "width": (0.30, 0.70),
    "proportions": (0.40, 0.60),
    "eye_size": (0.30, 0.70),
    "mouth": (0.30, 0.70),
    "forehead": (0.30, 0.70),
}

_POOL_SEED_SALT = 0x48554D414E53  # namespaces the human-pool stream off the master seed


@dataclass(frozen=True)
class HumanSpec:
    human_id: str
    attributes: dict[str, float]
    clothing_asset: str
    hair_asset: str
    skeleton_ref: str = DEFAULT_SKELETON

    def to_dict(self) -> dict:
        return {
            "human_id": self.human_id,
            "attributes": dict(self.attributes),
            "clothing_asset": self.clothing_asset,
            "hair_asset": self.hair_asset,
            "skeleton_ref": self.skeleton_ref,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HumanSpec":
        return cls(
            human_id=d["human_id"],
            attributes={k: float(v) for k, v in d.get("attributes", {}).items()},
            clothing_asset=d.get("clothing_asset", ""),
            hair_asset=d.get("hair_asset", ""),
            skeleton_ref=d.get("skeleton_ref", DEFAULT_SKELETON),
        )


@dataclass(frozen=True)
class SeatSlot:
    seat_id: str
    position: tuple[float, float, float]
    ypr_deg: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def to_dict(self) -> dict:
        return {"seat_id": self.seat_id, "position": list(self.position), "ypr_deg": list(self.ypr_deg)}

    @classmethod
    def from_dict(cls, d: dict) -> "SeatSlot":
        return cls(
            seat_id=d["seat_id"],
            position=tuple(float(v) for v in d["position"]),
            ypr_deg=tuple(float(v) for v in d.get("ypr_deg", (0.0, 0.0, 0.0))),
        )


@dataclass(frozen=True)
class RotationRange:
    bone_name: str
    axis: str  # one of POSE_AXES
    min_deg: float
    max_deg: float
    distribution: str = "uniform"  # reserved for non-uniform priors

    def to_dict(self) -> dict:
        return {
            "bone_name": self.bone_name,
            "axis": self.axis,
            "min_deg": self.min_deg,
            "max_deg": self.max_deg,
            "distribution": self.distribution,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RotationRange":
        return cls(
            bone_name=d["bone_name"],
            axis=d["axis"],
            min_deg=float(d["min_deg"]),
            max_deg=float(d["max_deg"]),
            distribution=d.get("distribution", "uniform"),
        )


@dataclass(frozen=True)
class LightingPreset:
    kind: str  # one of LIGHT_KINDS
    intensity: float = 1.0
    intensity_range: tuple[float, float] | None = None
    position: tuple[float, float, float] | None = None
    direction: tuple[float, float, float] | None = None
    cone_angle_deg: float | None = None
    area_size: tuple[float, float] | None = None
    hdri_ref: str | None = None

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "intensity": self.intensity}
        if self.intensity_range is not None:
            d["intensity_range"] = list(self.intensity_range)
        if self.position is not None:
            d["position"] = list(self.position)
        if self.direction is not None:
            d["direction"] = list(self.direction)
        if self.cone_angle_deg is not None:
            d["cone_angle_deg"] = self.cone_angle_deg
        if self.area_size is not None:
            d["area_size"] = list(self.area_size)
        if self.hdri_ref is not None:
            d["hdri_ref"] = self.hdri_ref
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LightingPreset":
        return cls(
            kind=d["kind"],
            intensity=float(d.get("intensity", 1.0)),
            intensity_range=tuple(float(v) for v in d["intensity_range"]) if d.get("intensity_range") else None,
            position=tuple(float(v) for v in d["position"]) if d.get("position") else None,
            direction=tuple(float(v) for v in d["direction"]) if d.get("direction") else None,
            cone_angle_deg=float(d["cone_angle_deg"]) if d.get("cone_angle_deg") is not None else None,
            area_size=tuple(float(v) for v in d["area_size"]) if d.get("area_size") else None,
            hdri_ref=d.get("hdri_ref"),
        )


@dataclass
class GenerationConfig:
    master_seed: int
    sample_count: int
    human_pool: list[HumanSpec]
    seat_layout: list[SeatSlot]
    pose_ranges: list[RotationRange]
    hdri_pool: list[str]
    light_presets: list[LightingPreset]
    camera: CameraSpec
    occupancy: int = 5
    image_size: tuple[int, int] = (640, 480)

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "sample_count": self.sample_count,
            "occupancy": self.occupancy,
            "image_size": list(self.image_size),
            "human_pool": [h.to_dict() for h in self.human_pool],
            "seat_layout": [s.to_dict() for s in self.seat_layout],
            "pose_ranges": [r.to_dict() for r in self.pose_ranges],
            "hdri_pool": list(self.hdri_pool),
            "light_presets": [p.to_dict() for p in self.light_presets],
            "camera": self.camera.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationConfig":
        image_size = tuple(int(v) for v in d.get("image_size", (640, 480)))
        cam_dict = dict(d.get("camera", {}))
        cam_dict.setdefault("image_size", list(image_size))
        return cls(
            master_seed=int(d["master_seed"]),
            sample_count=int(d["sample_count"]),
            occupancy=int(d.get("occupancy", 5)),
            image_size=image_size,
            human_pool=[HumanSpec.from_dict(h) for h in d.get("human_pool", [])],
            seat_layout=[SeatSlot.from_dict(s) for s in d.get("seat_layout", [])],
            pose_ranges=[RotationRange.from_dict(r) for r in d.get("pose_ranges", [])],
            hdri_pool=list(d.get("hdri_pool", [])),
            light_presets=[LightingPreset.from_dict(p) for p in d.get("light_presets", [])],
            camera=CameraSpec.from_dict(cam_dict),
        )


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def _light_violations(prefix: str, p: LightingPreset) -> list[Violation]:
    out = []
    if p.kind not in LIGHT_KINDS:
        out.append(Violation(f"{prefix}.kind", f"unknown light kind {p.kind!r}"))
        return out
    if p.intensity < 0:
        out.append(Violation(f"{prefix}.intensity", "intensity must be non-negative"))
    if p.intensity_range is not None and not (0 <= p.intensity_range[0] <= p.intensity_range[1]):
        out.append(Violation(f"{prefix}.intensity_range", "range must satisfy 0 <= min <= max"))
    needs_position = p.kind in ("point", "spot", "area")
    needs_direction = p.kind in ("spot", "directional", "area")
    if needs_position and p.position is None:
        out.append(Violation(f"{prefix}.position", f"{p.kind} light requires a position"))
    if needs_direction:
        if p.direction is None:
            out.append(Violation(f"{prefix}.direction", f"{p.kind} light requires a direction"))
        else:
            norm = sum(c * c for c in p.direction) ** 0.5
            if abs(norm - 1.0) > 1e-9:
                out.append(Violation(f"{prefix}.direction", f"direction must be unit length, |d| = {norm:.12f}"))
    if p.kind == "spot":
        if p.cone_angle_deg is None:
            out.append(Violation(f"{prefix}.cone_angle_deg", "spot light requires a cone angle"))
        elif not (0.0 < p.cone_angle_deg < 180.0):
            out.append(Violation(f"{prefix}.cone_angle_deg", "cone angle must lie in (0, 180)"))
    if p.kind == "area" and p.area_size is None:
        out.append(Violation(f"{prefix}.area_size", "area light requires an area size"))
    if p.kind == "hdri_background" and not p.hdri_ref:
        out.append(Violation(f"{prefix}.hdri_ref", "hdri_background light requires an hdri reference"))
    return out


def validate_config(config: GenerationConfig) -> list[Violation]:
    """All invariant violations in the config; empty means valid."""
    v: list[Violation] = []
    if not (0 <= config.master_seed < 2**64):
        v.append(Violation("master_seed", "must be an unsigned 64-bit integer"))
    if config.sample_count < 1:
        v.append(Violation("sample_count", "must be a positive integer"))
    if config.occupancy < 0:
        v.append(Violation("occupancy", "must be non-negative"))
    if config.occupancy > len(config.seat_layout):
        v.append(
            Violation(
                "occupancy",
                f"{config.occupancy} exceeds the {len(config.seat_layout)} configured seats",
            )
        )
    if len(config.human_pool) < config.occupancy:
        v.append(
            Violation(
                "human_pool",
                f"pool of {len(config.human_pool)} cannot fill occupancy {config.occupancy}",
            )
        )

    seen_ids: set[str] = set()
    for i, human in enumerate(config.human_pool):
        if human.human_id in seen_ids:
            v.append(Violation(f"human_pool[{i}].human_id", f"duplicate id {human.human_id!r}"))
        seen_ids.add(human.human_id)
        for name, value in human.attributes.items():
            if not (0.0 <= value <= 1.0):
                v.append(
                    Violation(f"human_pool[{i}].attributes.{name}", f"slider {value} outside [0, 1]")
                )

    seat_ids = [s.seat_id for s in config.seat_layout]
    if len(set(seat_ids)) != len(seat_ids):
        v.append(Violation("seat_layout", "seat ids must be unique"))

    for i, rr in enumerate(config.pose_ranges):
        path = f"pose_ranges[{i}]"
        if rr.axis not in POSE_AXES:
            v.append(Violation(f"{path}.axis", f"unknown axis {rr.axis!r}"))
        if rr.min_deg > rr.max_deg:
            v.append(Violation(path, f"min_deg {rr.min_deg} exceeds max_deg {rr.max_deg}"))

    if not config.hdri_pool and not config.light_presets:
        v.append(Violation("hdri_pool", "hdri_pool and light_presets cannot both be empty"))
    for i, preset in enumerate(config.light_presets):
        v.extend(_light_violations(f"light_presets[{i}]", preset))

    w, h = config.image_size
    if w <= 0 or h <= 0:
        v.append(Violation("image_size", f"dimensions must be positive, got {w}x{h}"))
    cam = config.camera
    if not (0.0 < cam.fov_deg <= 360.0):
        v.append(Violation("camera.fov_deg", f"must lie in (0, 360], got {cam.fov_deg}"))
    if cam.sensor_width_mm <= 0:
        v.append(Violation("camera.sensor_width_mm", "must be positive"))
    if cam.focal_length_mm is not None and cam.focal_length_mm <= 0:
        v.append(Violation("camera.focal_length_mm", "must be positive when overridden"))
    if cam.width <= 0 or cam.height <= 0:
        v.append(Violation("camera.image_size", "dimensions must be positive"))
    if tuple(cam.image_size) != tuple(config.image_size):
        v.append(
            Violation(
                "camera.image_size",
                f"{cam.image_size} disagrees with config image_size {config.image_size}",
            )
        )
    return v


def config_digest(config: GenerationConfig) -> str:
    """Stable content digest of a config (seed provenance for the manifest)."""
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def load_config(path) -> GenerationConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return GenerationConfig.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def save_config(config: GenerationConfig, path) -> None:
    Path(path).write_text(
        json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def default_seat_layout() -> list[SeatSlot]:
    """Five-seat cabin: two front, three rear; all facing +Z (forward, +X left)."""
    return [
        SeatSlot("front_left", (0.37, 0.52, 0.25)),
        SeatSlot("front_right", (-0.37, 0.52, 0.25)),
        SeatSlot("rear_left", (0.40, 0.55, -0.55)),
        SeatSlot("rear_middle", (0.0, 0.55, -0.55)),
        SeatSlot("rear_right", (-0.40, 0.55, -0.55)),
    ]


def default_camera(image_size=(640, 480)) -> CameraSpec:
    """Mirror-mounted 180 degree fisheye looking back into the cabin."""
    return CameraSpec(
        fov_deg=180.0,
        sensor_width_mm=5.3,
        image_size=tuple(image_size),
        position=(0.0, 1.30, 0.90),
        yaw_deg=180.0,
    )


def default_pose_ranges() -> list[RotationRange]:
    return [
        RotationRange("neck", "vertical", -15.0, 15.0),
        RotationRange("neck", "horizontal", -15.0, 15.0),
    ]


def default_config(
    master_seed: int = 0,
    sample_count: int = 10,
    pool_size: int = 30,
    occupancy: int = 5,
    image_size=(640, 480),
) -> GenerationConfig:
    """Ready-to-run config: seeded 30-human pool, 5 seats, neck ranges."""
    from .sampler import sample_human_pool  # local import to avoid a cycle

    pool_seed = mix64(master_seed ^ _POOL_SEED_SALT)
    return GenerationConfig(
        master_seed=master_seed,
        sample_count=sample_count,
        occupancy=occupancy,
        image_size=tuple(image_size),
        human_pool=sample_human_pool(DEFAULT_SLIDER_RANGES, pool_size, pool_seed),
        seat_layout=default_seat_layout(),
        pose_ranges=default_pose_ranges(),
        hdri_pool=[
            "hdri/studio_small_03",
            "hdri/kloppenheim_02",
            "hdri/carpentry_shop_01",
            "hdri/moonless_golf",
        ],
        light_presets=[
            LightingPreset(
                kind="point", intensity=60.0, intensity_range=(40.0, 100.0), position=(0.0, 1.2, 0.3)
            ),
            LightingPreset(
                kind="spot",
                intensity=80.0,
                position=(0.0, 1.4, 0.0),
                direction=(0.0, -1.0, 0.0),
                cone_angle_deg=65.0,
            ),
        ],
        camera=default_camera(image_size),
    )
