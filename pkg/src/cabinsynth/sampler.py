"""Deterministic scene sampling: who sits where, every bone angle, background.

Each sample owns an independent SplitMix64 stream seeded from
``derive_seed(master_seed, sample_index)``. Within one sample the draw
order is fixed: human selection, bone angles (config order), background.
Scene descriptions are fully resolved and self-contained, so renderers
and the label stage need nothing beyond the scene JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .camera import CameraSpec
from .config import (
    DEFAULT_CLOTHING_ASSETS,
    DEFAULT_HAIR_ASSETS,
    GenerationConfig,
    HumanSpec,
    LightingPreset,
    validate_config,
)
from .errors import ConfigError
from .rng import SplitMix64, derive_seed


@dataclass(frozen=True)
class Placement:
    """One occupied seat, resolved for rendering and labelling."""

    instance_id: int  # 1-based; doubles as the palette index
    seat_id: str
    human_id: str
    seat_position: tuple[float, float, float]
    seat_ypr_deg: tuple[float, float, float]
    height: float  # human height slider in [0, 1]
    clothing_asset: str
    hair_asset: str

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "seat_id": self.seat_id,
            "human_id": self.human_id,
            "seat_position": list(self.seat_position),
            "seat_ypr_deg": list(self.seat_ypr_deg),
            "height": self.height,
            "clothing_asset": self.clothing_asset,
            "hair_asset": self.hair_asset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        return cls(
            instance_id=int(d["instance_id"]),
            seat_id=d["seat_id"],
            human_id=d["human_id"],
            seat_position=tuple(float(v) for v in d["seat_position"]),
            seat_ypr_deg=tuple(float(v) for v in d.get("seat_ypr_deg", (0.0, 0.0, 0.0))),
            height=float(d.get("height", 0.5)),
            clothing_asset=d.get("clothing_asset", ""),
            hair_asset=d.get("hair_asset", ""),
        )


@dataclass
class SceneDescription:
    """Fully resolved parameters of one sample; the unit of reproducibility."""

    sample_id: int
    derived_seed: int
    placements: list[Placement]
    bone_pose: dict[str, dict[str, float]]  # bone -> axis -> degrees
    background: dict  # {"kind": "hdri", "ref": ...} or {"kind": "light", "preset": {...}}
    camera: CameraSpec
    image_size: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "derived_seed": self.derived_seed,
            "placements": [p.to_dict() for p in self.placements],
            "bone_pose": {b: dict(axes) for b, axes in self.bone_pose.items()},
            "background": self.background,
            "camera": self.camera.to_dict(),
            "image_size": list(self.image_size),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneDescription":
        return cls(
            sample_id=int(d["sample_id"]),
            derived_seed=int(d["derived_seed"]),
            placements=[Placement.from_dict(p) for p in d["placements"]],
            bone_pose={b: {a: float(v) for a, v in axes.items()} for b, axes in d["bone_pose"].items()},
            background=dict(d["background"]),
            camera=CameraSpec.from_dict(d["camera"]),
            image_size=tuple(int(v) for v in d["image_size"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def scene_filename(sample_id: int) -> str:
    return f"scene_{sample_id:06d}.json"


def write_scene(scene: SceneDescription, out_dir) -> Path:
    path = Path(out_dir) / scene_filename(scene.sample_id)
    path.write_text(scene.to_json(), encoding="utf-8", newline="\n")
    return path


def read_scene(path) -> SceneDescription:
    return SceneDescription.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def sample_human_pool(
    ranges: Mapping[str, tuple[float, float]],
    count: int,
    seed: int,
    clothing_assets: Sequence[str] = DEFAULT_CLOTHING_ASSETS,
    hair_assets: Sequence[str] = DEFAULT_HAIR_ASSETS,
) -> list[HumanSpec]:
    """Seeded pool of humans with sliders drawn uniformly from ranges.

    Slider draw order follows the mapping's iteration order, so use the
    same ordering to reproduce a pool.
    """
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    for name, (lo, hi) in ranges.items():
        if not (0.0 <= lo <= hi <= 1.0):
            raise ConfigError(f"slider range {name!r} must satisfy 0 <= min <= max <= 1, got ({lo}, {hi})")
    if not clothing_assets:
        raise ConfigError("clothing_assets list is empty")
    if not hair_assets:
        raise ConfigError("hair_assets list is empty")

    rng = SplitMix64(seed)
    pool = []
    for i in range(count):
        attributes = {name: rng.uniform(lo, hi) for name, (lo, hi) in ranges.items()}
        pool.append(
            HumanSpec(
                human_id=f"human_{i:03d}",
                attributes=attributes,
                clothing_asset=rng.choice(clothing_assets),
                hair_asset=rng.choice(hair_assets),
            )
        )
    return pool


def _instantiate_light(preset: LightingPreset, rng: SplitMix64) -> dict:
    """Resolve a light preset, drawing its intensity when a range is set."""
    resolved = preset.to_dict()
    if preset.intensity_range is not None:
        lo, hi = preset.intensity_range
        resolved["intensity"] = rng.uniform(lo, hi)
        resolved.pop("intensity_range", None)
    return resolved


def sample_scene(config: GenerationConfig, sample_index: int) -> SceneDescription:
    """Resolve one sample from the config; pure in (config, sample_index)."""
    violations = validate_config(config)
    if violations:
        raise ConfigError("invalid config: " + "; ".join(str(v) for v in violations))
    if not (0 <= sample_index < config.sample_count):
        raise IndexError(
            f"sample_index {sample_index} outside [0, {config.sample_count})"
        )

    seed = derive_seed(config.master_seed, sample_index)
    rng = SplitMix64(seed)

    # Selection without replacement; chosen humans fill seats in layout order.
    chosen = rng.sample_indices(len(config.human_pool), config.occupancy)
    placements = []
    for slot_index, human_index in enumerate(chosen):
        seat = config.seat_layout[slot_index]
        human = config.human_pool[human_index]
        placements.append(
            Placement(
                instance_id=slot_index + 1,
                seat_id=seat.seat_id,
                human_id=human.human_id,
                seat_position=seat.position,
                seat_ypr_deg=seat.ypr_deg,
                height=human.attributes.get("height", 0.5),
                clothing_asset=human.clothing_asset,
                hair_asset=human.hair_asset,
            )
        )

    bone_pose: dict[str, dict[str, float]] = {}
    for rr in config.pose_ranges:
        bone_pose.setdefault(rr.bone_name, {})[rr.axis] = rng.uniform(rr.min_deg, rr.max_deg)

    pool_size = len(config.hdri_pool) + len(config.light_presets)
    pick = rng.randrange(pool_size)
    if pick < len(config.hdri_pool):
        background = {"kind": "hdri", "ref": config.hdri_pool[pick]}
    else:
        preset = config.light_presets[pick - len(config.hdri_pool)]
        background = {"kind": "light", "preset": _instantiate_light(preset, rng)}

    return SceneDescription(
        sample_id=sample_index,
        derived_seed=seed,
        placements=placements,
        bone_pose=bone_pose,
        background=background,
        camera=config.camera,
        image_size=tuple(config.image_size),
    )
