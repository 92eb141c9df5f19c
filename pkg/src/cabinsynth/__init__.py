"""Seeded generator of annotated synthetic in-cabin occupancy samples.

Pipeline: sample randomized scene descriptions from a config, render
them (pluggable backend; a built-in CPU rasterizer ships for tests and
CI), then post-process instance masks into exact labels: bounding
boxes, keypoints with visibility, head pose, and camera distances.
"""

from .camera import CameraSpec, PixelPoint, distance_to_camera, focal_from_fov, project, unproject
from .config import (
    GenerationConfig,
    HumanSpec,
    LightingPreset,
    RotationRange,
    SeatSlot,
    Violation,
    default_config,
    load_config,
    save_config,
    validate_config,
)
from .contours import BoundingBox, approx_polygon, bbox_of, trace_contours
from .labels import (
    Keypoint2D,
    SampleAnnotation,
    build_annotations,
    parse_bbox_textfile,
    write_bbox_textfile,
    write_manifest,
)
from .masks import DEFAULT_PALETTE, instance_bboxes, palette_render, palette_split
from .morphology import StructuringElement, close, dilate, erode
from .oracle import ProxyBody, inject_holes, joints_of, rasterize
from .rng import SplitMix64, derive_seed
from .sampler import Placement, SceneDescription, sample_human_pool, sample_scene

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CameraSpec",
    "DEFAULT_PALETTE",
    "GenerationConfig",
    "HumanSpec",
    "Keypoint2D",
    "LightingPreset",
    "PixelPoint",
    "Placement",
    "ProxyBody",
    "RotationRange",
    "SampleAnnotation",
    "SceneDescription",
    "SeatSlot",
    "SplitMix64",
    "StructuringElement",
    "Violation",
    "approx_polygon",
    "bbox_of",
    "build_annotations",
    "close",
    "default_config",
    "derive_seed",
    "dilate",
    "distance_to_camera",
    "erode",
    "focal_from_fov",
    "inject_holes",
    "instance_bboxes",
    "joints_of",
    "load_config",
    "palette_render",
    "palette_split",
    "parse_bbox_textfile",
    "project",
    "rasterize",
    "sample_human_pool",
    "sample_scene",
    "save_config",
    "trace_contours",
    "unproject",
    "validate_config",
    "write_bbox_textfile",
    "write_manifest",
]
