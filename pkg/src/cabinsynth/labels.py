"""Annotation assembly and the dataset's on-disk label formats.

Per sample: a bbox text file (exact grammar below) and entries in one
dataset manifest JSON. Bbox text grammar, byte-exact:

    # sample <sample_id>
    <instance_id> <x> <y> <w> <h>

one line per instance in ascending instance id, single ASCII spaces,
base-10 integers, LF line endings, trailing LF, nothing else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera import CameraSpec, distance_to_camera, project
from .config import GenerationConfig, config_digest
from .contours import BoundingBox
from .errors import DataMismatchError, IncompleteSceneError, ParseError
from .geometry import rotation_ypr
from .masks import DEFAULT_PALETTE, instance_bboxes, mask_filename, rgb_filename
from .morphology import StructuringElement
from .sampler import SceneDescription

VISIBLE = "visible"
OCCLUDED = "occluded"
OUTSIDE_FRAME = "outside_frame"

HEAD_JOINT = "head"
JOINT_SET = ("head", "torso")
_HEAD_CHAIN = ("neck", "head")


@dataclass(frozen=True)
class Keypoint2D:
    name: str
    u: float
    v: float
    visibility: str  # visible | occluded | outside_frame

    def to_dict(self) -> dict:
        return {"name": self.name, "u": self.u, "v": self.v, "visibility": self.visibility}


@dataclass
class InstanceAnnotation:
    instance_id: int
    human_id: str
    seat_id: str
    bbox: BoundingBox
    keypoints: list[Keypoint2D]
    distance_m: float
    head_pose: dict[str, float]  # yaw/pitch/roll degrees
    gaze_dir: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "human_id": self.human_id,
            "seat_id": self.seat_id,
            "bbox": list(self.bbox.as_tuple()),
            "keypoints": [k.to_dict() for k in self.keypoints],
            "distance_m": self.distance_m,
            "head_pose": dict(self.head_pose),
            "gaze_dir": list(self.gaze_dir),
        }


@dataclass
class SampleAnnotation:
    sample_id: int
    derived_seed: int
    image_ref: str
    mask_ref: str
    instances: list[InstanceAnnotation] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "derived_seed": self.derived_seed,
            "image": self.image_ref,
            "mask": self.mask_ref,
            "labels": labels_filename(self.sample_id),
            "instances": [i.to_dict() for i in self.instances],
        }


def head_pose_of(scene: SceneDescription) -> dict[str, float]:
    """Yaw/pitch/roll of the head/neck chain from the sampled bone pose.

    Chain angles add per axis; horizontal maps to yaw, vertical to
    pitch. With only the neck configured this is a pass-through.
    """
    yaw = pitch = roll = 0.0
    for bone in _HEAD_CHAIN:
        axes = scene.bone_pose.get(bone, {})
        yaw += axes.get("horizontal", 0.0)
        pitch += axes.get("vertical", 0.0)
        roll += axes.get("roll", 0.0)
    return {"yaw": yaw, "pitch": pitch, "roll": roll}


def _gaze_direction(placement, head_pose) -> tuple[float, float, float]:
    """Head-forward unit ray in the vehicle frame (no eye model)."""
    r = rotation_ypr(*placement.seat_ypr_deg) @ rotation_ypr(
        head_pose["yaw"], head_pose["pitch"], head_pose["roll"]
    )
    fwd = r @ np.array([0.0, 0.0, 1.0])
    return (float(fwd[0]), float(fwd[1]), float(fwd[2]))


def build_annotations(
    scene: SceneDescription,
    mask,
    camera: CameraSpec,
    joints_3d: dict[tuple[int, str], np.ndarray],
    se: StructuringElement = StructuringElement(3),
) -> SampleAnnotation:
    """Combine scene, cleaned mask, and camera into one sample's labels.

    Instances with no mask pixels (fully hidden) carry no record. Joint
    visibility is a single mask lookup at the rounded projection.
    """
    m = np.asarray(mask)
    if m.shape != (camera.height, camera.width):
        raise DataMismatchError(
            f"mask is {m.shape[1]}x{m.shape[0]} but the camera expects "
            f"{camera.width}x{camera.height}"
        )

    missing = [
        (p.instance_id, joint)
        for p in scene.placements
        for joint in JOINT_SET
        if (p.instance_id, joint) not in joints_3d
    ]
    if missing:
        raise IncompleteSceneError(f"missing 3D joints for placed instances: {missing}")

    boxes = instance_bboxes(m, se)
    head_pose = head_pose_of(scene)

    annotation = SampleAnnotation(
        sample_id=scene.sample_id,
        derived_seed=scene.derived_seed,
        image_ref=rgb_filename(scene.sample_id),
        mask_ref=mask_filename(scene.sample_id),
    )
    for p in scene.placements:
        if p.instance_id not in boxes:
            continue
        keypoints = []
        for joint in JOINT_SET:
            point = joints_3d[(p.instance_id, joint)]
            pix = project(point, camera)
            if not pix.valid:
                vis = OUTSIDE_FRAME
            else:
                iu = min(int(round(pix.u)), camera.width - 1)
                iv = min(int(round(pix.v)), camera.height - 1)
                vis = VISIBLE if int(m[iv, iu]) == p.instance_id else OCCLUDED
            keypoints.append(Keypoint2D(joint, pix.u, pix.v, vis))

        annotation.instances.append(
            InstanceAnnotation(
                instance_id=p.instance_id,
                human_id=p.human_id,
                seat_id=p.seat_id,
                bbox=boxes[p.instance_id],
                keypoints=keypoints,
                distance_m=distance_to_camera(joints_3d[(p.instance_id, HEAD_JOINT)], camera),
                head_pose=head_pose,
                gaze_dir=_gaze_direction(p, head_pose),
            )
        )
    return annotation


def labels_filename(sample_id: int) -> str:
    return f"labels_{sample_id:06d}.txt"


def write_bbox_textfile(annotation: SampleAnnotation, path) -> None:
    """Write the bbox text file, byte-exact per the module grammar."""
    lines = [f"# sample {annotation.sample_id}\n"]
    for inst in sorted(annotation.instances, key=lambda i: i.instance_id):
        b = inst.bbox
        lines.append(f"{inst.instance_id} {b.x} {b.y} {b.w} {b.h}\n")
    Path(path).write_bytes("".join(lines).encode("ascii"))


def parse_bbox_textfile(path) -> list[tuple[int, BoundingBox]]:
    """Exact inverse of write_bbox_textfile on well-formed files."""
    raw = Path(path).read_bytes()
    if not raw:
        raise ParseError("empty bbox file", line=1)
    text = raw.decode("ascii", errors="strict") if raw.isascii() else None
    if text is None:
        raise ParseError("bbox file contains non-ASCII bytes", line=1)
    if not text.endswith("\n"):
        raise ParseError("missing trailing newline", line=text.count("\n") + 1)

    lines = text.split("\n")[:-1]
    header = lines[0] if lines else ""
    parts = header.split(" ")
    if len(parts) != 3 or parts[0] != "#" or parts[1] != "sample" or not parts[2].isdigit():
        raise ParseError(f"bad header {header!r}, expected '# sample <id>'", line=1)

    records: list[tuple[int, BoundingBox]] = []
    for n, line in enumerate(lines[1:], start=2):
        fields = line.split(" ")
        if len(fields) != 5 or not all(f.isdigit() for f in fields):
            raise ParseError(f"bad bbox line {line!r}", line=n)
        iid, x, y, w, h = (int(f) for f in fields)
        try:
            records.append((iid, BoundingBox(x, y, w, h)))
        except ValueError as exc:
            raise ParseError(str(exc), line=n) from exc
    return records


def manifest_filename() -> str:
    return "manifest.json"


def write_manifest(
    config: GenerationConfig,
    annotations: list[SampleAnnotation],
    path,
    created_utc: str = "",
    palette=DEFAULT_PALETTE,
) -> None:
    """One dataset manifest: seeds, palette, camera, config digest, samples.

    ``created_utc`` is the only non-reproducible field; comparisons of
    regenerated datasets must exclude it.
    """
    manifest = {
        "format": "cabinsynth-manifest-v1",
        "created_utc": created_utc,
        "master_seed": config.master_seed,
        "sample_count": config.sample_count,
        "config_digest": config_digest(config),
        "palette": [list(rgb) for rgb in palette],
        "camera": config.camera.to_dict(),
        "samples": [a.to_dict() for a in sorted(annotations, key=lambda a: a.sample_id)],
    }
    Path(path).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8", newline="\n"
    )


def read_manifest(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
