#!/usr/bin/env python3
"""Headless render backend for cabin scene descriptions.

Consumes one scene JSON (the pipeline's per-sample schema) and produces
the RGB image plus the palette-colored instance mask through Blender's
object-index pass. Invoked by the pipeline as:

    <blender> --background --python adapter.py -- \
        --scene scene_000000.json --assets <dir> --rgb rgb.png --mask mask.png

All randomness lives upstream in the scene sampler; this script is a
pure consumer of the scene schema, so re-rendering a scene JSON always
describes the same 3D world.

Exit codes: 0 success, 2 scene schema problem (message carries the field
path), 3 missing asset (message names the file), 1 engine failure.

The scene-building logic is split into a declarative render *plan*
(pure Python, unit-testable without Blender) and a thin executor that
applies the plan through bpy.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

EXIT_SCHEMA = 2
EXIT_ASSET = 3

# Instance palette for ids 1..8, background black; must match the palette
# recorded in the dataset manifest.
PALETTE = (
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 255, 0),
    (255, 0, 255),
    (0, 255, 255),
    (128, 0, 0),
    (0, 128, 0),
)

HUMAN_ASSET_EXTENSIONS = (".glb", ".gltf", ".obj")
HDRI_ASSET_EXTENSIONS = (".hdr", ".exr", ".png", ".jpg")

# Yaw about +Y (up), pitch about +X, roll about +Z (facing direction),
# intrinsic, in the scene's vehicle frame.


class SceneFormatError(Exception):
    """Scene JSON does not match the schema; carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class MissingAssetError(Exception):
    """A referenced asset file is absent; message names it."""


def parse_args(argv):
    parser = argparse.ArgumentParser(prog="adapter.py", description=__doc__)
    parser.add_argument("--scene", required=True, help="scene description JSON")
    parser.add_argument("--assets", required=True, help="asset root directory")
    parser.add_argument("--rgb", required=True, help="output RGB PNG path")
    parser.add_argument("--mask", required=True, help="output mask PNG path")
    return parser.parse_args(argv)


def _require(data, path, key, kind):
    if key not in data:
        raise SceneFormatError(f"{path}.{key}" if path else key, "missing")
    value = data[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SceneFormatError(f"{path}.{key}" if path else key, "expected a number")
        return float(value)
    if not isinstance(value, kind):
        raise SceneFormatError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return value


def _vector(data, path, key, length):
    raw = _require(data, path, key, list)
    where = f"{path}.{key}" if path else key
    if len(raw) != length or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
    ):
        raise SceneFormatError(where, f"expected {length} numbers")
    return [float(v) for v in raw]


def load_scene(path) -> dict:
    """Read and schema-check a scene JSON; raises SceneFormatError."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SceneFormatError("<file>", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SceneFormatError("<file>", f"not valid JSON: {exc}") from exc

    _require(data, "", "sample_id", int)
    _vector(data, "", "image_size", 2)

    camera = _require(data, "", "camera", dict)
    _require(camera, "camera", "fov_deg", float)
    _require(camera, "camera", "sensor_width_mm", float)
    _vector(camera, "camera", "position", 3)
    _vector(camera, "camera", "image_size", 2)

    placements = _require(data, "", "placements", list)
    for i, placement in enumerate(placements):
        path_i = f"placements[{i}]"
        if not isinstance(placement, dict):
            raise SceneFormatError(path_i, "expected an object")
        iid = _require(placement, path_i, "instance_id", int)
        if not (1 <= iid <= len(PALETTE)):
            raise SceneFormatError(
                f"{path_i}.instance_id", f"must lie in 1..{len(PALETTE)} (palette size)"
            )
        _require(placement, path_i, "human_id", str)
        _vector(placement, path_i, "seat_position", 3)
        _vector(placement, path_i, "seat_ypr_deg", 3)
        _require(placement, path_i, "height", float)

    background = _require(data, "", "background", dict)
    kind = _require(background, "background", "kind", str)
    if kind not in ("hdri", "light"):
        raise SceneFormatError("background.kind", f"unknown kind {kind!r}")
    if kind == "hdri":
        _require(background, "background", "ref", str)
    else:
        _require(background, "background", "preset", dict)

    _require(data, "", "bone_pose", dict)
    return data


def find_human_asset(assets_root, human_id) -> Path:
    base = Path(assets_root) / "humans"
    for ext in HUMAN_ASSET_EXTENSIONS:
        candidate = base / f"{human_id}{ext}"
        if candidate.is_file():
            return candidate
    raise MissingAssetError(
        f"human asset {base / human_id}{{{'|'.join(HUMAN_ASSET_EXTENSIONS)}}} not found"
    )


def find_car_asset(assets_root) -> Path:
    base = Path(assets_root)
    for ext in HUMAN_ASSET_EXTENSIONS:
        candidate = base / f"car{ext}"
        if candidate.is_file():
            return candidate
    raise MissingAssetError(f"car asset {base / 'car'}{{{'|'.join(HUMAN_ASSET_EXTENSIONS)}}} not found")


def find_hdri_asset(assets_root, ref) -> Path:
    base = Path(assets_root) / ref
    for ext in HDRI_ASSET_EXTENSIONS:
        candidate = base.with_suffix(ext)
        if candidate.is_file():
            return candidate
    raise MissingAssetError(
        f"hdri asset {base}{{{'|'.join(HDRI_ASSET_EXTENSIONS)}}} not found"
    )


# --- small matrix helpers (vehicle frame: +Y up, +Z forward, +X left) ----


def _rot_x(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return [[1, 0, 0], [0, c, -s], [0, s, c]]


def _rot_y(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return [[c, 0, s], [0, 1, 0], [-s, 0, c]]


def _rot_z(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return [[c, -s, 0], [s, c, 0], [0, 0, 1]]


def _matmul(a, b):
    return [
        [sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)]
        for i in range(3)
    ]


def _matvec(a, v):
    return [sum(a[i][k] * v[k] for k in range(3)) for i in range(3)]


def rotation_ypr(yaw_deg, pitch_deg, roll_deg):
    return _matmul(_rot_y(yaw_deg), _matmul(_rot_x(pitch_deg), _rot_z(roll_deg)))


# Vehicle frame -> Blender world: vehicle up (+Y) becomes Blender +Z,
# vehicle forward (+Z) becomes Blender +Y, vehicle left (+X) becomes -X.
_VEHICLE_TO_BLENDER = [[-1, 0, 0], [0, 0, 1], [0, 1, 0]]

# Sensor frame (x: pixel u, y: pixel v down, z: optical axis) -> Blender
# camera frame (x: image right, y: image up, z: backward).
_SENSOR_TO_BLENDER_CAM = [[1, 0, 0], [0, -1, 0], [0, 0, -1]]

# Camera sensor base orientation inside its mount (matches the pipeline's
# camera model: at zero angles the camera faces vehicle +Z, image upright).
_SENSOR_IN_MOUNT = [[-1, 0, 0], [0, -1, 0], [0, 0, 1]]


def focal_from_fov(fov_deg, sensor_width_mm):
    return (sensor_width_mm / 2.0) / (2.0 * math.sin(math.radians(fov_deg) / 4.0))


def camera_matrix_blender(camera: dict):
    """4x4 Blender world matrix for the scene camera."""
    mount = rotation_ypr(
        camera.get("yaw_deg", 0.0), camera.get("pitch_deg", 0.0), camera.get("roll_deg", 0.0)
    )
    sensor_to_vehicle = _matmul(mount, _SENSOR_IN_MOUNT)
    rot = _matmul(_VEHICLE_TO_BLENDER, _matmul(sensor_to_vehicle, _SENSOR_TO_BLENDER_CAM))
    pos = _matvec(_VEHICLE_TO_BLENDER, [float(v) for v in camera["position"]])
    return [
        [rot[0][0], rot[0][1], rot[0][2], pos[0]],
        [rot[1][0], rot[1][1], rot[1][2], pos[1]],
        [rot[2][0], rot[2][1], rot[2][2], pos[2]],
        [0.0, 0.0, 0.0, 1.0],
    ]


def object_transform_blender(position, ypr_deg):
    """(location, 3x3 rotation) in Blender world for a vehicle-frame pose."""
    rot_vehicle = rotation_ypr(*ypr_deg)
    rot = _matmul(
        _VEHICLE_TO_BLENDER, _matmul(rot_vehicle, _transpose(_VEHICLE_TO_BLENDER))
    )
    return _matvec(_VEHICLE_TO_BLENDER, list(position)), rot


def _transpose(a):
    return [[a[j][i] for j in range(3)] for i in range(3)]


def make_render_plan(scene: dict, assets_root, rgb_path, mask_path) -> dict:
    """Everything the engine must do, as plain data. Raises on bad input."""
    width, height = (int(v) for v in scene["image_size"])
    camera = scene["camera"]
    focal = camera.get("focal_length_mm") or focal_from_fov(
        float(camera["fov_deg"]), float(camera["sensor_width_mm"])
    )

    objects = [
        {
            "name": "car",
            "path": str(find_car_asset(assets_root)),
            "location": object_transform_blender((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))[0],
            "rotation": object_transform_blender((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))[1],
            "scale": 1.0,
            "pass_index": 0,
            "bone_pose": {},
        }
    ]
    for placement in scene["placements"]:
        location, rotation = object_transform_blender(
            placement["seat_position"], placement["seat_ypr_deg"]
        )
        objects.append(
            {
                "name": f"passenger_{placement['instance_id']}",
                "path": str(find_human_asset(assets_root, placement["human_id"])),
                "location": location,
                "rotation": rotation,
                "scale": 0.80 + 0.40 * float(placement["height"]),
                "pass_index": int(placement["instance_id"]),
                "bone_pose": scene.get("bone_pose", {}),
            }
        )

    background = scene["background"]
    if background["kind"] == "hdri":
        world = {
            "kind": "hdri",
            "image": str(find_hdri_asset(assets_root, background["ref"])),
        }
    else:
        preset = background["preset"]
        world = {
            "kind": "light",
            "light_type": preset.get("kind", "point"),
            "intensity": float(preset.get("intensity", 1.0)),
            "position": _matvec(
                _VEHICLE_TO_BLENDER, [float(v) for v in preset.get("position", (0, 2, 0))]
            ),
            "direction": _matvec(
                _VEHICLE_TO_BLENDER, [float(v) for v in preset.get("direction", (0, -1, 0))]
            ),
            "cone_angle_deg": preset.get("cone_angle_deg"),
            "area_size": preset.get("area_size"),
        }

    return {
        "resolution": (width, height),
        "camera": {
            "matrix": camera_matrix_blender(camera),
            "focal_mm": float(focal),
            "fov_rad": math.radians(float(camera["fov_deg"])),
            "sensor_width_mm": float(camera["sensor_width_mm"]),
        },
        "objects": objects,
        "world": world,
        "mask_entries": [
            {"index": int(p["instance_id"]), "color": PALETTE[int(p["instance_id"]) - 1]}
            for p in scene["placements"]
        ],
        "outputs": {"rgb": str(rgb_path), "mask": str(mask_path)},
    }


# --- bpy execution -------------------------------------------------------


def _import_asset(bpy, path: str) -> list:
    """Import an asset file; returns the newly added objects."""
    before = set(bpy.data.objects)
    lower = path.lower()
    if lower.endswith((".glb", ".gltf")):
        bpy.ops.import_scene.gltf(filepath=path)
    elif lower.endswith(".obj"):
        if hasattr(bpy.ops.wm, "obj_import"):
            bpy.ops.wm.obj_import(filepath=path)
        else:
            bpy.ops.import_scene.obj(filepath=path)
    else:
        raise MissingAssetError(f"unsupported asset format: {path}")
    return [obj for obj in bpy.data.objects if obj not in before]


def _apply_bone_pose(imported, bone_pose: dict) -> None:
    """Rotate named bones on any imported armature (CMU-style rig).

    vertical -> pitch (local X), horizontal -> yaw (local Y),
    roll -> roll (local Z). Assets without an armature render in their
    rest pose; masks and boxes stay exact either way.
    """
    for obj in imported:
        if getattr(obj, "type", None) != "ARMATURE" or not getattr(obj, "pose", None):
            continue
        for bone_name, axes in bone_pose.items():
            bone = obj.pose.bones.get(bone_name)
            if bone is None:
                continue
            bone.rotation_mode = "XYZ"
            bone.rotation_euler = (
                math.radians(axes.get("vertical", 0.0)),
                math.radians(axes.get("horizontal", 0.0)),
                math.radians(axes.get("roll", 0.0)),
            )


def _setup_camera(bpy, plan) -> None:
    cam_data = bpy.data.cameras.new("scene_camera")
    cam_data.type = "PANO"
    cam_data.sensor_width = plan["camera"]["sensor_width_mm"]
    # fisheye controls moved from cam_data.cycles to cam_data in Blender 4.0
    fisheye = cam_data if hasattr(cam_data, "fisheye_lens") else cam_data.cycles
    fisheye.panorama_type = "FISHEYE_EQUISOLID"
    fisheye.fisheye_lens = plan["camera"]["focal_mm"]
    fisheye.fisheye_fov = plan["camera"]["fov_rad"]

    cam_obj = bpy.data.objects.new("scene_camera", cam_data)
    bpy.context.scene.collection.objects.link(cam_obj)
    cam_obj.matrix_world = plan["camera"]["matrix"]
    bpy.context.scene.camera = cam_obj


def _setup_world(bpy, plan) -> None:
    scene = bpy.context.scene
    world = bpy.data.worlds.new("scene_world")
    scene.world = world
    world.use_nodes = True
    if plan["world"]["kind"] == "hdri":
        tree = world.node_tree
        env = tree.nodes.new("ShaderNodeTexEnvironment")
        env.image = bpy.data.images.load(plan["world"]["image"])
        background = tree.nodes["Background"]
        tree.links.new(env.outputs["Color"], background.inputs["Color"])
        return

    # light preset: dark world plus one explicit light
    spec = plan["world"]
    type_map = {"point": "POINT", "spot": "SPOT", "directional": "SUN", "area": "AREA"}
    light_data = bpy.data.lights.new("scene_light", type_map.get(spec["light_type"], "POINT"))
    light_data.energy = spec["intensity"]
    if spec["light_type"] == "spot" and spec.get("cone_angle_deg"):
        light_data.spot_size = math.radians(spec["cone_angle_deg"])
    if spec["light_type"] == "area" and spec.get("area_size"):
        light_data.size, light_data.size_y = spec["area_size"]
    light_obj = bpy.data.objects.new("scene_light", light_data)
    scene.collection.objects.link(light_obj)
    light_obj.location = spec["position"]


def _setup_compositor(bpy, plan, temp_dir) -> None:
    """Object-index pass recolored with the palette via ID Mask nodes."""
    scene = bpy.context.scene
    scene.view_layers[0].use_pass_object_index = True
    scene.use_nodes = True
    tree = scene.node_tree
    for node in list(tree.nodes):
        tree.nodes.remove(node)

    layers = tree.nodes.new("CompositorNodeRLayers")
    composite = tree.nodes.new("CompositorNodeComposite")
    tree.links.new(layers.outputs["Image"], composite.inputs["Image"])

    accumulated = None
    for entry in plan["mask_entries"]:
        id_mask = tree.nodes.new("CompositorNodeIDMask")
        id_mask.index = entry["index"]
        id_mask.use_antialiasing = False
        tree.links.new(layers.outputs["IndexOB"], id_mask.inputs["ID value"])

        tint = tree.nodes.new("CompositorNodeMixRGB")
        tint.blend_type = "MULTIPLY"
        tint.inputs[1].default_value = (
            entry["color"][0] / 255.0,
            entry["color"][1] / 255.0,
            entry["color"][2] / 255.0,
            1.0,
        )
        tree.links.new(id_mask.outputs["Alpha"], tint.inputs[2])

        if accumulated is None:
            accumulated = tint
        else:
            add = tree.nodes.new("CompositorNodeMixRGB")
            add.blend_type = "ADD"
            tree.links.new(accumulated.outputs["Image"], add.inputs[1])
            tree.links.new(tint.outputs["Image"], add.inputs[2])
            accumulated = add

    output = tree.nodes.new("CompositorNodeOutputFile")
    output.base_path = str(temp_dir)
    output.format.file_format = "PNG"
    output.format.color_mode = "RGB"
    output.format.color_depth = "8"
    output.file_slots[0].path = "mask_"
    if accumulated is not None:
        tree.links.new(accumulated.outputs["Image"], output.inputs[0])
    else:
        # zero passengers: emit pure background
        black = tree.nodes.new("CompositorNodeRGB")
        black.outputs[0].default_value = (0.0, 0.0, 0.0, 1.0)
        tree.links.new(black.outputs[0], output.inputs[0])


def apply_plan(bpy, plan) -> None:
    """Drive bpy through the plan and write both output files."""
    bpy.ops.wm.read_factory_settings(use_empty=True)
    scene = bpy.context.scene
    scene.render.engine = "CYCLES"
    scene.render.resolution_x, scene.render.resolution_y = plan["resolution"]
    scene.render.resolution_percentage = 100
    scene.render.image_settings.file_format = "PNG"
    scene.render.image_settings.color_mode = "RGB"
    scene.render.dither_intensity = 0.0
    scene.cycles.samples = 16
    scene.view_settings.view_transform = "Standard"

    for spec in plan["objects"]:
        imported = _import_asset(bpy, spec["path"])
        for obj in imported:
            obj.matrix_world = _to_matrix4(spec["rotation"], spec["location"], spec["scale"])
            obj.pass_index = spec["pass_index"]
        if spec["bone_pose"]:
            _apply_bone_pose(imported, spec["bone_pose"])

    _setup_camera(bpy, plan)
    _setup_world(bpy, plan)

    rgb_path = Path(plan["outputs"]["rgb"])
    mask_path = Path(plan["outputs"]["mask"])
    temp_dir = mask_path.parent
    _setup_compositor(bpy, plan, temp_dir)

    scene.render.filepath = str(rgb_path)
    bpy.ops.render.render(write_still=True)

    # the file-output node appends the frame number; move to the exact name
    frame = scene.frame_current
    produced = temp_dir / f"mask_{frame:04d}.png"
    if produced.is_file():
        produced.replace(mask_path)


def _to_matrix4(rotation, location, scale):
    return [
        [rotation[0][0] * scale, rotation[0][1] * scale, rotation[0][2] * scale, location[0]],
        [rotation[1][0] * scale, rotation[1][1] * scale, rotation[1][2] * scale, location[1]],
        [rotation[2][0] * scale, rotation[2][1] * scale, rotation[2][2] * scale, location[2]],
        [0.0, 0.0, 0.0, 1.0],
    ]


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv
        argv = argv[argv.index("--") + 1 :] if "--" in argv else argv[1:]
    args = parse_args(argv)
    try:
        scene = load_scene(args.scene)
        plan = make_render_plan(scene, args.assets, args.rgb, args.mask)
    except SceneFormatError as exc:
        print(f"scene schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except MissingAssetError as exc:
        print(f"missing asset: {exc}", file=sys.stderr)
        return EXIT_ASSET

    import bpy  # only available inside Blender (or with the bpy wheel)

    apply_plan(bpy, plan)
    return 0


if __name__ == "__main__":
    sys.exit(main())
