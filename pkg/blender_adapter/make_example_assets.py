#!/usr/bin/env python3
"""Generate stand-in assets so the adapter can render the shipped example.

Writes simple OBJ meshes (car floor, blocky passengers) plus small PNG
environment images into an asset root. The meshes are authored in
Blender world axes (Z up, +Y cabin-forward, +X cabin-right) at the
scale the pipeline's proxy bodies use, so engine masks line up with
oracle masks. Real deployments replace these with rigged exports; the
adapter applies bone poses only when an armature is present.

Usage: python3 make_example_assets.py --scene example_scene.json --out assets/
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path


def _box(vertices, faces, center, size):
    cx, cy, cz = center
    sx, sy, sz = (s / 2.0 for s in size)
    base = len(vertices) + 1
    for dx in (-sx, sx):
        for dy in (-sy, sy):
            for dz in (-sz, sz):
                vertices.append((cx + dx, cy + dy, cz + dz))
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5), (0, 2, 6, 4),
        (1, 5, 7, 3), (0, 4, 5, 1), (2, 3, 7, 6),
    ]
    for quad in quads:
        faces.append(tuple(base + i for i in quad))


def write_obj(path: Path, boxes) -> None:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, ...]] = []
    for center, size in boxes:
        _box(vertices, faces, center, size)
    lines = [f"v {x:.6f} {y:.6f} {z:.6f}" for x, y, z in vertices]
    lines += ["f " + " ".join(str(i) for i in face) for face in faces]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_human_obj(path: Path) -> None:
    # blocky passenger at the proxy-body scale: torso then head, Z up
    write_obj(
        path,
        [
            ((0.0, 0.0, 0.30), (0.36, 0.26, 0.56)),
            ((0.0, 0.02, 0.68), (0.18, 0.20, 0.21)),
        ],
    )


def write_car_obj(path: Path) -> None:
    # floor slab plus a dashboard block ahead of the front seats
    write_obj(
        path,
        [
            ((0.0, -0.1, -0.03), (1.9, 2.4, 0.06)),
            ((0.0, 1.15, 0.45), (1.7, 0.3, 0.5)),
        ],
    )


def write_environment_pngs(root: Path, refs) -> None:
    from PIL import Image

    for ref in refs:
        target = (root / ref).with_suffix(".png")
        target.parent.mkdir(parents=True, exist_ok=True)
        shade = 40 + (hash(ref) % 160)
        img = Image.new("RGB", (64, 32))
        for y in range(32):
            for x in range(64):
                img.putpixel((x, y), (shade, (shade + x) % 256, (shade + y * 4) % 256))
        img.save(target)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scene", required=True, help="scene JSON naming the humans to create")
    parser.add_argument("--out", required=True, help="asset root directory to populate")
    args = parser.parse_args()

    scene = json.loads(Path(args.scene).read_text(encoding="utf-8"))
    root = Path(args.out)
    (root / "humans").mkdir(parents=True, exist_ok=True)

    write_car_obj(root / "car.obj")
    for placement in scene["placements"]:
        write_human_obj(root / "humans" / f"{placement['human_id']}.obj")

    refs = []
    if scene["background"]["kind"] == "hdri":
        refs.append(scene["background"]["ref"])
    write_environment_pngs(root, refs)
    print(f"assets written to {root}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
