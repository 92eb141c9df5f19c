"""Command-line pipeline driver.

Stages: gen-scenes -> render -> annotate, plus run (all three),
validate (re-check a dataset from its files alone) and stats
(distribution report). Exit codes: 0 ok, 1 validation failure,
2 config problem, 3 backend unavailable/failed, 4 data mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import GenerationConfig, load_config, validate_config
from .errors import (
    BackendError,
    CabinSynthError,
    ConfigError,
    DataMismatchError,
    ParseError,
)
from .labels import (
    build_annotations,
    labels_filename,
    manifest_filename,
    parse_bbox_textfile,
    read_manifest,
    write_bbox_textfile,
    write_manifest,
)
from .masks import (
    DEFAULT_PALETTE,
    instance_bboxes,
    mask_filename,
    read_mask_png,
    rgb_filename,
    write_mask_png,
    write_rgb_png,
)
from .oracle import joints_of, rasterize, render_rgb
from .rng import derive_seed
from .sampler import read_scene, sample_scene, scene_filename, write_scene

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_DATA = 4

BLENDER_ENV = "CABINSYNTH_BLENDER"
ADAPTER_ENV = "CABINSYNTH_BLENDER_ADAPTER"
ASSETS_ENV = "CABINSYNTH_ASSETS"


def _pmap(fn, items, jobs: int) -> list:
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _load_config(args) -> GenerationConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config.master_seed = args.seed
    if getattr(args, "count", None) is not None:
        config.sample_count = args.count
    violations = validate_config(config)
    if violations:
        raise ConfigError("invalid config:\n" + "\n".join(f"  {v}" for v in violations))
    return config


def _scene_paths(out_dir: Path) -> list[Path]:
    return sorted(out_dir.glob("scene_[0-9][0-9][0-9][0-9][0-9][0-9].json"))


def cmd_gen_scenes(config: GenerationConfig, out_dir: Path, jobs: int) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(index: int) -> None:
        write_scene(sample_scene(config, index), out_dir)

    _pmap(one, range(config.sample_count), jobs)
    print(f"wrote {config.sample_count} scene files to {out_dir}")
    return EXIT_OK


def _render_oracle(scene_path: Path, out_dir: Path) -> None:
    scene = read_scene(scene_path)
    write_mask_png(out_dir / mask_filename(scene.sample_id), rasterize(scene), DEFAULT_PALETTE)
    write_rgb_png(out_dir / rgb_filename(scene.sample_id), render_rgb(scene))


def _blender_command(args) -> tuple[str, str, str]:
    engine = args.engine or os.environ.get(BLENDER_ENV) or shutil.which("blender")
    if not engine or not (shutil.which(engine) or Path(engine).is_file()):
        raise BackendError(
            "blender backend unavailable: no executable found. Install Blender and "
            f"set {BLENDER_ENV}=/path/to/blender (or pass --engine)."
        )
    adapter = args.adapter or os.environ.get(ADAPTER_ENV)
    if not adapter or not Path(adapter).is_file():
        raise BackendError(
            f"blender backend unavailable: adapter script not found. Set {ADAPTER_ENV} "
            "to the adapter.py shipped with the blender_adapter package (or pass --adapter)."
        )
    assets = args.assets or os.environ.get(ASSETS_ENV)
    if not assets or not Path(assets).is_dir():
        raise BackendError(
            f"blender backend unavailable: asset directory not found. Set {ASSETS_ENV} "
            "to the directory holding the car/human assets (or pass --assets)."
        )
    return engine, adapter, assets


def _render_blender(scene_path: Path, out_dir: Path, engine: str, adapter: str, assets: str) -> None:
    scene = read_scene(scene_path)
    cmd = [
        engine,
        "--background",
        "--python",
        adapter,
        "--",
        "--scene",
        str(scene_path),
        "--assets",
        assets,
        "--rgb",
        str(out_dir / rgb_filename(scene.sample_id)),
        "--mask",
        str(out_dir / mask_filename(scene.sample_id)),
    ]
    result = subprocess.run(cmd, capture_output=True, text=True)
    if result.returncode != 0:
        raise BackendError(
            f"blender render failed for {scene_path.name} (exit {result.returncode}):\n"
            + result.stderr.strip()
        )


def cmd_render(args, out_dir: Path, jobs: int) -> int:
    scene_paths = _scene_paths(out_dir)
    if args.backend == "oracle":
        _pmap(lambda p: _render_oracle(p, out_dir), scene_paths, jobs)
    else:
        engine, adapter, assets = _blender_command(args)
        _pmap(lambda p: _render_blender(p, out_dir, engine, adapter, assets), scene_paths, jobs)
    print(f"rendered {len(scene_paths)} samples with backend={args.backend}")
    return EXIT_OK


def cmd_annotate(config: GenerationConfig, out_dir: Path, jobs: int) -> int:
    scene_paths = _scene_paths(out_dir)

    def one(scene_path: Path):
        scene = read_scene(scene_path)
        mask_path = out_dir / mask_filename(scene.sample_id)
        if not mask_path.is_file():
            raise DataMismatchError(f"sample {scene.sample_id}: mask file {mask_path.name} is missing")
        ids, unknown = read_mask_png(mask_path, DEFAULT_PALETTE)
        if unknown:
            raise DataMismatchError(
                f"sample {scene.sample_id}: mask has {unknown} pixels outside the palette"
            )
        annotation = build_annotations(scene, ids, scene.camera, joints_of(scene))
        write_bbox_textfile(annotation, out_dir / labels_filename(scene.sample_id))
        return annotation

    annotations = _pmap(one, scene_paths, jobs)
    created = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    write_manifest(config, annotations, out_dir / manifest_filename(), created_utc=created)
    print(f"annotated {len(annotations)} samples; manifest written")
    return EXIT_OK


def cmd_validate(out_dir: Path) -> int:
    problems: list[str] = []
    manifest_path = out_dir / manifest_filename()
    if not manifest_path.is_file():
        print(f"FAIL {manifest_filename()}: missing", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        manifest = read_manifest(manifest_path)
    except ParseError as exc:
        print(f"FAIL {manifest_filename()}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    master_seed = int(manifest.get("master_seed", 0))
    palette = [tuple(rgb) for rgb in manifest.get("palette", DEFAULT_PALETTE)]

    for record in manifest.get("samples", []):
        sid = int(record["sample_id"])
        label_name = record.get("labels", labels_filename(sid))
        problems.extend(_validate_sample(out_dir, record, sid, label_name, master_seed, palette))

    for line in problems:
        print(f"FAIL {line}", file=sys.stderr)
    if problems:
        print(f"validation failed: {len(problems)} problem(s)", file=sys.stderr)
        return EXIT_VALIDATION
    print("validation ok")
    return EXIT_OK


def _validate_sample(out_dir, record, sid, label_name, master_seed, palette) -> list[str]:
    problems = []

    if derive_seed(master_seed, sid) != int(record["derived_seed"]):
        problems.append(f"manifest sample {sid}: derived_seed does not match the master seed")

    scene_path = out_dir / scene_filename(sid)
    scene = None
    if scene_path.is_file():
        scene = read_scene(scene_path)
        if scene.derived_seed != int(record["derived_seed"]):
            problems.append(f"{scene_path.name}: derived_seed disagrees with manifest")
    else:
        problems.append(f"{scene_path.name}: missing")

    label_path = out_dir / label_name
    records = None
    if label_path.is_file():
        try:
            records = parse_bbox_textfile(label_path)
            header = label_path.read_text(encoding="ascii").split("\n", 1)[0]
            if header != f"# sample {sid}":
                problems.append(f"{label_name} line 1: header {header!r} does not name sample {sid}")
        except (ParseError, UnicodeDecodeError) as exc:
            problems.append(f"{label_name}: {exc}")
    else:
        problems.append(f"{label_name}: missing")

    manifest_boxes = {int(i["instance_id"]): tuple(i["bbox"]) for i in record.get("instances", [])}
    if records is not None:
        file_boxes = {iid: b.as_tuple() for iid, b in records}
        if file_boxes != manifest_boxes:
            problems.append(f"{label_name}: bbox records disagree with manifest")

    mask_path = out_dir / record.get("mask", mask_filename(sid))
    if mask_path.is_file():
        ids, unknown = read_mask_png(mask_path, palette)
        if unknown:
            problems.append(f"{mask_path.name}: {unknown} pixels outside the palette")
        if scene is not None and ids.shape != (scene.image_size[1], scene.image_size[0]):
            problems.append(f"{mask_path.name}: size {ids.shape} disagrees with scene image_size")
        derived = {iid: b.as_tuple() for iid, b in instance_bboxes(ids).items()}
        if records is not None:
            for line_no, (iid, box) in enumerate(records, start=2):
                if derived.get(iid) != box.as_tuple():
                    problems.append(
                        f"{label_name} line {line_no}: bbox {box.as_tuple()} does not match "
                        f"mask-derived {derived.get(iid)}"
                    )
            if set(derived) != {iid for iid, _ in records}:
                problems.append(f"{label_name}: instance ids disagree with mask {sorted(derived)}")
        h, w = ids.shape
        for iid, box in records or []:
            x, y, bw, bh = box.as_tuple()
            if x + bw > w or y + bh > h:
                problems.append(f"{label_name}: bbox of instance {iid} exceeds the frame")
    else:
        problems.append(f"{mask_path.name}: missing")

    return problems


def cmd_stats(out_dir: Path) -> int:
    manifest_path = out_dir / manifest_filename()
    if not manifest_path.is_file():
        raise DataMismatchError(f"no manifest at {manifest_path}; run annotate first")
    manifest = read_manifest(manifest_path)

    human_counts: dict[str, int] = {}
    seat_counts: dict[str, int] = {}
    angles: dict[str, list[float]] = {}
    for record in manifest.get("samples", []):
        scene = read_scene(out_dir / scene_filename(int(record["sample_id"])))
        for p in scene.placements:
            human_counts[p.human_id] = human_counts.get(p.human_id, 0) + 1
            seat_counts[p.seat_id] = seat_counts.get(p.seat_id, 0) + 1
        for bone, axes in scene.bone_pose.items():
            for axis, value in axes.items():
                angles.setdefault(f"{bone}.{axis}", []).append(value)

    bone_stats = {}
    for key, values in sorted(angles.items()):
        arr = np.asarray(values)
        hist, edges = np.histogram(arr, bins=20)
        bone_stats[key] = {
            "count": int(arr.size),
            "min": float(arr.min()),
            "max": float(arr.max()),
            "mean": float(arr.mean()),
            "histogram": hist.tolist(),
            "bin_edges": edges.tolist(),
        }

    stats = {
        "sample_count": len(manifest.get("samples", [])),
        "human_counts": dict(sorted(human_counts.items())),
        "seat_counts": dict(sorted(seat_counts.items())),
        "bone_angles": bone_stats,
    }
    (out_dir / "stats.json").write_text(
        json.dumps(stats, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    print(f"samples: {stats['sample_count']}")
    print(f"{'human':<12} {'count':>6}")
    for hid, count in stats["human_counts"].items():
        print(f"{hid:<12} {count:>6}")
    print(f"{'seat':<12} {'count':>6}")
    for seat, count in stats["seat_counts"].items():
        print(f"{seat:<12} {count:>6}")
    for key, entry in bone_stats.items():
        print(
            f"{key}: n={entry['count']} min={entry['min']:.3f} "
            f"max={entry['max']:.3f} mean={entry['mean']:.3f}"
        )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cabinsynth",
        description="Seeded synthetic in-cabin occupancy dataset generator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, backend=False, overrides=False):
        sp.add_argument("--config", help="generation config JSON")
        sp.add_argument("--out", required=True, help="dataset directory")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
        if overrides:
            sp.add_argument("--seed", type=int, help="override the config master_seed")
            sp.add_argument("--count", type=int, help="override the config sample_count")
        if backend:
            sp.add_argument("--backend", choices=("oracle", "blender"), default="oracle")
            sp.add_argument("--engine", help="blender executable (or set $" + BLENDER_ENV + ")")
            sp.add_argument("--adapter", help="adapter script (or set $" + ADAPTER_ENV + ")")
            sp.add_argument("--assets", help="asset directory (or set $" + ASSETS_ENV + ")")

    common(sub.add_parser("gen-scenes", help="sample and write scene JSON files"), overrides=True)
    common(sub.add_parser("render", help="render RGB + mask per scene"), backend=True)
    common(sub.add_parser("annotate", help="build labels and the manifest"))
    common(sub.add_parser("run", help="gen-scenes, render, annotate"), backend=True, overrides=True)
    common(sub.add_parser("validate", help="re-check a dataset from its files"))
    common(sub.add_parser("stats", help="distribution report for a dataset"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    jobs = max(1, getattr(args, "jobs", 1) or 1)

    try:
        if args.command == "gen-scenes":
            return cmd_gen_scenes(_load_config(args), out_dir, jobs)
        if args.command == "render":
            return cmd_render(args, out_dir, jobs)
        if args.command == "annotate":
            return cmd_annotate(_load_config(args), out_dir, jobs)
        if args.command == "run":
            config = _load_config(args)
            code = cmd_gen_scenes(config, out_dir, jobs)
            if code == EXIT_OK:
                code = cmd_render(args, out_dir, jobs)
            if code == EXIT_OK:
                code = cmd_annotate(config, out_dir, jobs)
            return code
        if args.command == "validate":
            return cmd_validate(out_dir)
        if args.command == "stats":
            return cmd_stats(out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (DataMismatchError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CabinSynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
