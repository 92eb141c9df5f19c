"""Deterministic CPU rasterizer over ellipsoid passenger proxies.

Builds torso+head ellipsoids per placement, casts one ray per pixel
center through the fisheye camera, and writes the nearest instance id
per pixel. No 3D engine involved, so the full pipeline stays testable
with closed-form expectations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraSpec, unproject_grid
from .geometry import rotation_ypr
from .masks import DEFAULT_PALETTE, palette_render
from .rng import SplitMix64, mix64
from .sampler import SceneDescription

_T_MIN = 1e-9


@dataclass(frozen=True)
class Ellipsoid:
    center: np.ndarray  # (3,)
    semi_axes: np.ndarray  # (3,), all > 0
    rotation: np.ndarray  # (3, 3) local-to-world


@dataclass(frozen=True)
class ProxyBody:
    instance_id: int
    ellipsoids: tuple[Ellipsoid, ...]  # torso, head


def proxy_bodies(scene: SceneDescription) -> list[ProxyBody]:
    """Torso and head ellipsoids per placement.

    Sizes scale with the human height slider; the head sits above the
    torso along the seat's up axis and tilts with the sampled neck
    angles (vertical -> pitch, horizontal -> yaw, roll -> roll).
    """
    neck = scene.bone_pose.get("neck", {})
    r_neck = rotation_ypr(
        neck.get("horizontal", 0.0), neck.get("vertical", 0.0), neck.get("roll", 0.0)
    )
    bodies = []
    for p in scene.placements:
        s = 0.80 + 0.40 * p.height
        r_seat = rotation_ypr(*p.seat_ypr_deg)
        seat_pos = np.asarray(p.seat_position, dtype=float)
        up = r_seat @ np.array([0.0, 1.0, 0.0])

        torso = Ellipsoid(
            center=seat_pos + 0.30 * s * up,
            semi_axes=np.array([0.20, 0.30, 0.14]) * s,
            rotation=r_seat,
        )
        r_head = r_seat @ r_neck
        neck_pivot = seat_pos + 0.58 * s * up
        head = Ellipsoid(
            center=neck_pivot + r_head @ np.array([0.0, 0.10 * s, 0.0]),
            semi_axes=np.array([0.09, 0.11, 0.10]) * s,
            rotation=r_head,
        )
        bodies.append(ProxyBody(instance_id=p.instance_id, ellipsoids=(torso, head)))
    return bodies


def _ray_ellipsoid_t(origin: np.ndarray, dirs: np.ndarray, ell: Ellipsoid) -> np.ndarray:
    """Smallest positive hit parameter per ray; +inf where the ray misses."""
    o = ell.rotation.T @ (origin - ell.center) / ell.semi_axes
    d = (dirs @ ell.rotation) / ell.semi_axes

    a = np.sum(d * d, axis=-1)
    b = 2.0 * np.sum(d * o, axis=-1)
    c = float(o @ o) - 1.0
    disc = b * b - 4.0 * a * c

    t = np.full(dirs.shape[:-1], np.inf)
    hit = disc >= 0.0
    if not np.any(hit):
        return t
    sq = np.sqrt(disc[hit])
    ah = a[hit]
    t1 = (-b[hit] - sq) / (2.0 * ah)
    t2 = (-b[hit] + sq) / (2.0 * ah)
    tt = np.where(t1 > _T_MIN, t1, np.where(t2 > _T_MIN, t2, np.inf))
    t[hit] = tt
    return t


def rasterize_bodies(camera: CameraSpec, bodies) -> np.ndarray:
    """Indexed mask of the nearest body per pixel (0 where none)."""
    ids, _ = _trace(camera, bodies)
    return ids


def _trace(camera: CameraSpec, bodies) -> tuple[np.ndarray, np.ndarray]:
    dirs, valid = unproject_grid(camera)
    rot = camera.rotation()
    dirs_world = dirs @ rot.T
    origin = np.asarray(camera.position, dtype=float)

    best_t = np.full(valid.shape, np.inf)
    ids = np.zeros(valid.shape, dtype=np.int32)
    for body in bodies:
        for ell in body.ellipsoids:
            t = _ray_ellipsoid_t(origin, dirs_world, ell)
            closer = t < best_t
            best_t[closer] = t[closer]
            ids[closer] = body.instance_id
    ids[~valid] = 0
    best_t[~valid] = np.inf
    return ids, best_t


def rasterize(scene: SceneDescription) -> np.ndarray:
    """Indexed instance mask for a scene; byte-deterministic."""
    return rasterize_bodies(scene.camera, proxy_bodies(scene))


def _background_tint(background: dict) -> np.ndarray:
    """Deterministic pseudo-color for the chosen background."""
    if background.get("kind") == "hdri":
        key = str(background.get("ref", ""))
    else:
        key = "light:" + str(background.get("preset", {}).get("kind", ""))
    h = mix64(int.from_bytes(key.encode("utf-8")[:8].ljust(8, b"\0"), "little"))
    return np.array([32 + (h >> s) % 64 for s in (0, 8, 16)], dtype=np.uint8)


def render_rgb(scene: SceneDescription, palette=DEFAULT_PALETTE) -> np.ndarray:
    """Flat-shaded pseudo-RGB: palette bodies with a depth cue, tinted background."""
    ids, t = _trace(scene.camera, proxy_bodies(scene))
    rgb = np.empty((*ids.shape, 3), dtype=np.uint8)
    rgb[:] = _background_tint(scene.background)

    fg = ids != 0
    if np.any(fg):
        base = palette_render(ids, palette).astype(np.float64)
        factor = np.clip(1.1 - 0.25 * t[fg], 0.35, 1.0)
        rgb[fg] = np.clip(base[fg] * factor[:, None], 0, 255).astype(np.uint8)
    return rgb


def inject_holes(ids, rate: float, seed: int) -> np.ndarray:
    """Clear a seeded subset of interior pixels, no two 8-adjacent.

    Eligible pixels are foreground pixels whose 8 neighbours all carry
    the same id, so every hole is an isolated single-pixel gap that a
    3x3 closing removes exactly.
    """
    if not (0.0 <= rate <= 1.0):
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    m = np.asarray(ids)
    out = m.copy()
    if rate == 0.0 or not m.any():
        return out

    h, w = m.shape
    padded = np.zeros((h + 2, w + 2), dtype=m.dtype)
    padded[1:-1, 1:-1] = m
    eligible = m != 0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            eligible &= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] == m

    ys, xs = np.nonzero(eligible)
    order = list(range(len(ys)))
    rng = SplitMix64(seed)
    rng.shuffle(order)
    target = int(round(rate * len(order)))

    cleared = np.zeros((h + 2, w + 2), dtype=bool)
    done = 0
    for k in order:
        if done >= target:
            break
        y, x = int(ys[k]), int(xs[k])
        if cleared[y : y + 3, x : x + 3].any():
            continue
        cleared[y + 1, x + 1] = True
        out[y, x] = 0
        done += 1
    return out


def joints_of(scene: SceneDescription) -> dict[tuple[int, str], np.ndarray]:
    """Head and torso centers per instance, keyed (instance_id, joint name)."""
    joints: dict[tuple[int, str], np.ndarray] = {}
    for body in proxy_bodies(scene):
        torso, head = body.ellipsoids
        joints[(body.instance_id, "torso")] = torso.center
        joints[(body.instance_id, "head")] = head.center
    return joints
