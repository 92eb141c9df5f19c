"""Indexed instance masks: palette coding, per-instance geometry, PNG I/O.

An indexed mask is a 2-D integer array where 0 is background and 1..N are
instance ids. On disk a mask is either an 8-bit RGB PNG painted with the
dataset palette (what render backends emit) or an 8-bit single-channel
PNG whose pixel value is the instance id (canonical internal format).
"""

from __future__ import annotations

import logging

import numpy as np
from PIL import Image

from .contours import BoundingBox, bbox_of, trace_contours
from .errors import ConfigError
from .morphology import StructuringElement, close

log = logging.getLogger(__name__)

# Palette for instance ids 1..8; background is (0, 0, 0).
DEFAULT_PALETTE: tuple[tuple[int, int, int], ...] = (
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 255, 0),
    (255, 0, 255),
    (0, 255, 255),
    (128, 0, 0),
    (0, 128, 0),
)
BACKGROUND_COLOR = (0, 0, 0)


def _check_palette(palette) -> list[tuple[int, int, int]]:
    colors = [tuple(int(c) for c in rgb) for rgb in palette]
    if len(set(colors)) != len(colors):
        raise ConfigError("palette colors must be pairwise distinct")
    if BACKGROUND_COLOR in colors:
        raise ConfigError("palette colors must differ from the background color")
    return colors


def palette_split(color_image, palette=DEFAULT_PALETTE) -> tuple[np.ndarray, int]:
    """Decode an RGB raster into (indexed mask, unknown-color pixel count).

    A pixel gets id i+1 when it equals palette[i] exactly, 0 otherwise;
    the count covers non-background pixels matching no palette entry.
    """
    colors = _check_palette(palette)
    img = np.asarray(color_image)
    if img.ndim != 3 or img.shape[2] < 3:
        raise ValueError(f"expected an (H, W, 3) RGB raster, got shape {img.shape}")
    img = img[:, :, :3]

    ids = np.zeros(img.shape[:2], dtype=np.int32)
    matched = np.zeros(img.shape[:2], dtype=bool)
    for i, rgb in enumerate(colors):
        hit = np.all(img == np.array(rgb, dtype=img.dtype), axis=-1)
        ids[hit] = i + 1
        matched |= hit
    background = np.all(img == np.array(BACKGROUND_COLOR, dtype=img.dtype), axis=-1)
    unknown = int(np.count_nonzero(~matched & ~background))
    return ids, unknown


def palette_render(ids, palette=DEFAULT_PALETTE) -> np.ndarray:
    """Paint an indexed mask with the palette; inverse of palette_split."""
    colors = _check_palette(palette)
    m = np.asarray(ids)
    if m.ndim != 2:
        raise ValueError(f"indexed mask must be 2-D, got shape {m.shape}")
    top = int(m.max()) if m.size else 0
    if top > len(colors):
        raise ConfigError(f"mask contains id {top} but the palette has {len(colors)} colors")
    lut = np.zeros((top + 1, 3), dtype=np.uint8)
    lut[0] = BACKGROUND_COLOR
    for i in range(1, top + 1):
        lut[i] = colors[i - 1]
    return lut[m]


def instance_ids(ids) -> list[int]:
    """Sorted non-zero ids present in an indexed mask."""
    return sorted(int(v) for v in np.unique(np.asarray(ids)) if v != 0)


def instance_bboxes(ids, se=StructuringElement(3)) -> dict[int, BoundingBox]:
    """Bounding box per instance id after per-instance closing.

    Each id's binary mask is closed, its outer contours traced, and the
    union of the contour boxes taken. Ids left with no pixels are dropped
    and logged (closing never removes pixels, so this only catches ids
    that were already absent).
    """
    m = np.asarray(ids)
    boxes: dict[int, BoundingBox] = {}
    for iid in instance_ids(m):
        closed = close(m == iid, se)
        if not closed.any():
            log.warning("instance %d has no pixels after closing; dropped", iid)
            continue
        box: BoundingBox | None = None
        for contour in trace_contours(closed):
            b = bbox_of(contour)
            box = b if box is None else box.union(b)
        boxes[iid] = box
    return boxes


def mask_filename(sample_id: int) -> str:
    return f"mask_{sample_id:06d}.png"


def rgb_filename(sample_id: int) -> str:
    return f"rgb_{sample_id:06d}.png"


def write_mask_png(path, ids, palette=DEFAULT_PALETTE) -> None:
    """Write an indexed mask as PNG: palette RGB, or 8-bit ids if palette is None."""
    m = np.asarray(ids)
    if palette is None:
        if m.max(initial=0) > 255:
            raise ConfigError("single-channel masks support ids up to 255")
        Image.fromarray(m.astype(np.uint8), mode="L").save(path, format="PNG")
    else:
        Image.fromarray(palette_render(m, palette), mode="RGB").save(path, format="PNG")


def read_mask_png(path, palette=DEFAULT_PALETTE) -> tuple[np.ndarray, int]:
    """Read a mask PNG into (indexed mask, unknown-color count).

    Single-channel files are taken as raw ids; RGB files are decoded
    through the palette.
    """
    img = Image.open(path)
    if img.mode == "L":
        return np.asarray(img, dtype=np.int32), 0
    if img.mode in ("RGB", "RGBA"):
        return palette_split(np.asarray(img.convert("RGB")), palette)
    raise ValueError(f"unsupported mask PNG mode {img.mode!r} in {path}")


def write_rgb_png(path, rgb) -> None:
    arr = np.asarray(rgb, dtype=np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")
