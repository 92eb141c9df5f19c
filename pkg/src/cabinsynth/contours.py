"""Contour tracing, polygon simplification, and bounding rectangles.

Contours are (N, 2) integer arrays of (x, y) pixel vertices, implicitly
closed, consecutive vertices 8-adjacent. Outer borders are returned
counter-clockwise, meaning positive shoelace area in image coordinates
(x right, y down) -- the orientation contour-finding libraries use for
outer borders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegionError

# 8-neighborhood in clockwise screen order (rows grow downward), starting east.
_NEIGHBORS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
_DIR_OF = {off: d for d, off in enumerate(_NEIGHBORS)}


@dataclass(frozen=True)
class BoundingBox:
    """Integer pixel rectangle: top-left (x, y), extent (w, h), inclusive."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"bounding box extent must be positive, got w={self.w} h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"bounding box origin must be non-negative, got ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.w, self.h)

    def union(self, other: "BoundingBox") -> "BoundingBox":
        x0 = min(self.x, other.x)
        y0 = min(self.y, other.y)
        x1 = max(self.x + self.w, other.x + other.w)
        y1 = max(self.y + self.h, other.y + other.h)
        return BoundingBox(x0, y0, x1 - x0, y1 - y0)


def signed_area(contour) -> float:
    """Shoelace area of a closed contour in image coordinates."""
    pts = np.asarray(contour, dtype=float)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(np.sum(x * yn - xn * y) / 2.0)


def trace_contours(mask) -> list[np.ndarray]:
    """Outer border of every 8-connected foreground component.

    Border following over the padded image; hole borders are followed
    only to mark their pixels (they are not reported). Components of one
    or two pixels yield degenerate (< 3 vertex) contours.
    """
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {m.shape}")
    h, w = m.shape
    f = np.zeros((h + 2, w + 2), dtype=np.int32)
    f[1:-1, 1:-1] = m.astype(bool)

    contours: list[np.ndarray] = []
    nbd = 1
    for i in range(1, h + 1):
        for j in range(1, w + 1):
            if f[i, j] == 0:
                continue
            if f[i, j] == 1 and f[i, j - 1] == 0:
                outer = True
            elif f[i, j] >= 1 and f[i, j + 1] == 0:
                outer = False
            else:
                continue
            nbd += 1
            border = _follow_border(f, i, j, outer, nbd)
            if outer:
                pts = np.array([(jj - 1, ii - 1) for ii, jj in border], dtype=np.int32)
                if signed_area(pts) < 0.0:
                    # Reverse orientation but keep the trace start first.
                    pts = np.vstack([pts[:1], pts[:0:-1]])
                contours.append(pts)
    return contours


def _follow_border(f, i, j, outer, nbd):
    """Walk one border starting at (i, j), marking pixels in f."""
    start_off = (0, -1) if outer else (0, 1)
    d0 = _DIR_OF[start_off]

    # First non-zero neighbor clockwise from the start direction.
    first = None
    for k in range(8):
        d = (d0 + k) % 8
        di, dj = _NEIGHBORS[d]
        if f[i + di, j + dj] != 0:
            first = (i + di, j + dj)
            break
    if first is None:
        f[i, j] = -nbd
        return [(i, j)]

    i1, j1 = first
    i2, j2 = i1, j1
    i3, j3 = i, j
    border = []
    while True:
        d2 = _DIR_OF[(i2 - i3, j2 - j3)]
        east_was_zero = False
        i4 = j4 = None
        for k in range(1, 9):
            d = (d2 - k) % 8
            di, dj = _NEIGHBORS[d]
            ni, nj = i3 + di, j3 + dj
            if f[ni, nj] != 0:
                i4, j4 = ni, nj
                break
            if d == 0:
                east_was_zero = True
        if east_was_zero:
            f[i3, j3] = -nbd
        elif f[i3, j3] == 1:
            f[i3, j3] = nbd
        border.append((i3, j3))
        if (i4, j4) == (i, j) and (i3, j3) == (i1, j1):
            break
        i2, j2 = i3, j3
        i3, j3 = i4, j4
    return border


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance of each point to the segment a-b."""
    ab = b - a
    d2 = float(ab @ ab)
    if d2 == 0.0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ ab / d2, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(points - proj, axis=1)


def _simplify_chain(pts: np.ndarray, epsilon: float) -> np.ndarray:
    """Douglas-Peucker over an open chain; endpoints always kept."""
    n = len(pts)
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        s, e = stack.pop()
        if e <= s + 1:
            continue
        d = _segment_distances(pts[s + 1 : e].astype(float), pts[s].astype(float), pts[e].astype(float))
        k = int(np.argmax(d))
        if d[k] > epsilon:
            mid = s + 1 + k
            keep[mid] = True
            stack.append((s, mid))
            stack.append((mid, e))
    return keep


def approx_polygon(contour, epsilon: float = 1.0) -> np.ndarray:
    """Douglas-Peucker simplification of a closed contour.

    Every original vertex stays within ``epsilon`` of the simplified
    polygon. ``epsilon == 0`` removes only duplicate and exactly
    collinear vertices. The 1 px default keeps integer contours at
    pixel fidelity.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    pts = np.asarray(contour)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"contour must be (N, 2), got shape {pts.shape}")
    if len(pts) == 0:
        return pts.copy()

    # Drop consecutive duplicates, including the closing wrap.
    dedup = [pts[0]]
    for p in pts[1:]:
        if p[0] != dedup[-1][0] or p[1] != dedup[-1][1]:
            dedup.append(p)
    if len(dedup) > 1 and dedup[-1][0] == dedup[0][0] and dedup[-1][1] == dedup[0][1]:
        dedup.pop()
    pts = np.array(dedup, dtype=pts.dtype)
    if len(pts) < 3:
        return pts.copy()

    # Split the ring at two mutually-farthest vertices (both extreme
    # points of the shape) and simplify the two open arcs between them.
    fpts = pts.astype(float)
    ia = int(np.argmax(np.linalg.norm(fpts - fpts[0], axis=1)))
    ib = int(np.argmax(np.linalg.norm(fpts - fpts[ia], axis=1)))
    ring = np.roll(pts, -ia, axis=0)
    jb = (ib - ia) % len(pts)
    arc1 = ring[: jb + 1]
    arc2 = np.vstack([ring[jb:], ring[:1]])
    keep1 = _simplify_chain(arc1, epsilon)
    keep2 = _simplify_chain(arc2, epsilon)
    return np.vstack([arc1[keep1][:-1], arc2[keep2][:-1]])


def bbox_of(obj) -> BoundingBox:
    """Tightest integer rectangle around a boolean mask or contour vertices.

    Width/height are inclusive: a single pixel gives w = h = 1.
    """
    arr = np.asarray(obj)
    if arr.ndim == 2 and arr.dtype == bool:
        ys, xs = np.nonzero(arr)
        if len(xs) == 0:
            raise EmptyRegionError("mask has no foreground pixels")
    else:
        if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) == 0:
            if arr.size == 0:
                raise EmptyRegionError("no vertices given")
            raise ValueError(f"expected a boolean mask or an (N, 2) point array, got shape {arr.shape}")
        xs, ys = arr[:, 0], arr[:, 1]
    x0, x1 = int(np.min(xs)), int(np.max(xs))
    y0, y1 = int(np.min(ys)), int(np.max(ys))
    return BoundingBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
