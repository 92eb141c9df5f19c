"""Binary mask morphology: dilation, erosion, closing.

Masks are 2-D boolean numpy arrays indexed ``[y, x]``. Out-of-bounds
pixels are background for both dilation and erosion, so foreground never
gains meaning beyond the frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class StructuringElement:
    """Centered k x k rectangular footprint; k must be odd."""

    size: int = 3

    def __post_init__(self):
        if self.size < 1 or self.size % 2 == 0:
            raise ConfigError(f"structuring element size must be odd and >= 1, got {self.size}")

    @property
    def radius(self) -> int:
        return self.size // 2


def _as_se(se) -> StructuringElement:
    if isinstance(se, StructuringElement):
        return se
    return StructuringElement(int(se))


def _as_mask(mask) -> np.ndarray:
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {m.shape}")
    return m.astype(bool, copy=False)


def dilate(mask, se=StructuringElement(3)) -> np.ndarray:
    """Pixel set iff any pixel under the footprint is set."""
    m = _as_mask(mask)
    r = _as_se(se).radius
    if r == 0:
        return m.copy()
    h, w = m.shape
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r : r + h, r : r + w] = m
    out = np.zeros((h, w), dtype=bool)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            out |= padded[r + dy : r + dy + h, r + dx : r + dx + w]
    return out


def erode(mask, se=StructuringElement(3)) -> np.ndarray:
    """Pixel set iff every pixel under the footprint is set."""
    m = _as_mask(mask)
    r = _as_se(se).radius
    if r == 0:
        return m.copy()
    h, w = m.shape
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r : r + h, r : r + w] = m
    out = np.ones((h, w), dtype=bool)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            out &= padded[r + dy : r + dy + h, r + dx : r + dx + w]
    return out


def close(mask, se=StructuringElement(3)) -> np.ndarray:
    """Dilation followed by erosion; fills holes smaller than the footprint.

    Composed on a virtually padded canvas so the intermediate dilation
    may extend past the frame before eroding back. This keeps closing
    extensive and idempotent for masks touching the border; the result
    never exceeds the frame.
    """
    se = _as_se(se)
    r = se.radius
    m = _as_mask(mask)
    if r == 0:
        return m.copy()
    h, w = m.shape
    canvas = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    canvas[r : r + h, r : r + w] = m
    return erode(dilate(canvas, se), se)[r : r + h, r : r + w]
