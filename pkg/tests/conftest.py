import numpy as np
import pytest

from cabinsynth.config import default_config


@pytest.fixture
def small_config():
    """Fast 5-seat config for pipeline tests."""
    return default_config(master_seed=42, sample_count=4, image_size=(160, 120))


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240809)


def random_mask(rng, shape=(64, 64), density=None):
    """Seeded random binary mask; density drawn per mask when not given."""
    if density is None:
        density = rng.uniform(0.05, 0.9)
    return rng.random(shape) < density


def pixel_scan_bbox(mask):
    """Independent bbox oracle: min/max over foreground pixel coordinates."""
    ys, xs = np.nonzero(mask)
    assert len(xs) > 0
    return (int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


def count_components_8(mask):
    """Independent flood-fill oracle: number of 8-connected components."""
    from collections import deque

    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    n = 0
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or seen[y, x]:
                continue
            n += 1
            queue = deque([(y, x)])
            seen[y, x] = True
            while queue:
                cy, cx = queue.popleft()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            queue.append((ny, nx))
    return n
