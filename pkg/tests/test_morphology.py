import numpy as np
import pytest
from scipy import ndimage as ndi

from cabinsynth.errors import ConfigError
from cabinsynth.morphology import StructuringElement, close, dilate, erode

from .conftest import random_mask


def test_se_requires_odd_size():
    StructuringElement(1)
    StructuringElement(5)
    with pytest.raises(ConfigError):
        StructuringElement(2)
    with pytest.raises(ConfigError):
        StructuringElement(0)


def test_dilate_empty_mask_fixed_point():
    m = np.zeros((8, 8), dtype=bool)
    assert not dilate(m, 3).any()


def test_dilate_single_pixel_gives_block():
    m = np.zeros((12, 12), dtype=bool)
    m[5, 5] = True
    d = dilate(m, 3)
    expected = np.zeros_like(m)
    expected[4:7, 4:7] = True
    assert np.array_equal(d, expected)


def test_erode_all_set_clears_border():
    m = np.ones((6, 9), dtype=bool)
    e = erode(m, 3)
    expected = np.zeros_like(m)
    expected[1:-1, 1:-1] = True
    assert np.array_equal(e, expected)


def test_close_restores_square_with_interior_hole():
    # hand-evaluated: dilation fills the hole, erosion restores the square
    clean = np.zeros((11, 11), dtype=bool)
    clean[2:9, 2:9] = True
    noisy = clean.copy()
    noisy[5, 5] = False
    assert np.array_equal(close(noisy, 3), clean)


def test_close_identity_on_rastered_rectangles(np_rng):
    for _ in range(50):
        m = np.zeros((32, 32), dtype=bool)
        x0, y0 = np_rng.integers(0, 20, size=2)
        m[y0 : y0 + np_rng.integers(3, 12), x0 : x0 + np_rng.integers(3, 12)] = True
        for k in (1, 3, 5):
            assert np.array_equal(close(m, k), m)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_laws_on_random_masks(k, np_rng):
    se = StructuringElement(k)
    for _ in range(60):
        m = random_mask(np_rng)
        d, e, c = dilate(m, se), erode(m, se), close(m, se)
        # dilation extensive, erosion anti-extensive
        assert np.all(m <= d)
        assert np.all(e <= m)
        # closing extensive and idempotent
        assert np.all(m <= c)
        assert np.array_equal(close(c, se), c)
        # duality under matching border convention: complement over the
        # r-padded domain so both sides see out-of-bounds as their background
        r = se.radius
        if r:
            h, w = m.shape
            padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
            padded[r:-r, r:-r] = m
            dual = ~dilate(~padded, se)[r:-r, r:-r]
            assert np.array_equal(dual, e)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_matches_scipy_reference(k, np_rng):
    structure = np.ones((k, k), dtype=bool)
    for _ in range(40):
        m = random_mask(np_rng)
        assert np.array_equal(dilate(m, k), ndi.binary_dilation(m, structure, border_value=0))
        assert np.array_equal(erode(m, k), ndi.binary_erosion(m, structure, border_value=0))


def test_noise_elimination_law(np_rng):
    # removing isolated interior pixels (no two 8-adjacent) never changes closing
    for _ in range(30):
        m = random_mask(np_rng, density=0.75)
        interior = erode(m, 3)  # pixels whose 8 neighbours are all foreground
        ys, xs = np.nonzero(interior)
        noisy = m.copy()
        removed = np.zeros_like(m)
        order = np_rng.permutation(len(ys))
        for idx in order[: max(1, len(order) // 20)]:
            y, x = int(ys[idx]), int(xs[idx])
            if removed[max(0, y - 1) : y + 2, max(0, x - 1) : x + 2].any():
                continue
            removed[y, x] = True
            noisy[y, x] = False
        assert np.array_equal(close(noisy, 3), close(m, 3))


def test_mask_must_be_2d():
    with pytest.raises(ValueError):
        dilate(np.zeros(5, dtype=bool), 3)
