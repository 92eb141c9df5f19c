import numpy as np
import pytest

from cabinsynth.contours import (
    BoundingBox,
    approx_polygon,
    bbox_of,
    signed_area,
    trace_contours,
)
from cabinsynth.errors import EmptyRegionError

from .conftest import count_components_8, pixel_scan_bbox, random_mask


def max_deviation_from_polygon(points, polygon):
    """Largest distance from any point to the closed polygon (vectorized)."""
    pts = np.asarray(points, dtype=float)
    a = np.asarray(polygon, dtype=float)
    b = np.roll(a, -1, axis=0)
    ab = b - a
    d2 = np.sum(ab * ab, axis=1)
    ap = pts[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(np.sum(ap * ab[None, :, :], axis=2) / d2[None, :], 0.0, 1.0)
    t = np.where(np.isfinite(t), t, 0.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    dist = np.linalg.norm(pts[:, None, :] - proj, axis=2)
    return float(dist.min(axis=1).max())


class TestTrace:
    def test_filled_square(self):
        m = np.zeros((10, 10), dtype=bool)
        m[2:6, 3:7] = True
        contours = trace_contours(m)
        assert len(contours) == 1
        assert bbox_of(contours[0]).as_tuple() == (3, 2, 4, 4)

    def test_two_disjoint_blobs(self):
        m = np.zeros((10, 10), dtype=bool)
        m[1:3, 1:3] = True
        m[6:9, 5:9] = True
        assert len(trace_contours(m)) == 2

    def test_empty_mask(self):
        assert trace_contours(np.zeros((5, 5), dtype=bool)) == []

    def test_hole_borders_not_reported(self):
        m = np.zeros((12, 12), dtype=bool)
        m[2:9, 2:9] = True
        m[4:7, 4:7] = False
        contours = trace_contours(m)
        assert len(contours) == 1
        assert bbox_of(contours[0]).as_tuple() == (2, 2, 7, 7)

    def test_outer_borders_counter_clockwise(self, np_rng):
        for _ in range(40):
            for contour in trace_contours(random_mask(np_rng, (24, 24), 0.4)):
                assert signed_area(contour) >= 0.0

    def test_vertices_8_adjacent_and_closed(self, np_rng):
        for _ in range(20):
            for contour in trace_contours(random_mask(np_rng, (24, 24), 0.35)):
                ring = np.vstack([contour, contour[:1]])
                steps = np.abs(np.diff(ring, axis=0))
                assert steps.max(initial=0) <= 1

    def test_count_matches_flood_fill_oracle(self, np_rng):
        for _ in range(500):
            m = random_mask(np_rng, (32, 32))
            assert len(trace_contours(m)) == count_components_8(m)


class TestApproxPolygon:
    def test_rectangle_any_epsilon_below_one(self):
        m = np.zeros((30, 40), dtype=bool)
        m[4:25, 5:35] = True
        contour = trace_contours(m)[0]
        for eps in (0.0, 0.3, 0.7, 0.999):
            poly = approx_polygon(contour, eps)
            assert len(poly) == 4
            assert set(map(tuple, poly.tolist())) == {(5, 4), (34, 4), (5, 24), (34, 24)}

    def test_digital_straight_segment_collapses_to_endpoints(self):
        m = np.zeros((5, 10), dtype=bool)
        m[2, 1:8] = True
        poly = approx_polygon(trace_contours(m)[0], 0.0)
        assert sorted(map(tuple, poly.tolist())) == [(1, 2), (7, 2)]

    def test_deviation_bounded_by_epsilon(self, np_rng):
        for _ in range(40):
            m = random_mask(np_rng, (32, 32), 0.45)
            for contour in trace_contours(m):
                if len(contour) < 3:
                    continue
                for eps in (0.0, 0.8, 2.0):
                    poly = approx_polygon(contour, eps)
                    assert max_deviation_from_polygon(contour, poly) <= eps + 1e-9

    def test_bbox_unchanged_at_epsilon_zero(self, np_rng):
        for _ in range(40):
            m = random_mask(np_rng, (24, 24), 0.4)
            for contour in trace_contours(m):
                poly = approx_polygon(contour, 0.0)
                assert bbox_of(poly).as_tuple() == bbox_of(contour).as_tuple()

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError):
            approx_polygon(np.array([[0, 0], [1, 0], [1, 1]]), -0.1)


class TestBbox:
    def test_full_frame(self):
        m = np.ones((7, 9), dtype=bool)
        assert bbox_of(m).as_tuple() == (0, 0, 9, 7)

    def test_single_pixel(self):
        m = np.zeros((10, 10), dtype=bool)
        m[7, 3] = True
        assert bbox_of(m).as_tuple() == (3, 7, 1, 1)

    def test_empty_inputs_raise(self):
        with pytest.raises(EmptyRegionError):
            bbox_of(np.zeros((4, 4), dtype=bool))
        with pytest.raises(EmptyRegionError):
            bbox_of(np.zeros((0, 2), dtype=int))

    def test_contour_route_equals_pixel_scan_oracle(self, np_rng):
        for _ in range(200):
            m = random_mask(np_rng, (32, 32))
            if not m.any():
                continue
            union = None
            for contour in trace_contours(m):
                b = bbox_of(contour)
                union = b if union is None else union.union(b)
            assert union.as_tuple() == pixel_scan_bbox(m)

    def test_boundingbox_invariants(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, 0, 5)
        with pytest.raises(ValueError):
            BoundingBox(-1, 0, 3, 3)
        assert BoundingBox(1, 2, 3, 4).union(BoundingBox(2, 0, 5, 3)).as_tuple() == (1, 0, 6, 6)
