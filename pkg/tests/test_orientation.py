import math

import numpy as np
import pytest

from limbreg.errors import DegenerateGeometryError, EmptyMaskError, ParameterError
from limbreg.orientation import (
    min_rect_direction,
    normalize_horizontal,
    principal_direction_exhaustive,
)
from limbreg.raster import BinaryMask

from conftest import mask_from


def segment_mask(angle_deg: float, length: int, canvas: int) -> np.ndarray:
    m = np.zeros((canvas, canvas), dtype=bool)
    c = (canvas - 1) / 2
    dx, dy = math.cos(math.radians(angle_deg)), math.sin(math.radians(angle_deg))
    for t in np.linspace(-length / 2, length / 2, 4 * length):
        m[int(round(c + t * dy)), int(round(c + t * dx))] = True
    return m


def rotated_rect_mask(angle_deg: float, half_long: float, half_short: float, canvas: int) -> np.ndarray:
    yy, xx = np.mgrid[0:canvas, 0:canvas]
    c = (canvas - 1) / 2
    co, si = math.cos(math.radians(angle_deg)), math.sin(math.radians(angle_deg))
    u = (xx - c) * co + (yy - c) * si
    v = -(xx - c) * si + (yy - c) * co
    return (np.abs(u) <= half_long) & (np.abs(v) <= half_short)


class TestExhaustive:
    def test_horizontal_segment(self):
        m = np.zeros((40, 220), dtype=bool)
        m[20, 10:210] = True
        d = principal_direction_exhaustive(mask_from(m), 1.0)
        assert d.angle == 0.0
        assert abs(d.extent - 199) <= 1

    def test_30_degree_segment(self):
        d = principal_direction_exhaustive(mask_from(segment_mask(30.0, 160, 241)), 1.0)
        assert abs(d.angle - 30.0) <= 1.0

    def test_disc_tie_breaks_to_zero(self):
        yy, xx = np.mgrid[0:101, 0:101]
        disc = (xx - 50) ** 2 + (yy - 50) ** 2 <= 40**2
        d = principal_direction_exhaustive(mask_from(disc), 1.0)
        assert d.angle == 0.0

    def test_extent_translation_invariant(self):
        m = segment_mask(47.0, 80, 161)
        base = principal_direction_exhaustive(mask_from(m), 1.0)
        shifted = np.zeros((261, 261), dtype=bool)
        shifted[40 : 40 + 161, 70 : 70 + 161] = m
        moved = principal_direction_exhaustive(mask_from(shifted), 1.0)
        assert moved.angle == base.angle
        assert abs(moved.extent - base.extent) <= 1.0

    def test_bad_step_rejected(self):
        m = mask_from(np.ones((5, 5), dtype=bool))
        with pytest.raises(ParameterError):
            principal_direction_exhaustive(m, 0.0)
        with pytest.raises(ParameterError):
            principal_direction_exhaustive(m, 6.0)

    def test_empty_mask_rejected(self):
        with pytest.raises(EmptyMaskError):
            principal_direction_exhaustive(mask_from(np.zeros((5, 5), dtype=bool)), 1.0)


class TestMinRect:
    def test_axis_aligned_rectangle(self):
        m = np.zeros((60, 140), dtype=bool)
        m[20:40, 20:120] = True  # 100 x 20
        d = min_rect_direction(mask_from(m))
        assert d.angle == 0.0
        assert abs(d.extent - 100) <= 1

    def test_rotated_rectangle(self):
        d = min_rect_direction(mask_from(rotated_rect_mask(40.0, 50, 10, 161)))
        assert abs(d.angle - 40.0) <= 1.0

    def test_square_tie_breaks_to_smaller_angle(self):
        m = np.zeros((80, 80), dtype=bool)
        m[10:70, 10:70] = True
        assert min_rect_direction(mask_from(m)).angle == 0.0

    def test_collinear_points_rejected(self):
        m = np.zeros((10, 10), dtype=bool)
        m[4, 2:8] = True
        with pytest.raises(DegenerateGeometryError):
            min_rect_direction(mask_from(m))

    def test_too_few_points_rejected(self):
        m = np.zeros((10, 10), dtype=bool)
        m[4, 4] = True
        with pytest.raises(DegenerateGeometryError):
            min_rect_direction(mask_from(m))

    @pytest.mark.parametrize("angle", [15.0, 70.0, 110.0, 155.0])
    def test_agrees_with_exhaustive_when_elongated(self, angle):
        # aspect ratio 10: the span criterion's diagonal bias is small
        m = rotated_rect_mask(angle, 100, 10, 261)
        a = min_rect_direction(mask_from(m)).angle
        b = principal_direction_exhaustive(mask_from(m), 1.0).angle
        diff = min(abs(a - b), 180 - abs(a - b))
        assert diff <= 10.0


class TestNormalize:
    def test_horizontal_unchanged(self):
        m = np.zeros((40, 120), dtype=bool)
        m[15:25, 10:110] = True
        d = min_rect_direction(mask_from(m))
        out = normalize_horizontal(mask_from(m), d)
        assert (out.pixels == m).all()

    @pytest.mark.parametrize("angle", [40.0, 170.0])
    def test_becomes_horizontal(self, angle):
        m = rotated_rect_mask(angle, 80, 12, 221)
        d = min_rect_direction(mask_from(m))
        out = normalize_horizontal(mask_from(m), d)
        residual = min_rect_direction(out).angle
        assert min(residual, 180 - residual) <= 2.0

    def test_idempotent_within_tolerance(self):
        m = rotated_rect_mask(63.0, 90, 14, 241)
        d1 = min_rect_direction(mask_from(m))
        once = normalize_horizontal(mask_from(m), d1)
        d2 = min_rect_direction(once)
        twice = normalize_horizontal(once, d2)
        d3 = min_rect_direction(twice)
        a2 = min(d2.angle, 180 - d2.angle)
        a3 = min(d3.angle, 180 - d3.angle)
        assert abs(a3 - a2) <= 2.0
