import numpy as np
import pytest

from limbreg.curve import column_profile, curve_peak, default_window, detect_wrist, kalman_smooth
from limbreg.errors import CanvasFitError, ParameterError
from limbreg.registration import AffineTransform, MatchedPairs, estimate_affine
from limbreg.synthgen import ForearmParams, generate_forearm, generate_pair

AXIAL_GRID = [0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0]


def translation(tx, ty) -> AffineTransform:
    return AffineTransform(np.array([[1.0, 0.0, tx], [0.0, 1.0, ty]]))


class TestParams:
    def test_projection_shrinks_with_angle(self):
        widths = [ForearmParams(axial_angle=a).projected_palm_width() for a in AXIAL_GRID]
        assert all(a > b for a, b in zip(widths, widths[1:]))

    def test_taper_required(self):
        with pytest.raises(ParameterError):
            ForearmParams(wrist_width=60.0, elbow_width=56.0)

    def test_palm_must_clear_wrist(self):
        with pytest.raises(ParameterError):
            ForearmParams(palm_max_width=100.0, axial_angle=90.0)

    def test_angle_ranges(self):
        with pytest.raises(ParameterError):
            ForearmParams(axial_angle=91.0)
        with pytest.raises(ParameterError):
            ForearmParams(in_plane_angle=180.0)


class TestGenerateForearm:
    def test_profile_matches_analytic_curve(self):
        sample = generate_forearm(ForearmParams())
        measured = column_profile(sample.mask).values
        assert np.abs(measured - sample.curve.values).max() <= 2.0

    def test_analytic_peak_strictly_decreasing(self):
        peaks = [
            curve_peak(generate_forearm(ForearmParams(axial_angle=a)).curve)[1]
            for a in AXIAL_GRID
        ]
        assert all(a > b for a, b in zip(peaks, peaks[1:]))

    def test_determinism(self):
        a = generate_forearm(ForearmParams(seed=123))
        b = generate_forearm(ForearmParams(seed=123))
        assert (a.image.pixels == b.image.pixels).all()
        assert (a.mask.pixels == b.mask.pixels).all()
        assert (a.keypoints.points == b.keypoints.points).all()

    def test_seed_changes_image_not_mask(self):
        a = generate_forearm(ForearmParams(seed=1))
        b = generate_forearm(ForearmParams(seed=2))
        assert (a.mask.pixels == b.mask.pixels).all()
        assert (a.image.pixels != b.image.pixels).any()

    @pytest.mark.parametrize("axial", AXIAL_GRID)
    def test_wrist_valley_near_analytic_wrist(self, axial):
        sample = generate_forearm(ForearmParams(axial_angle=axial))
        filtered = kalman_smooth(column_profile(sample.mask))
        wrist = detect_wrist(filtered, default_window(sample.mask.width))
        assert abs(wrist - sample.keypoints.wrist_x) <= 3.0

    def test_oversized_silhouette_rejected(self):
        with pytest.raises(CanvasFitError):
            generate_forearm(ForearmParams(canvas=(400, 300)))

    def test_keypoints_on_mask_boundary(self):
        sample = generate_forearm(ForearmParams(in_plane_angle=10.0))
        px = sample.mask.pixels
        for (x, y) in sample.keypoints.points:
            xi, yi = int(round(x)), int(round(y))
            neighborhood = px[max(yi - 1, 0) : yi + 2, max(xi - 1, 0) : xi + 2]
            assert neighborhood.any()
            assert not neighborhood.all() or yi in (0, px.shape[0] - 1)


class TestGeneratePair:
    def test_identity_pair_identical(self):
        fixed, moving, gt = generate_pair(ForearmParams(), AffineTransform.identity())
        assert (fixed.mask.pixels == moving.mask.pixels).all()
        assert (gt.matrix == AffineTransform.identity().matrix).all()

    def test_translation_moves_keypoints_exactly(self):
        fixed, moving, _ = generate_pair(ForearmParams(), translation(25.0, 0.0))
        assert (moving.keypoints.points == fixed.keypoints.points + (25.0, 0.0)).all()

    def test_affine_recovered_from_ground_truth_points(self):
        mat = np.array([[1.1 * np.cos(0.1745), -1.1 * np.sin(0.1745), 12.0],
                        [1.1 * np.sin(0.1745), 1.1 * np.cos(0.1745), -30.0]])
        center = np.array([419.5, 262.0])
        mat[:, 2] += center - mat[:, :2] @ center  # rotate/scale about the canvas center
        t = AffineTransform(mat)
        fixed, moving, gt = generate_pair(ForearmParams(), t)
        est = estimate_affine(MatchedPairs(fixed=moving.keypoints.points, moving=fixed.keypoints.points))
        assert np.abs(est.matrix - gt.matrix).max() < 1e-6

    def test_deform_bump_changes_upper_edge_only(self):
        fixed, bumped, _ = generate_pair(ForearmParams(), AffineTransform.identity(), deform=6.0)
        diff = fixed.mask.pixels != bumped.mask.pixels
        ys, xs = np.nonzero(diff)
        assert ys.size > 0
        assert ys.max() < 262  # strictly above the axis row

    def test_out_of_canvas_transform_rejected(self):
        with pytest.raises(CanvasFitError):
            generate_pair(ForearmParams(), translation(300.0, 0.0))

    def test_warped_pair_overlaps(self):
        from limbreg.metrics import dice
        from limbreg.registration import warp_image

        fixed, moving, gt = generate_pair(ForearmParams(axial_angle=20.0), translation(22.0, -7.0))
        est = estimate_affine(MatchedPairs(fixed=fixed.keypoints.points, moving=moving.keypoints.points))
        warped = warp_image(moving.mask, est, (fixed.mask.width, fixed.mask.height))
        assert dice(warped, fixed.mask) >= 0.98
