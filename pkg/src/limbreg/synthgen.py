"""Parametric synthetic forearm fixtures with exact ground truth.

The silhouette is a linearly tapering trapezoid (elbow to wrist) joined to
an elliptical palm bulge whose projected width shrinks with the axial
rotation angle as palm_max_width * (0.35 + 0.65*cos(angle)).  Because the
palm stays wider than the wrist, the width profile always dips at the
wrist, and its peak height encodes the axial angle.

Everything downstream of a seed is deterministic; masks are rasterized
analytically (membership test per pixel), so ground-truth keypoints,
curves, and inter-image transforms are exact rather than resampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import FeatureCurve, KeypointSet
from .errors import CanvasFitError, ParameterError
from .raster import BinaryMask, Image, _cos_sin_deg
from .registration import AffineTransform

PALM_PROJECTION_FLOOR = 0.35

# Localized narrowing at the wrist joint.  A bare linear taper rasterizes
# to a flat valley floor dozens of columns wide (the symmetric silhouette
# only loses a pixel row every 1/slope columns), which makes the valley
# position meaningless; the notch gives the profile a proper V at the
# wrist, like a real one.
WRIST_NOTCH_DEPTH = 5.0  # half-width px
WRIST_NOTCH_SIGMA = 14.0


@dataclass(frozen=True)
class ForearmParams:
    canvas: tuple[int, int] = (840, 525)  # (width, height)
    arm_length: float = 560.0
    wrist_width: float = 40.0
    elbow_width: float = 56.0
    palm_length: float = 170.0
    palm_max_width: float = 180.0
    axial_angle: float = 0.0  # degrees in [0, 90]
    in_plane_angle: float = 0.0  # degrees in [0, 180)
    skin_color: tuple[int, int, int] = (210, 160, 140)
    background_color: tuple[int, int, int] = (90, 90, 90)
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.axial_angle <= 90.0):
            raise ParameterError(f"axial_angle must be in [0, 90], got {self.axial_angle}")
        if not (0.0 <= self.in_plane_angle < 180.0):
            raise ParameterError(f"in_plane_angle must be in [0, 180), got {self.in_plane_angle}")
        if not self.wrist_width < self.elbow_width:
            raise ParameterError("wrist_width must be smaller than elbow_width")
        if self.projected_palm_width() <= self.wrist_width:
            raise ParameterError("projected palm width must exceed wrist_width")

    def projected_palm_width(self) -> float:
        c = math.cos(math.radians(self.axial_angle))
        return self.palm_max_width * (PALM_PROJECTION_FLOOR + (1.0 - PALM_PROJECTION_FLOOR) * c)


@dataclass(frozen=True)
class ForearmSample:
    image: Image
    mask: BinaryMask
    keypoints: KeypointSet
    curve: FeatureCurve | None


class _Silhouette:
    """Closed-form half-width along the limb axis, origin at canvas center."""

    def __init__(self, params: ForearmParams, bump_amplitude: float = 0.0):
        total = params.arm_length + params.palm_length
        self.u_elbow = -total / 2.0
        self.u_wrist = self.u_elbow + params.arm_length
        self.u_tip = self.u_elbow + total
        self.wrist_half = params.wrist_width / 2.0
        self.elbow_half = params.elbow_width / 2.0
        self.palm_half_max = params.projected_palm_width() / 2.0
        # ellipse through (0, wrist_half) peaking at palm_half_max, zero at palm_length
        rho = self.wrist_half / self.palm_half_max
        s = math.sqrt(1.0 - rho * rho)
        self.palm_center = s * params.palm_length / (1.0 + s)
        self.palm_axis = params.palm_length - self.palm_center
        self.bump_amplitude = bump_amplitude
        self.bump_center = self.u_elbow + 0.45 * params.arm_length
        self.bump_sigma = params.arm_length / 6.0

    def half_width(self, u: np.ndarray) -> np.ndarray:
        """Half-width of the silhouette at axial position u (0 outside)."""
        u = np.asarray(u, dtype=np.float64)
        arm_t = np.clip((u - self.u_elbow) / (self.u_wrist - self.u_elbow), 0.0, 1.0)
        arm = self.elbow_half + (self.wrist_half - self.elbow_half) * arm_t
        rel = (u - self.u_wrist - self.palm_center) / self.palm_axis
        palm = self.palm_half_max * np.sqrt(np.clip(1.0 - rel * rel, 0.0, None))
        out = np.where(u <= self.u_wrist, arm, palm)
        notch = WRIST_NOTCH_DEPTH * np.exp(
            -((u - self.u_wrist) ** 2) / (2.0 * WRIST_NOTCH_SIGMA**2)
        )
        out = np.maximum(out - notch, 0.0)
        return np.where((u >= self.u_elbow) & (u <= self.u_tip), out, 0.0)

    def upper_extra(self, u: np.ndarray) -> np.ndarray:
        """Smooth bump added to the upper edge for deformation fixtures."""
        if self.bump_amplitude == 0.0:
            return np.zeros_like(np.asarray(u, dtype=np.float64))
        u = np.asarray(u, dtype=np.float64)
        g = np.exp(-((u - self.bump_center) ** 2) / (2.0 * self.bump_sigma**2))
        inside = (u >= self.u_elbow) & (u <= self.u_tip)
        return np.where(inside, self.bump_amplitude * g, 0.0)

    def contains(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        h = self.half_width(u)
        return (h > 0.0) & (v <= h) & (v >= -(h + self.upper_extra(u)))


def _frame_to_canvas(params: ForearmParams) -> AffineTransform:
    """Axis-frame (u, v) to canvas (x, y): in-plane rotation about the center."""
    c, s = _cos_sin_deg(params.in_plane_angle)
    w, h = params.canvas
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    return AffineTransform(np.array([[c, -s, cx], [s, c, cy]]))


def _check_fit(sil: _Silhouette, to_canvas: AffineTransform, canvas: tuple[int, int]) -> None:
    u = np.linspace(sil.u_elbow, sil.u_tip, 2048)
    h = sil.half_width(u)
    upper = np.column_stack([u, -(h + sil.upper_extra(u))])
    lower = np.column_stack([u, h])
    pts = to_canvas.apply(np.vstack([upper, lower]))
    w, hh = canvas
    if pts[:, 0].min() < 0.0 or pts[:, 0].max() > w - 1 or pts[:, 1].min() < 0.0 or pts[:, 1].max() > hh - 1:
        raise CanvasFitError("silhouette exceeds the canvas after rotation/transform")


def _rasterize(sil: _Silhouette, canvas_to_frame: AffineTransform, canvas: tuple[int, int]) -> np.ndarray:
    w, h = canvas
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    m = canvas_to_frame.matrix
    u = m[0, 0] * xs[None, :] + m[0, 1] * ys[:, None] + m[0, 2]
    v = m[1, 0] * xs[None, :] + m[1, 1] * ys[:, None] + m[1, 2]
    return sil.contains(u, v)


def _ground_truth_keypoints(sil: _Silhouette, to_canvas: AffineTransform, n_columns: int = 10) -> KeypointSet:
    u = np.linspace(sil.u_elbow, sil.u_wrist, n_columns)
    half = sil.half_width(u)
    pts = np.empty((2 * n_columns, 2), dtype=np.float64)
    pts[0::2] = np.column_stack([u, -(half + sil.upper_extra(u))])
    pts[1::2] = np.column_stack([u, half])
    mapped = to_canvas.apply(pts)
    wrist = to_canvas.apply(np.array([[sil.u_wrist, 0.0]]))[0]
    elbow = to_canvas.apply(np.array([[sil.u_elbow, 0.0]]))[0]
    return KeypointSet(points=mapped, wrist_x=float(wrist[0]), distal_x=float(elbow[0]))


def _analytic_curve(sil: _Silhouette, canvas: tuple[int, int]) -> FeatureCurve:
    """Per-column pixel count of the unrotated silhouette (integer exact)."""
    w, h = canvas
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    u = np.arange(w, dtype=np.float64) - cx
    half = sil.half_width(u)
    extra = sil.upper_extra(u)
    lo = np.ceil(cy - half - extra)
    hi = np.floor(cy + half)
    counts = np.where(half > 0.0, np.maximum(hi - lo + 1.0, 0.0), 0.0)
    return FeatureCurve(values=counts, kind="raw")


def _render(
    mask: np.ndarray, params: ForearmParams, rng: np.random.Generator
) -> Image:
    w, h = params.canvas
    img = np.empty((h, w, 3), dtype=np.float64)
    img[:, :] = params.background_color
    noise = rng.integers(-6, 7, size=(h, w, 3)).astype(np.float64)
    skin = np.asarray(params.skin_color, dtype=np.float64) + noise
    img[mask] = skin[mask]
    return Image(np.clip(img, 0, 255).astype(np.uint8))


def generate_forearm(params: ForearmParams) -> ForearmSample:
    """One synthetic forearm: image, mask, exact keypoints, analytic profile."""
    sil = _Silhouette(params)
    to_canvas = _frame_to_canvas(params)
    _check_fit(sil, to_canvas, params.canvas)
    mask = _rasterize(sil, to_canvas.inverse(), params.canvas)
    rng = np.random.default_rng(params.seed)
    image = _render(mask, params, rng)
    keypoints = _ground_truth_keypoints(sil, to_canvas)
    return ForearmSample(
        image=image,
        mask=BinaryMask(mask),
        keypoints=keypoints,
        curve=_analytic_curve(sil, params.canvas),
    )


def generate_pair(
    params: ForearmParams,
    transform: AffineTransform,
    deform: float | None = None,
) -> tuple[ForearmSample, ForearmSample, AffineTransform]:
    """A registration test pair with exact ground truth.

    `transform` maps fixed-frame points to moving-frame points; the moving
    silhouette is re-rasterized under it (never resampled), optionally with
    a smooth bump on the upper edge for deformable-registration fixtures.
    Ground-truth moving keypoints are the fixed ones mapped through
    `transform`, which is also returned.
    """
    fixed = generate_forearm(params)
    bump = float(deform) if deform else 0.0
    sil = _Silhouette(params, bump_amplitude=bump)
    to_canvas = transform.compose(_frame_to_canvas(params))
    _check_fit(sil, to_canvas, params.canvas)
    mask = _rasterize(sil, to_canvas.inverse(), params.canvas)
    rng = np.random.default_rng(params.seed + 1)
    image = _render(mask, params, rng)
    # ground truth = fixed keypoints through the transform; the bump, when
    # present, is deformation the registration has to absorb, not truth
    anchors = to_canvas.apply(np.array([[sil.u_wrist, 0.0], [sil.u_elbow, 0.0]]))
    keypoints = KeypointSet(
        points=transform.apply(fixed.keypoints.points),
        wrist_x=float(anchors[0, 0]),
        distal_x=float(anchors[1, 0]),
    )
    moving = ForearmSample(image=image, mask=BinaryMask(mask), keypoints=keypoints, curve=None)
    return fixed, moving, transform
