"""Affine and thin-plate-spline registration from matched keypoints.

Matching is index-wise (the structural keypoints are already ordered
distal->wrist, upper/lower).  The affine maps moving coordinates onto
fixed ones; the spline is fitted the other way round (fixed -> moving)
so that image warping needs no numerical inversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .curve import KeypointSet
from .errors import (
    DegenerateConfigurationError,
    DuplicatePointError,
    MatchingError,
    ParameterError,
    RasterSizeError,
    SingularSystemError,
    SingularTransformError,
)
from .raster import BinaryMask, Image


@dataclass(frozen=True)
class MatchedPairs:
    fixed: np.ndarray  # (n, 2)
    moving: np.ndarray  # (n, 2)

    def __post_init__(self):
        f = np.asarray(self.fixed, dtype=np.float64)
        m = np.asarray(self.moving, dtype=np.float64)
        if f.shape != m.shape or f.ndim != 2 or f.shape[1] != 2:
            raise MatchingError(f"point arrays must both be (n, 2), got {f.shape} and {m.shape}")
        if f.shape[0] < 3:
            raise DegenerateConfigurationError(f"need at least 3 pairs, got {f.shape[0]}")
        object.__setattr__(self, "fixed", f)
        object.__setattr__(self, "moving", m)

    @property
    def count(self) -> int:
        return int(self.fixed.shape[0])


@dataclass(frozen=True)
class AffineTransform:
    """2x3 matrix mapping (x, y, 1) -> (x', y'); linear part non-degenerate."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise ValueError(f"matrix must be 2x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise SingularTransformError("matrix entries must be finite")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) <= 1e-8:
            raise SingularTransformError(f"linear part is degenerate (det={det:.3e})")
        object.__setattr__(self, "matrix", m)
        m.flags.writeable = False

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix[:, :2].T + self.matrix[:, 2]

    def inverse(self) -> "AffineTransform":
        a, b, c, d = self.matrix[0, 0], self.matrix[0, 1], self.matrix[1, 0], self.matrix[1, 1]
        det = a * d - b * c
        inv_lin = np.array([[d, -b], [-c, a]]) / det
        inv_t = -inv_lin @ self.matrix[:, 2]
        return AffineTransform(np.column_stack([inv_lin, inv_t]))

    def compose(self, other: "AffineTransform") -> "AffineTransform":
        """self after other: returns T with T(p) = self(other(p))."""
        lin = self.matrix[:, :2] @ other.matrix[:, :2]
        t = self.matrix[:, :2] @ other.matrix[:, 2] + self.matrix[:, 2]
        return AffineTransform(np.column_stack([lin, t]))

    def to_dict(self) -> dict:
        return {"type": "affine", "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineTransform":
        return cls(np.asarray(d["matrix"], dtype=np.float64))


@dataclass(frozen=True)
class TpsWarp:
    """Thin-plate spline from fixed coordinates to moving coordinates.

    U(r) = r^2 ln r.  The side conditions sum(w) = sum(w*x) = sum(w*y) = 0
    hold by construction of the fitting system.
    """

    control_points: np.ndarray  # (n, 2) fixed-frame controls
    affine_part: np.ndarray  # (2, 3), same convention as AffineTransform
    weights: np.ndarray  # (n, 2)
    regularization_lambda: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "control_points", np.asarray(self.control_points, dtype=np.float64))
        object.__setattr__(self, "affine_part", np.asarray(self.affine_part, dtype=np.float64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        out = pts @ self.affine_part[:, :2].T + self.affine_part[:, 2]
        d = pts[:, None, :] - self.control_points[None, :, :]
        s = (d * d).sum(axis=2)
        u = np.where(s > 0.0, 0.5 * s * np.log(np.where(s > 0.0, s, 1.0)), 0.0)
        return out + u @ self.weights

    def bending_energy(self) -> float:
        """w^T K w summed over both output coordinates."""
        k = _tps_kernel_matrix(self.control_points)
        return float(sum(self.weights[:, j] @ k @ self.weights[:, j] for j in range(2)))

    def to_dict(self) -> dict:
        return {
            "type": "tps",
            "control_points": self.control_points.tolist(),
            "affine_part": self.affine_part.tolist(),
            "weights": self.weights.tolist(),
            "regularization_lambda": float(self.regularization_lambda),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TpsWarp":
        return cls(
            control_points=np.asarray(d["control_points"], dtype=np.float64),
            affine_part=np.asarray(d["affine_part"], dtype=np.float64),
            weights=np.asarray(d["weights"], dtype=np.float64),
            regularization_lambda=float(d.get("regularization_lambda", 0.0)),
        )


def match_structural(fixed_kp: KeypointSet, moving_kp: KeypointSet) -> MatchedPairs:
    """Pair keypoints by index; the shared ordering makes this exact."""
    if len(fixed_kp) != len(moving_kp):
        raise MatchingError(f"keypoint counts differ: {len(fixed_kp)} vs {len(moving_kp)}")
    return MatchedPairs(fixed=fixed_kp.points, moving=moving_kp.points)


def _lstsq_affine(fixed: np.ndarray, moving: np.ndarray) -> AffineTransform:
    a = np.column_stack([moving, np.ones(moving.shape[0])])
    sol, _, rank, _ = np.linalg.lstsq(a, fixed, rcond=None)
    if rank < 3:
        raise DegenerateConfigurationError("pairs are collinear; affine transform undetermined")
    return AffineTransform(sol.T)


@dataclass(frozen=True)
class RansacParams:
    threshold: float = 4.0  # inlier residual in pixels
    iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.threshold <= 0:
            raise ParameterError(f"threshold must be > 0, got {self.threshold}")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")


def ransac_affine(pairs: MatchedPairs, params: RansacParams = RansacParams()) -> tuple[AffineTransform, np.ndarray]:
    """Robust affine fit; returns the transform and the inlier mask.

    Minimal 3-pair models are sampled with a seeded generator, scored by
    inlier count under the residual threshold, and the best inlier set is
    refitted by least squares.  Fully deterministic for a given seed;
    score ties keep the earliest sample.
    """
    n = pairs.count
    rng = np.random.default_rng(params.seed)
    samples = np.argsort(rng.random((params.iterations, n)), axis=1)[:, :3]
    mov = np.column_stack([pairs.moving, np.ones(n)])
    a = mov[samples]  # (iterations, 3, 3)
    dets = np.linalg.det(a)
    usable = np.abs(dets) > 1e-9
    a_safe = np.where(usable[:, None, None], a, np.eye(3))
    sols = np.linalg.solve(a_safe, pairs.fixed[samples])  # (iterations, 3, 2)
    proj = mov @ sols  # (iterations, n, 2)
    res = np.hypot(proj[..., 0] - pairs.fixed[:, 0], proj[..., 1] - pairs.fixed[:, 1])
    inliers = res < params.threshold
    counts = np.where(usable, inliers.sum(axis=1), -1)
    best = int(np.argmax(counts))
    if counts[best] < 3:
        raise DegenerateConfigurationError("RANSAC found no valid 3-pair model")
    best_mask = inliers[best]
    transform = _lstsq_affine(pairs.fixed[best_mask], pairs.moving[best_mask])
    return transform, best_mask


def estimate_affine(pairs: MatchedPairs, ransac: RansacParams | None = None) -> AffineTransform:
    """Least-squares affine mapping moving points onto fixed points."""
    if ransac is not None:
        transform, _ = ransac_affine(pairs, ransac)
        return transform
    return _lstsq_affine(pairs.fixed, pairs.moving)


def _tps_kernel_matrix(points: np.ndarray) -> np.ndarray:
    d = points[:, None, :] - points[None, :, :]
    s = (d * d).sum(axis=2)
    return np.where(s > 0.0, 0.5 * s * np.log(np.where(s > 0.0, s, 1.0)), 0.0)


def tps_fit(pairs: MatchedPairs, lam: float = 0.0) -> TpsWarp:
    """Solve the spline system [[K + lam*I, P], [P^T, 0]] for both coordinates.

    Controls are the fixed points, targets the moving points, so the warp
    sends fixed-frame pixels to moving-frame sample positions.
    """
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    controls = pairs.fixed
    targets = pairs.moving
    n = controls.shape[0]
    d = controls[:, None, :] - controls[None, :, :]
    sq = (d * d).sum(axis=2)
    off_diag = sq + np.eye(n)
    if np.any(off_diag[~np.eye(n, dtype=bool)] == 0.0):
        raise DuplicatePointError("control points must be pairwise distinct")
    k = _tps_kernel_matrix(controls)
    p = np.column_stack([np.ones(n), controls])
    sys = np.zeros((n + 3, n + 3))
    sys[:n, :n] = k + lam * np.eye(n)
    sys[:n, n:] = p
    sys[n:, :n] = p.T
    rhs = np.zeros((n + 3, 2))
    rhs[:n] = targets
    try:
        sol = np.linalg.solve(sys, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"spline system is singular: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("spline system is singular (non-finite solution)")
    weights = sol[:n]
    # solution rows n..n+2 are [const, x, y]; store as 2x3 [x, y, const] rows
    affine = np.stack([np.array([sol[n + 1, j], sol[n + 2, j], sol[n, j]]) for j in range(2)])
    return TpsWarp(
        control_points=controls,
        affine_part=affine,
        weights=weights,
        regularization_lambda=float(lam),
    )


def warp_image(raster: Image | BinaryMask, transform: AffineTransform | TpsWarp, output_size: tuple[int, int]):
    """Resample a raster onto an output canvas under the fitted transform.

    Backward mapping throughout: affine transforms (moving -> fixed) are
    inverted; the spline is already fitted fixed -> moving and is applied
    directly.  Bilinear for images, nearest for masks, 0/False outside.
    """
    out_w, out_h = output_size
    if out_w < 1 or out_h < 1:
        raise RasterSizeError(f"bad output size {output_size}")
    if isinstance(transform, AffineTransform):
        back = transform.inverse().matrix
        sx, sy = kernels.affine_coords(back, out_h, out_w)
    else:
        sx, sy = kernels.tps_coords(
            transform.control_points, transform.weights, transform.affine_part, out_h, out_w
        )
    if isinstance(raster, BinaryMask):
        return BinaryMask(kernels.sample_nearest_bool(raster.pixels, sx, sy))
    if raster.channels == 1:
        return Image(kernels.sample_bilinear_u8(raster.pixels, sx, sy))
    planes = [kernels.sample_bilinear_u8(raster.pixels[:, :, c], sx, sy) for c in range(3)]
    return Image(np.stack(planes, axis=2))


def blend_overlay(fixed: Image, warped_moving: Image, w_fixed: float = 0.4, w_moving: float = 0.6) -> Image:
    """Weighted per-pixel blend of the registered pair, rounded and clamped."""
    if (fixed.height, fixed.width) != (warped_moving.height, warped_moving.width):
        raise RasterSizeError(
            f"size mismatch: {fixed.width}x{fixed.height} vs {warped_moving.width}x{warped_moving.height}"
        )
    a = fixed.pixels.astype(np.float64)
    b = warped_moving.pixels.astype(np.float64)
    if a.ndim != b.ndim:
        if a.ndim == 2:
            a = np.repeat(a[:, :, None], 3, axis=2)
        else:
            b = np.repeat(b[:, :, None], 3, axis=2)
    blended = w_fixed * a + w_moving * b
    return Image(np.clip(np.rint(blended), 0, 255).astype(np.uint8))
