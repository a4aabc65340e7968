"""Registration quality metrics: overlap, surface distances, keypoint error."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EmptyMaskError, EmptySetError, MatchingError, RasterSizeError, UndefinedMetricError
from .raster import BinaryMask
from .registration import AffineTransform


@dataclass(frozen=True)
class RegistrationReport:
    dice: float
    jaccard: float
    hausdorff: float
    asd: float
    assd: float
    keypoint_ed_mean: float | None = None
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dice": self.dice,
            "jaccard": self.jaccard,
            "hausdorff": self.hausdorff,
            "asd": self.asd,
            "assd": self.assd,
            "keypoint_ed_mean": self.keypoint_ed_mean,
            "parameters": self.parameters,
        }


def _check_sizes(a: BinaryMask, b: BinaryMask) -> None:
    if (a.height, a.width) != (b.height, b.width):
        raise RasterSizeError(f"mask sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}")


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """2|A∩B| / (|A| + |B|)."""
    _check_sizes(a, b)
    na, nb = a.count(), b.count()
    if na == 0 and nb == 0:
        raise UndefinedMetricError("both masks are empty")
    inter = int(np.count_nonzero(a.pixels & b.pixels))
    return 2.0 * inter / (na + nb)


def jaccard(a: BinaryMask, b: BinaryMask) -> float:
    """|A∩B| / |A∪B|."""
    _check_sizes(a, b)
    if a.count() == 0 and b.count() == 0:
        raise UndefinedMetricError("both masks are empty")
    inter = int(np.count_nonzero(a.pixels & b.pixels))
    union = int(np.count_nonzero(a.pixels | b.pixels))
    return inter / union


def boundary_points(mask: BinaryMask) -> np.ndarray:
    """Foreground pixels with a background 4-neighbor, as (x, y) rows.

    The canvas border counts as background, so a full-canvas mask still
    has a perimeter.  Points come out in row-major order.
    """
    px = mask.pixels
    if not px.any():
        raise EmptyMaskError("mask has no foreground")
    h, w = px.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = px
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    ys, xs = np.nonzero(px & ~interior)
    return np.column_stack([xs, ys]).astype(np.float64)


def _directed_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(kernels.min_sq_dists(np.ascontiguousarray(a), np.ascontiguousarray(b)))


def hausdorff(a_boundary: np.ndarray, b_boundary: np.ndarray) -> float:
    """max of the two directed maximum nearest-neighbor distances."""
    if len(a_boundary) == 0 or len(b_boundary) == 0:
        raise EmptySetError("boundary sets must be non-empty")
    return float(max(_directed_dists(a_boundary, b_boundary).max(), _directed_dists(b_boundary, a_boundary).max()))


def asd(a_boundary: np.ndarray, b_boundary: np.ndarray) -> float:
    """Mean nearest distance from the first surface to the second.

    One-directional by design: the first argument is the registered
    surface, the second the fixed reference.
    """
    if len(a_boundary) == 0 or len(b_boundary) == 0:
        raise EmptySetError("boundary sets must be non-empty")
    return float(_directed_dists(a_boundary, b_boundary).mean())


def assd(a_boundary: np.ndarray, b_boundary: np.ndarray) -> float:
    """Symmetric mean surface distance over the pooled boundary points."""
    if len(a_boundary) == 0 or len(b_boundary) == 0:
        raise EmptySetError("boundary sets must be non-empty")
    d_ab = _directed_dists(a_boundary, b_boundary)
    d_ba = _directed_dists(b_boundary, a_boundary)
    return float((d_ab.sum() + d_ba.sum()) / (d_ab.size + d_ba.size))


def keypoint_ed(
    transform: AffineTransform, moving_kp: np.ndarray, fixed_truth_kp: np.ndarray
) -> tuple[np.ndarray, float]:
    """Distances between projected moving keypoints and their ground truth."""
    mov = np.asarray(getattr(moving_kp, "points", moving_kp), dtype=np.float64)
    ref = np.asarray(getattr(fixed_truth_kp, "points", fixed_truth_kp), dtype=np.float64)
    if mov.shape != ref.shape:
        raise MatchingError(f"keypoint counts differ: {mov.shape} vs {ref.shape}")
    proj = transform.apply(mov)
    dists = np.hypot(proj[:, 0] - ref[:, 0], proj[:, 1] - ref[:, 1])
    return dists, float(dists.mean())
