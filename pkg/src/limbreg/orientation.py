"""Principal-direction estimation and horizontal normalization.

Two estimators are provided: an exhaustive sweep that maximizes the
projection span of the foreground over candidate directions, and the
fast path that takes the long-side angle of the minimum-area enclosing
rectangle of the convex hull.  For elongated limb masks they agree
closely; the sweep is biased toward the diagonal for wide shapes, which
is inherent to the span criterion and left as-is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateGeometryError, EmptyMaskError, ParameterError
from .raster import BinaryMask, _cos_sin_deg, rotate_image


@dataclass(frozen=True)
class PrincipalDirection:
    angle: float  # degrees in [0, 180)
    method: str  # "exhaustive" | "min_rect"
    extent: float  # projection span (px) along the chosen direction


def _foreground_points(mask: BinaryMask) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.nonzero(mask.pixels)
    if xs.size == 0:
        raise EmptyMaskError("mask has no foreground")
    return xs.astype(np.float64), ys.astype(np.float64)


def principal_direction_exhaustive(mask: BinaryMask, step: float = 1.0) -> PrincipalDirection:
    """Angle in [0, 180) maximizing the foreground projection span.

    Candidates are multiples of `step`.  Projections land on the line
    through the origin at the candidate angle; for angles beyond 90 the
    mask is notionally shifted along X so all projections share one sign,
    which leaves the span untouched.  Ties go to the smallest angle.
    """
    if not (0.0 < step <= 5.0):
        raise ParameterError(f"step must be in (0, 5], got {step}")
    xs, ys = _foreground_points(mask)
    angles = np.arange(0.0, 180.0, step)
    cos_t = np.empty(angles.shape[0])
    sin_t = np.empty(angles.shape[0])
    for i, a in enumerate(angles):
        cos_t[i], sin_t[i] = _cos_sin_deg(float(a))
    extents = kernels.projection_extents(xs, ys, cos_t, sin_t)
    best = int(np.argmax(extents))
    return PrincipalDirection(angle=float(angles[best]), method="exhaustive", extent=float(extents[best]))


def _hull_candidates(mask: BinaryMask) -> np.ndarray:
    """Per-row extreme foreground pixels (the only possible hull vertices)."""
    ys, xs = np.nonzero(mask.pixels)
    if xs.size == 0:
        raise EmptyMaskError("mask has no foreground")
    rows, first = np.unique(ys, return_index=True)
    last = np.r_[first[1:], ys.size] - 1
    pts = np.empty((rows.size * 2, 2), dtype=np.float64)
    pts[0::2, 0] = xs[first]
    pts[0::2, 1] = rows
    pts[1::2, 0] = xs[last]
    pts[1::2, 1] = rows
    return np.unique(pts, axis=0)


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise in raster coords, no collinear runs."""
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]

    def build(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
                if cross <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return np.asarray(hull, dtype=np.float64)


def min_rect_direction(mask: BinaryMask) -> PrincipalDirection:
    """Long-side angle of the minimum-area rectangle enclosing the foreground.

    One side of the minimum rectangle is collinear with a hull edge, so
    every hull edge direction is tried.  Area ties (squares, symmetric
    hulls) resolve to the smallest angle.
    """
    pts = _hull_candidates(mask)
    hull = _convex_hull(pts)
    if hull.shape[0] < 3:
        raise DegenerateGeometryError("need at least 3 non-collinear foreground pixels")
    edges = np.roll(hull, -1, axis=0) - hull
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    units = edges / lengths[:, None]
    best: tuple[float, float, float] | None = None  # (area, angle, extent)
    for ux, uy in units:
        proj_u = hull[:, 0] * ux + hull[:, 1] * uy
        proj_o = hull[:, 0] * -uy + hull[:, 1] * ux
        len_u = proj_u.max() - proj_u.min()
        len_o = proj_o.max() - proj_o.min()
        area = len_u * len_o
        if len_u >= len_o:
            long_dx, long_dy, extent = ux, uy, len_u
        else:
            long_dx, long_dy, extent = -uy, ux, len_o
        angle = math.degrees(math.atan2(long_dy, long_dx)) % 180.0
        if len_u == len_o:
            alt = math.degrees(math.atan2(ux, -uy)) % 180.0
            angle = min(angle, alt)
        cand = (area, angle, extent)
        if best is None or cand[:2] < best[:2]:
            best = cand
    return PrincipalDirection(angle=best[1], method="min_rect", extent=best[2])


def normalize_horizontal(mask: BinaryMask, direction: PrincipalDirection) -> BinaryMask:
    """Rotate the mask so its principal direction lands on the X axis."""
    return rotate_image(mask, direction.angle)
