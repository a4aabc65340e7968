"""Pure-numpy kernel implementations.

These are the fallback for the numba kernels in ``_kernels_numba``.  Each
function keeps the exact per-element floating-point expression (and, where
it matters, the accumulation order) of its numba twin so the two backends
produce identical outputs.
"""

from __future__ import annotations

import numpy as np


def convolve5_replicate(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """5x5 convolution with edge replication; float64 out, unrounded."""
    h, w = img.shape
    padded = np.pad(img.astype(np.float64), 2, mode="edge")
    acc = np.zeros((h, w), dtype=np.float64)
    for dy in range(5):
        for dx in range(5):
            acc += kernel[dy, dx] * padded[dy : dy + h, dx : dx + w]
    return acc


def erode_box(mask: np.ndarray, radius: int) -> np.ndarray:
    """Erosion by a (2r+1)^2 square; outside the canvas counts as background."""
    h, w = mask.shape
    k = 2 * radius + 1
    padded = np.zeros((h + 2 * radius, w + 2 * radius), dtype=bool)
    padded[radius : radius + h, radius : radius + w] = mask
    out = np.ones((h, w), dtype=bool)
    for dy in range(k):
        for dx in range(k):
            out &= padded[dy : dy + h, dx : dx + w]
    return out


def dilate_box(mask: np.ndarray, radius: int) -> np.ndarray:
    """Dilation by a (2r+1)^2 square."""
    h, w = mask.shape
    k = 2 * radius + 1
    padded = np.zeros((h + 2 * radius, w + 2 * radius), dtype=bool)
    padded[radius : radius + h, radius : radius + w] = mask
    out = np.zeros((h, w), dtype=bool)
    for dy in range(k):
        for dx in range(k):
            out |= padded[dy : dy + h, dx : dx + w]
    return out


def affine_coords(matrix: np.ndarray, out_h: int, out_w: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel source coordinates for a backward 2x3 affine map."""
    xs = np.arange(out_w, dtype=np.float64)
    ys = np.arange(out_h, dtype=np.float64)
    x = xs[None, :]
    y = ys[:, None]
    sx = matrix[0, 0] * x + matrix[0, 1] * y + matrix[0, 2]
    sy = matrix[1, 0] * x + matrix[1, 1] * y + matrix[1, 2]
    return sx, sy


def tps_coords(
    controls: np.ndarray,
    weights: np.ndarray,
    affine: np.ndarray,
    out_h: int,
    out_w: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel source coordinates for a thin-plate-spline map.

    The radial term uses U(r) = r^2 ln r, evaluated as 0.5*s*ln(s) with
    s = r^2 so that both backends share one formula (U(0) = 0).
    """
    xs = np.arange(out_w, dtype=np.float64)
    ys = np.arange(out_h, dtype=np.float64)
    x = np.broadcast_to(xs[None, :], (out_h, out_w)).copy()
    y = np.broadcast_to(ys[:, None], (out_h, out_w)).copy()
    sx = affine[0, 0] * x + affine[0, 1] * y + affine[0, 2]
    sy = affine[1, 0] * x + affine[1, 1] * y + affine[1, 2]
    for i in range(controls.shape[0]):
        dx = x - controls[i, 0]
        dy = y - controls[i, 1]
        s = dx * dx + dy * dy
        u = np.where(s > 0.0, 0.5 * s * np.log(np.where(s > 0.0, s, 1.0)), 0.0)
        sx += weights[i, 0] * u
        sy += weights[i, 1] * u
    return sx, sy


def sample_bilinear_u8(src: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Bilinear sampling of a uint8 plane; out-of-source samples give 0."""
    h, w = src.shape
    valid = (sx >= 0.0) & (sx <= w - 1.0) & (sy >= 0.0) & (sy <= h - 1.0)
    x = np.where(valid, sx, 0.0)
    y = np.where(valid, sy, 0.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    f = src.astype(np.float64)
    v = (1.0 - fy) * ((1.0 - fx) * f[y0, x0] + fx * f[y0, x1]) + fy * (
        (1.0 - fx) * f[y1, x0] + fx * f[y1, x1]
    )
    out = np.rint(v)
    out[~valid] = 0.0
    return out.astype(np.uint8)


def sample_nearest_bool(src: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Nearest-neighbor sampling of a boolean plane; out-of-source gives False."""
    h, w = src.shape
    xi = np.rint(sx).astype(np.int64)
    yi = np.rint(sy).astype(np.int64)
    valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
    out = np.zeros(sx.shape, dtype=bool)
    out[valid] = src[yi[valid], xi[valid]]
    return out


def min_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each point of `a`, squared distance to the nearest point of `b`."""
    n = a.shape[0]
    out = np.empty(n, dtype=np.float64)
    chunk = 512
    bx = b[:, 0][None, :]
    by = b[:, 1][None, :]
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        dx = a[start:stop, 0][:, None] - bx
        dy = a[start:stop, 1][:, None] - by
        out[start:stop] = (dx * dx + dy * dy).min(axis=1)
    return out


def projection_extents(xs: np.ndarray, ys: np.ndarray, cos_t: np.ndarray, sin_t: np.ndarray) -> np.ndarray:
    """Projection span (max - min) of the point cloud for each direction."""
    k = cos_t.shape[0]
    out = np.empty(k, dtype=np.float64)
    for j in range(k):
        p = xs * cos_t[j] + ys * sin_t[j]
        out[j] = p.max() - p.min()
    return out
