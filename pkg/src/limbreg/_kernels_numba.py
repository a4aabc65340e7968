"""Numba kernel implementations.

Loop twins of ``_kernels_numpy``; same signatures, same floating-point
expression order, no fastmath, so results match the fallback bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def convolve5_replicate(img, kernel):
    h, w = img.shape
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(5):
                yy = y + dy - 2
                if yy < 0:
                    yy = 0
                elif yy > h - 1:
                    yy = h - 1
                for dx in range(5):
                    xx = x + dx - 2
                    if xx < 0:
                        xx = 0
                    elif xx > w - 1:
                        xx = w - 1
                    acc += kernel[dy, dx] * np.float64(img[yy, xx])
            out[y, x] = acc
    return out


@njit(cache=True)
def erode_box(mask, radius):
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.bool_)
    for y in range(radius, h - radius):
        for x in range(radius, w - radius):
            keep = True
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    if not mask[y + dy, x + dx]:
                        keep = False
                        break
                if not keep:
                    break
            out[y, x] = keep
    return out


@njit(cache=True)
def dilate_box(mask, radius):
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.bool_)
    for y in range(h):
        y0 = max(y - radius, 0)
        y1 = min(y + radius, h - 1)
        for x in range(w):
            x0 = max(x - radius, 0)
            x1 = min(x + radius, w - 1)
            hit = False
            for yy in range(y0, y1 + 1):
                for xx in range(x0, x1 + 1):
                    if mask[yy, xx]:
                        hit = True
                        break
                if hit:
                    break
            out[y, x] = hit
    return out


@njit(cache=True)
def affine_coords(matrix, out_h, out_w):
    sx = np.empty((out_h, out_w), dtype=np.float64)
    sy = np.empty((out_h, out_w), dtype=np.float64)
    for y in range(out_h):
        fy = np.float64(y)
        for x in range(out_w):
            fx = np.float64(x)
            sx[y, x] = matrix[0, 0] * fx + matrix[0, 1] * fy + matrix[0, 2]
            sy[y, x] = matrix[1, 0] * fx + matrix[1, 1] * fy + matrix[1, 2]
    return sx, sy


@njit(cache=True)
def tps_coords(controls, weights, affine, out_h, out_w):
    n = controls.shape[0]
    sx = np.empty((out_h, out_w), dtype=np.float64)
    sy = np.empty((out_h, out_w), dtype=np.float64)
    for y in range(out_h):
        fy = np.float64(y)
        for x in range(out_w):
            fx = np.float64(x)
            px = affine[0, 0] * fx + affine[0, 1] * fy + affine[0, 2]
            py = affine[1, 0] * fx + affine[1, 1] * fy + affine[1, 2]
            for i in range(n):
                dx = fx - controls[i, 0]
                dy = fy - controls[i, 1]
                s = dx * dx + dy * dy
                if s > 0.0:
                    u = 0.5 * s * np.log(s)
                else:
                    u = 0.0
                px += weights[i, 0] * u
                py += weights[i, 1] * u
            sx[y, x] = px
            sy[y, x] = py
    return sx, sy


@njit(cache=True)
def sample_bilinear_u8(src, sx, sy):
    h, w = src.shape
    oh, ow = sx.shape
    out = np.zeros((oh, ow), dtype=np.uint8)
    for y in range(oh):
        for x in range(ow):
            px = sx[y, x]
            py = sy[y, x]
            if px >= 0.0 and px <= w - 1.0 and py >= 0.0 and py <= h - 1.0:
                x0 = int(np.floor(px))
                y0 = int(np.floor(py))
                x1 = min(x0 + 1, w - 1)
                y1 = min(y0 + 1, h - 1)
                fx = px - np.float64(x0)
                fy = py - np.float64(y0)
                v = (1.0 - fy) * (
                    (1.0 - fx) * np.float64(src[y0, x0]) + fx * np.float64(src[y0, x1])
                ) + fy * ((1.0 - fx) * np.float64(src[y1, x0]) + fx * np.float64(src[y1, x1]))
                out[y, x] = np.uint8(np.rint(v))
    return out


@njit(cache=True)
def sample_nearest_bool(src, sx, sy):
    h, w = src.shape
    oh, ow = sx.shape
    out = np.zeros((oh, ow), dtype=np.bool_)
    for y in range(oh):
        for x in range(ow):
            xi = int(np.rint(sx[y, x]))
            yi = int(np.rint(sy[y, x]))
            if xi >= 0 and xi < w and yi >= 0 and yi < h:
                out[y, x] = src[yi, xi]
    return out


@njit(cache=True)
def min_sq_dists(a, b):
    n = a.shape[0]
    m = b.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        ax = a[i, 0]
        ay = a[i, 1]
        best = np.inf
        for j in range(m):
            dx = ax - b[j, 0]
            dy = ay - b[j, 1]
            d = dx * dx + dy * dy
            if d < best:
                best = d
        out[i] = best
    return out


@njit(cache=True)
def projection_extents(xs, ys, cos_t, sin_t):
    k = cos_t.shape[0]
    n = xs.shape[0]
    out = np.empty(k, dtype=np.float64)
    for j in range(k):
        c = cos_t[j]
        s = sin_t[j]
        mn = np.inf
        mx = -np.inf
        for i in range(n):
            p = xs[i] * c + ys[i] * s
            if p < mn:
                mn = p
            if p > mx:
                mx = p
        out[j] = mx - mn
    return out
