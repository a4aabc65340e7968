"""Skin-mask extraction.

Pipeline: Cr plane -> 5x5 Gaussian -> maximum between-class-variance
threshold -> 5x5 open/close -> keep the largest 4-connected component.
Skin sits high on the Cr axis, so pixels above the threshold are foreground.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import DegenerateHistogramError, EmptyMaskError
from .raster import BinaryMask, Image, gaussian_blur5, rgb_to_cr

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class OtsuResult:
    threshold: int
    between_class_variance: float


def otsu_threshold(histogram: np.ndarray) -> OtsuResult:
    """Threshold maximizing the between-class variance w0*w1*(mu0-mu1)^2.

    Pixels strictly above the returned threshold are foreground.  Ties are
    broken toward the smallest threshold.
    """
    hist = np.asarray(histogram, dtype=np.float64)
    if hist.shape != (256,):
        raise ValueError(f"histogram must have 256 bins, got {hist.shape}")
    if np.any(hist < 0):
        raise ValueError("histogram counts must be non-negative")
    total = hist.sum()
    if total < 2 or np.count_nonzero(hist) < 2:
        raise DegenerateHistogramError("histogram needs at least two populated bins")

    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * levels)
    mean_total = m0[-1]
    w1 = total - w0
    # classes {<= t} and {> t}; variance is 0 wherever a class is empty
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.where(valid, m0 / np.where(w0 > 0, w0, 1.0), 0.0)
    mu1 = np.where(valid, (mean_total - m0) / np.where(w1 > 0, w1, 1.0), 0.0)
    sigma_b = np.where(valid, (w0 / total) * (w1 / total) * (mu0 - mu1) ** 2, 0.0)
    t = int(np.argmax(sigma_b))
    return OtsuResult(threshold=t, between_class_variance=float(sigma_b[t]))


def morphological_open_close(mask: BinaryMask) -> BinaryMask:
    """Opening then closing with a 5x5 square element, border = background."""
    px = mask.pixels
    opened = kernels.dilate_box(kernels.erode_box(px, 2), 2)
    closed = kernels.erode_box(kernels.dilate_box(opened, 2), 2)
    return BinaryMask(closed)


def largest_component(mask: BinaryMask) -> BinaryMask:
    """Keep only the largest 4-connected foreground component."""
    labels, n = ndimage.label(mask.pixels, structure=_CROSS)
    if n == 0:
        raise EmptyMaskError("mask has no foreground")
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    keep = int(np.argmax(sizes))
    return BinaryMask(labels == keep)


def extract_skin_mask(image: Image) -> BinaryMask:
    """Foreground mask of the limb from a color image."""
    blurred = gaussian_blur5(rgb_to_cr(image))
    hist = np.bincount(blurred.pixels.ravel(), minlength=256)
    result = otsu_threshold(hist)
    raw = BinaryMask(blurred.pixels > result.threshold)
    cleaned = morphological_open_close(raw)
    return largest_component(cleaned)
