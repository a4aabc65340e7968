"""Raster containers and resampling primitives.

Images are 8-bit, single- or three-channel, row-major.  Masks are boolean
rasters whose foreground is the limb.  Both are immutable once built: the
backing array is frozen so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PILImage

from . import kernels
from .errors import ChannelMismatchError, RasterSizeError

GAUSSIAN5_SIGMA = 1.1


def _gaussian5_kernel(sigma: float = GAUSSIAN5_SIGMA) -> np.ndarray:
    ax = np.arange(5, dtype=np.float64) - 2.0
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


_KERNEL5 = _gaussian5_kernel()


@dataclass(frozen=True)
class Image:
    """Dense 8-bit raster, shape (h, w) or (h, w, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            raise ValueError(f"image dtype must be uint8, got {px.dtype}")
        if px.ndim == 2:
            pass
        elif px.ndim == 3 and px.shape[2] == 3:
            pass
        else:
            raise ChannelMismatchError(f"expected (h, w) or (h, w, 3), got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise RasterSizeError(f"empty raster {px.shape}")
        object.__setattr__(self, "pixels", px)
        px.flags.writeable = False

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


@dataclass(frozen=True)
class BinaryMask:
    """Dense boolean raster; True = limb foreground."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.bool_:
            raise ValueError(f"mask dtype must be bool, got {px.dtype}")
        if px.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise RasterSizeError(f"empty raster {px.shape}")
        object.__setattr__(self, "pixels", px)
        px.flags.writeable = False

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def count(self) -> int:
        return int(np.count_nonzero(self.pixels))


def rgb_to_cr(image: Image) -> Image:
    """Cr chrominance plane under full-range BT.601.

    Cr = 128 + 0.5 R - 0.418688 G - 0.081312 B, rounded to nearest and
    clamped to [0, 255]; achromatic pixels map to exactly 128.
    """
    if image.channels != 3:
        raise ChannelMismatchError(f"need a 3-channel image, got {image.channels} channel(s)")
    rgb = image.pixels.astype(np.float64)
    cr = 128.0 + 0.5 * rgb[:, :, 0] - 0.418688 * rgb[:, :, 1] - 0.081312 * rgb[:, :, 2]
    return Image(np.clip(np.rint(cr), 0, 255).astype(np.uint8))


def gaussian_blur5(image: Image) -> Image:
    """5x5 Gaussian smoothing (sigma 1.1), edge-replicated borders."""
    if image.channels != 1:
        raise ChannelMismatchError("gaussian_blur5 expects a single-channel image")
    if image.width < 5 or image.height < 5:
        raise RasterSizeError(f"image {image.width}x{image.height} smaller than the 5x5 kernel")
    acc = kernels.convolve5_replicate(image.pixels, _KERNEL5)
    return Image(np.clip(np.rint(acc), 0, 255).astype(np.uint8))


def _cos_sin_deg(angle: float) -> tuple[float, float]:
    """cos/sin of an angle in degrees, exact at multiples of 90."""
    a = angle % 360.0
    if a == 0.0:
        return 1.0, 0.0
    if a == 90.0:
        return 0.0, 1.0
    if a == 180.0:
        return -1.0, 0.0
    if a == 270.0:
        return 0.0, -1.0
    r = math.radians(a)
    return math.cos(r), math.sin(r)


def rotation_geometry(width: int, height: int, angle: float) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Geometry of a rotation by -angle about the raster center.

    Returns (forward 2x3 matrix source->output, backward 2x3 output->source,
    out_width, out_height).  The output canvas covers the rotated bounding
    box and keeps the parity of the input sides, which makes a rotate /
    counter-rotate round trip an exactly integral translation.
    """
    c, s = _cos_sin_deg(angle)
    out_w = math.ceil(abs(c) * (width - 1) + abs(s) * (height - 1)) + 1
    out_h = math.ceil(abs(s) * (width - 1) + abs(c) * (height - 1)) + 1
    if (out_w - width) % 2:
        out_w += 1
    if (out_h - height) % 2:
        out_h += 1
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    ox, oy = (out_w - 1) / 2.0, (out_h - 1) / 2.0
    forward = np.array(
        [
            [c, s, ox - c * cx - s * cy],
            [-s, c, oy + s * cx - c * cy],
        ],
        dtype=np.float64,
    )
    backward = np.array(
        [
            [c, -s, cx - c * ox + s * oy],
            [s, c, cy - s * ox - c * oy],
        ],
        dtype=np.float64,
    )
    return forward, backward, out_w, out_h


def rotate_image(raster: Image | BinaryMask, angle: float):
    """Rotate by -angle about the raster center onto an enlarged canvas.

    Content lying along direction `angle` comes out horizontal.  Images are
    resampled bilinearly, masks nearest-neighbor; samples falling outside
    the source are 0 / False.
    """
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle}")
    _, backward, out_w, out_h = rotation_geometry(raster.width, raster.height, angle)
    sx, sy = kernels.affine_coords(backward, out_h, out_w)
    if isinstance(raster, BinaryMask):
        return BinaryMask(kernels.sample_nearest_bool(raster.pixels, sx, sy))
    if raster.channels == 1:
        return Image(kernels.sample_bilinear_u8(raster.pixels, sx, sy))
    planes = [kernels.sample_bilinear_u8(raster.pixels[:, :, c], sx, sy) for c in range(3)]
    return Image(np.stack(planes, axis=2))


def load_image(path: str | Path) -> Image:
    """Read an 8-bit PNG/PGM/PPM file."""
    with _PILImage.open(path) as im:
        if im.mode == "L":
            return Image(np.asarray(im, dtype=np.uint8))
        return Image(np.asarray(im.convert("RGB"), dtype=np.uint8))


def save_image(image: Image, path: str | Path) -> None:
    """Write PNG (by extension) or binary PGM/PPM."""
    _PILImage.fromarray(image.pixels).save(path)


def load_mask(path: str | Path) -> BinaryMask:
    """Read a mask stored as an 8-bit grayscale file; nonzero = foreground."""
    with _PILImage.open(path) as im:
        return BinaryMask(np.asarray(im.convert("L"), dtype=np.uint8) > 0)


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    """Write a mask as 8-bit grayscale (255 = foreground), PGM by extension."""
    _PILImage.fromarray(np.where(mask.pixels, 255, 0).astype(np.uint8)).save(path)
