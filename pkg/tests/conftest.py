import numpy as np
import pytest

from limbreg.raster import BinaryMask, Image

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def mask_from(arr) -> BinaryMask:
    return BinaryMask(np.asarray(arr, dtype=bool))


def gray_image(arr) -> Image:
    return Image(np.asarray(arr, dtype=np.uint8))


def rgb_image(arr) -> Image:
    return Image(np.asarray(arr, dtype=np.uint8))


def solid_rgb(h, w, color) -> Image:
    px = np.zeros((h, w, 3), dtype=np.uint8)
    px[:, :] = color
    return Image(px)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure the algorithms."""
    from limbreg import kernels

    img = np.zeros((8, 8), dtype=np.uint8)
    msk = np.zeros((8, 8), dtype=bool)
    kern = np.full((5, 5), 0.04)
    eye = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    kernels.convolve5_replicate(img, kern)
    kernels.erode_box(msk, 2)
    kernels.dilate_box(msk, 2)
    sx, sy = kernels.affine_coords(eye, 8, 8)
    kernels.sample_bilinear_u8(img, sx, sy)
    kernels.sample_nearest_bool(msk, sx, sy)
    kernels.tps_coords(np.array([[1.0, 1.0]]), np.array([[0.0, 0.0]]), eye, 8, 8)
    kernels.min_sq_dists(np.zeros((3, 2)), np.ones((3, 2)))
    kernels.projection_extents(np.arange(3.0), np.arange(3.0), np.array([1.0]), np.array([0.0]))
    yield
