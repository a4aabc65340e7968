"""Public kernel entry points, bound to the selected backend."""

from __future__ import annotations

from . import _kernels_numpy
from .accel import USE_NUMBA

if USE_NUMBA:
    from . import _kernels_numba as _impl
else:
    _impl = _kernels_numpy

convolve5_replicate = _impl.convolve5_replicate
erode_box = _impl.erode_box
dilate_box = _impl.dilate_box
affine_coords = _impl.affine_coords
tps_coords = _impl.tps_coords
sample_bilinear_u8 = _impl.sample_bilinear_u8
sample_nearest_bool = _impl.sample_nearest_bool
min_sq_dists = _impl.min_sq_dists
projection_extents = _impl.projection_extents
