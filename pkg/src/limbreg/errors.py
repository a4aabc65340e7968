"""Exception hierarchy.

Every failure mode of the library raises a distinct subclass of
:class:`LimbregError` so the CLI can map each one to its own exit code.
"""

from __future__ import annotations


class LimbregError(Exception):
    """Base class for all limbreg errors."""


class ChannelMismatchError(LimbregError):
    """An operation got an image with the wrong number of channels."""


class RasterSizeError(LimbregError):
    """Raster dimensions are incompatible (too small, or mismatched)."""


class DegenerateHistogramError(LimbregError):
    """Histogram has fewer than two populated bins; no threshold exists."""


class EmptyMaskError(LimbregError):
    """A non-empty mask was required."""


class DegenerateGeometryError(LimbregError):
    """Too few / collinear points for a geometric construction."""


class ParameterError(LimbregError):
    """A numeric parameter is outside its valid range."""


class NoValleyError(LimbregError):
    """The width profile contains no scoreable valley."""


class MaskGapError(LimbregError):
    """A sampled mask column contains no foreground pixels."""


class MatchingError(LimbregError):
    """Keypoint sets cannot be paired (count mismatch)."""


class DegenerateConfigurationError(LimbregError):
    """Point configuration does not determine an affine transform."""


class DuplicatePointError(LimbregError):
    """Spline control points must be pairwise distinct."""


class SingularSystemError(LimbregError):
    """The spline linear system is singular."""


class SingularTransformError(LimbregError):
    """Affine transform is (near-)singular and cannot be inverted."""


class UndefinedMetricError(LimbregError):
    """Overlap metric undefined (both masks empty)."""


class EmptySetError(LimbregError):
    """A non-empty point set was required."""


class CanvasFitError(LimbregError):
    """Generated silhouette does not fit inside the requested canvas."""


class ConfigError(LimbregError):
    """Configuration file could not be parsed or failed validation."""


class StageError(LimbregError):
    """Pipeline stage failure; wraps the underlying error with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
