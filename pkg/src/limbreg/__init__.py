"""Structure-based multi-modal limb image registration.

The library segments the limb by skin color, orients it horizontally,
derives the per-column width profile whose scored valley marks the wrist,
samples matched boundary keypoints, and registers image pairs with an
affine transform or a thin-plate-spline warp, reporting overlap and
surface-distance metrics.
"""

__version__ = "0.1.0"

from .curve import (
    FeatureCurve,
    KalmanParams,
    KeypointSet,
    column_profile,
    curve_peak,
    detect_wrist,
    distal_point,
    kalman_smooth,
    sample_edge_points,
)
from .metrics import RegistrationReport, asd, assd, boundary_points, dice, hausdorff, jaccard, keypoint_ed
from .orientation import PrincipalDirection, min_rect_direction, normalize_horizontal, principal_direction_exhaustive
from .pipeline import PipelineConfig, PipelineResult, load_config, run_pipeline
from .raster import BinaryMask, Image, gaussian_blur5, load_image, load_mask, rgb_to_cr, rotate_image, save_image, save_mask
from .registration import (
    AffineTransform,
    MatchedPairs,
    RansacParams,
    TpsWarp,
    blend_overlay,
    estimate_affine,
    match_structural,
    ransac_affine,
    tps_fit,
    warp_image,
)
from .segmentation import OtsuResult, extract_skin_mask, morphological_open_close, otsu_threshold
from .synthgen import ForearmParams, ForearmSample, generate_forearm, generate_pair

__all__ = [
    "AffineTransform",
    "BinaryMask",
    "FeatureCurve",
    "ForearmParams",
    "ForearmSample",
    "Image",
    "KalmanParams",
    "KeypointSet",
    "MatchedPairs",
    "OtsuResult",
    "PipelineConfig",
    "PipelineResult",
    "PrincipalDirection",
    "RansacParams",
    "RegistrationReport",
    "TpsWarp",
    "asd",
    "assd",
    "blend_overlay",
    "boundary_points",
    "column_profile",
    "curve_peak",
    "detect_wrist",
    "dice",
    "distal_point",
    "estimate_affine",
    "extract_skin_mask",
    "gaussian_blur5",
    "generate_forearm",
    "generate_pair",
    "hausdorff",
    "jaccard",
    "kalman_smooth",
    "keypoint_ed",
    "load_config",
    "load_image",
    "load_mask",
    "match_structural",
    "min_rect_direction",
    "morphological_open_close",
    "normalize_horizontal",
    "otsu_threshold",
    "principal_direction_exhaustive",
    "ransac_affine",
    "rgb_to_cr",
    "rotate_image",
    "run_pipeline",
    "sample_edge_points",
    "save_image",
    "save_mask",
    "tps_fit",
    "warp_image",
]
