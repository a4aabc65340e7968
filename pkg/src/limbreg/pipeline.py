"""End-to-end registration pipeline and its configuration.

Stages: skin mask -> principal direction -> horizontal profile -> wrist /
distal keypoints -> index-wise matching -> affine (and optionally spline)
fit -> warp -> metrics.  Keypoints are detected in each image's rotated
frame and mapped back through the exact rotation geometry, so the fitted
transforms live in original image coordinates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics as met
from .curve import (
    FeatureCurve,
    KalmanParams,
    KeypointSet,
    column_profile,
    default_window,
    detect_wrist,
    distal_point,
    kalman_smooth,
    sample_edge_points,
)
from .errors import ConfigError, LimbregError, StageError
from .orientation import min_rect_direction
from .raster import BinaryMask, Image, rotation_geometry, save_image, save_mask
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
from .segmentation import extract_skin_mask
from . import kernels

MODES = ("fam", "fam-tps")


@dataclass(frozen=True)
class PipelineConfig:
    kalman: KalmanParams = KalmanParams()
    wrist_window: int | str = "auto"  # even int >= 4, or "auto" = width/16 rule
    n_keypoint_columns: int = 10
    mode: str = "fam"
    tps_lambda: float = 0.0
    ransac: RansacParams | None = None
    overlay_weights: tuple[float, float] = (0.4, 0.6)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {MODES}, got {self.mode!r}")
        if isinstance(self.wrist_window, str):
            if self.wrist_window != "auto":
                raise ConfigError(f"wrist_window_L: expected 'auto' or an even integer >= 4")
        elif self.wrist_window < 4 or self.wrist_window % 2:
            raise ConfigError(f"wrist_window_L: must be even and >= 4, got {self.wrist_window}")
        if self.n_keypoint_columns < 2:
            raise ConfigError(f"n_keypoint_columns: must be >= 2, got {self.n_keypoint_columns}")
        if self.tps_lambda < 0:
            raise ConfigError(f"tps_lambda: must be >= 0, got {self.tps_lambda}")
        wf, wm = self.overlay_weights
        if not (0.0 <= wf <= 1.0 and 0.0 <= wm <= 1.0):
            raise ConfigError(f"overlay weights must lie in [0, 1], got {self.overlay_weights}")

    def to_dict(self) -> dict:
        return {
            "kalman_q": self.kalman.process_noise_q,
            "kalman_r": self.kalman.measurement_noise_r,
            "kalman_p0": self.kalman.initial_variance_p0,
            "wrist_window_L": self.wrist_window,
            "n_keypoint_columns": self.n_keypoint_columns,
            "mode": self.mode,
            "tps_lambda": self.tps_lambda,
            "ransac_threshold": None if self.ransac is None else self.ransac.threshold,
            "ransac_iterations": None if self.ransac is None else self.ransac.iterations,
            "overlay_w_fixed": self.overlay_weights[0],
            "overlay_w_moving": self.overlay_weights[1],
        }


_CONFIG_KEYS = {
    "kalman_q",
    "kalman_r",
    "kalman_p0",
    "wrist_window_L",
    "n_keypoint_columns",
    "mode",
    "tps_lambda",
    "ransac_threshold",
    "ransac_iterations",
    "overlay_w_fixed",
    "overlay_w_moving",
}


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise ConfigError(f"{name}: must be > 0, got {value}")
    return value


def load_config(path: str | Path | None) -> PipelineConfig:
    """Strict flat key=value config; unknown keys and bad ranges are errors.

    A missing path (None) or empty file yields the documented defaults.
    """
    raw: dict[str, str] = {}
    if path is not None:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, value = (part.strip() for part in stripped.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            raw[key] = value

    def num(key: str, default: float) -> float:
        if key not in raw:
            return default
        try:
            return float(raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: not a number: {raw[key]!r}") from exc

    def integer(key: str, default: int) -> int:
        if key not in raw:
            return default
        try:
            return int(raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: not an integer: {raw[key]!r}") from exc

    try:
        kalman = KalmanParams(
            process_noise_q=_positive("kalman_q", num("kalman_q", 0.01)),
            measurement_noise_r=_positive("kalman_r", num("kalman_r", 4.0)),
            initial_variance_p0=_positive("kalman_p0", num("kalman_p0", 1.0)),
        )
    except LimbregError as exc:
        raise ConfigError(str(exc)) from exc

    window: int | str
    if raw.get("wrist_window_L", "auto").strip() == "auto":
        window = "auto"
    else:
        window = integer("wrist_window_L", 0)

    tps_lambda = num("tps_lambda", 0.0)
    if tps_lambda < 0:
        raise ConfigError(f"tps_lambda: must be >= 0, got {tps_lambda}")

    ransac = None
    if "ransac_threshold" in raw:
        try:
            ransac = RansacParams(
                threshold=num("ransac_threshold", 4.0),
                iterations=integer("ransac_iterations", 200),
            )
        except LimbregError as exc:
            raise ConfigError(f"ransac_threshold: {exc}") from exc
    elif "ransac_iterations" in raw:
        raise ConfigError("ransac_iterations: requires ransac_threshold")

    return PipelineConfig(
        kalman=kalman,
        wrist_window=window,
        n_keypoint_columns=integer("n_keypoint_columns", 10),
        mode=raw.get("mode", "fam"),
        tps_lambda=tps_lambda,
        ransac=ransac,
        overlay_weights=(num("overlay_w_fixed", 0.4), num("overlay_w_moving", 0.6)),
    )


def resolve_window(config: PipelineConfig, width: int) -> int:
    if config.wrist_window == "auto":
        return default_window(width)
    return int(config.wrist_window)


@dataclass
class ImageFeatures:
    """Per-image intermediates, kept for debugging and reporting."""

    mask: BinaryMask
    angle: float
    oriented_mask: BinaryMask
    rotation: AffineTransform  # original frame -> rotated frame
    raw_curve: FeatureCurve
    filtered_curve: FeatureCurve
    window: int
    wrist_x: int
    distal_x: int
    keypoints_rotated: KeypointSet
    keypoints: KeypointSet  # original-frame coordinates


@dataclass
class PipelineResult:
    warped: Image
    overlay: Image
    transform: AffineTransform | TpsWarp
    report: met.RegistrationReport
    affine: AffineTransform
    fixed_features: ImageFeatures
    moving_features: ImageFeatures
    warped_mask: BinaryMask

    def transform_dict(self) -> dict:
        out = {"mode": "fam" if isinstance(self.transform, AffineTransform) else "fam-tps",
               "affine": self.affine.to_dict()}
        if isinstance(self.transform, TpsWarp):
            out["tps"] = self.transform.to_dict()
        return out


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, LimbregError) and not isinstance(exc, StageError):
                raise StageError(name, exc) from exc
            return False

    return _Ctx()


def extract_features(image: Image, config: PipelineConfig) -> ImageFeatures:
    """Mask, orientation, profile, and keypoints for one image."""
    with _stage("mask"):
        mask = extract_skin_mask(image)
    return features_from_mask(mask, config)


def features_from_mask(mask: BinaryMask, config: PipelineConfig) -> ImageFeatures:
    """Orientation, profile, and keypoints for an existing limb mask."""
    with _stage("orient"):
        direction = min_rect_direction(mask)
        forward, backward, out_w, out_h = rotation_geometry(mask.width, mask.height, direction.angle)
        sx, sy = kernels.affine_coords(backward, out_h, out_w)
        oriented = BinaryMask(kernels.sample_nearest_bool(mask.pixels, sx, sy))
        rotation = AffineTransform(forward)
    with _stage("curve"):
        raw = column_profile(oriented)
        filtered = kalman_smooth(raw, config.kalman)
    with _stage("wrist"):
        window = resolve_window(config, oriented.width)
        wrist_x = detect_wrist(filtered, window)
    with _stage("keypoints"):
        distal_x = distal_point(oriented, wrist_x)
        kp_rot = sample_edge_points(oriented, wrist_x, distal_x, config.n_keypoint_columns)
        inv = rotation.inverse()
        kp = KeypointSet(
            points=inv.apply(kp_rot.points),
            wrist_x=float(inv.apply(np.array([[kp_rot.wrist_x, (oriented.height - 1) / 2.0]]))[0, 0]),
            distal_x=float(inv.apply(np.array([[kp_rot.distal_x, (oriented.height - 1) / 2.0]]))[0, 0]),
        )
    return ImageFeatures(
        mask=mask,
        angle=direction.angle,
        oriented_mask=oriented,
        rotation=rotation,
        raw_curve=raw,
        filtered_curve=filtered,
        window=window,
        wrist_x=wrist_x,
        distal_x=distal_x,
        keypoints_rotated=kp_rot,
        keypoints=kp,
    )


def run_pipeline(
    fixed: Image,
    moving: Image,
    config: PipelineConfig = PipelineConfig(),
    debug_dir: str | Path | None = None,
) -> PipelineResult:
    """Register `moving` onto `fixed` and measure the result.

    Every intermediate is dumped under `debug_dir` when given, with
    numbered stage prefixes; files written before a failure are removed.
    """
    written: list[Path] = []
    try:
        fixed_feat = extract_features(fixed, config)
        _dump_features(debug_dir, "fixed", fixed_feat, written)
        moving_feat = extract_features(moving, config)
        _dump_features(debug_dir, "moving", moving_feat, written)

        with _stage("match"):
            pairs = match_structural(fixed_feat.keypoints, moving_feat.keypoints)
        with _stage("register"):
            if config.ransac is not None:
                affine, inliers = ransac_affine(pairs, config.ransac)
                control_pairs = MatchedPairs(
                    fixed=pairs.fixed[inliers], moving=pairs.moving[inliers]
                )
            else:
                affine = estimate_affine(pairs)
                control_pairs = pairs
            transform: AffineTransform | TpsWarp = affine
            if config.mode == "fam-tps":
                transform = tps_fit(control_pairs, config.tps_lambda)
        with _stage("warp"):
            size = (fixed.width, fixed.height)
            warped = warp_image(moving, transform, size)
            warped_mask = warp_image(moving_feat.mask, transform, size)
        with _stage("metrics"):
            fixed_boundary = met.boundary_points(fixed_feat.mask)
            warped_boundary = met.boundary_points(warped_mask)
            _, ed_mean = met.keypoint_ed(affine, moving_feat.keypoints, fixed_feat.keypoints)
            report = met.RegistrationReport(
                dice=met.dice(warped_mask, fixed_feat.mask),
                jaccard=met.jaccard(warped_mask, fixed_feat.mask),
                hausdorff=met.hausdorff(warped_boundary, fixed_boundary),
                asd=met.asd(warped_boundary, fixed_boundary),
                assd=met.assd(warped_boundary, fixed_boundary),
                keypoint_ed_mean=ed_mean,
                parameters=config.to_dict(),
            )
        with _stage("overlay"):
            overlay = blend_overlay(fixed, warped, *config.overlay_weights)

        if debug_dir is not None:
            base = Path(debug_dir)
            _write(base / "05_transform.json", json.dumps(_transform_payload(affine, transform), indent=2), written)
            _write_image(base / "06_warped.png", warped, written)
            _write_mask(base / "06_warped_mask.pgm", warped_mask, written)
            _write_image(base / "07_overlay.png", overlay, written)
            _write(base / "08_report.json", json.dumps(report.to_dict(), indent=2), written)
        return PipelineResult(
            warped=warped,
            overlay=overlay,
            transform=transform,
            report=report,
            affine=affine,
            fixed_features=fixed_feat,
            moving_features=moving_feat,
            warped_mask=warped_mask,
        )
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _transform_payload(affine: AffineTransform, transform: AffineTransform | TpsWarp) -> dict:
    payload = {"mode": "fam" if isinstance(transform, AffineTransform) else "fam-tps",
               "affine": affine.to_dict()}
    if isinstance(transform, TpsWarp):
        payload["tps"] = transform.to_dict()
    return payload


def _write(path: Path, text: str, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    written.append(path)


def _write_image(path: Path, image: Image, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    save_image(image, path)
    written.append(path)


def _write_mask(path: Path, mask: BinaryMask, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    save_mask(mask, path)
    written.append(path)


def write_curve_csv(path: str | Path, raw: FeatureCurve, filtered: FeatureCurve) -> None:
    """Two-column CSV (raw, filtered), one row per image column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["raw", "filtered"])
        for r, f in zip(raw.values, filtered.values):
            writer.writerow([repr(float(r)), repr(float(f))])


def _dump_features(debug_dir: str | Path | None, tag: str, feat: ImageFeatures, written: list[Path]) -> None:
    if debug_dir is None:
        return
    base = Path(debug_dir)
    base.mkdir(parents=True, exist_ok=True)
    _write_mask(base / f"01_mask_{tag}.pgm", feat.mask, written)
    _write_mask(base / f"02_oriented_{tag}.pgm", feat.oriented_mask, written)
    curve_path = base / f"03_curve_{tag}.csv"
    write_curve_csv(curve_path, feat.raw_curve, feat.filtered_curve)
    written.append(curve_path)
    payload = {
        "angle": feat.angle,
        "window": feat.window,
        "wrist_x_rotated": feat.wrist_x,
        "distal_x_rotated": feat.distal_x,
        "keypoints": feat.keypoints.to_dict(),
    }
    _write(base / f"04_keypoints_{tag}.json", json.dumps(payload, indent=2), written)
