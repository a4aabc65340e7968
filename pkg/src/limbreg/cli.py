"""Command-line interface.

Subcommands: mask, orient, curve, keypoints, register, evaluate, synth,
batch.  Structured output is JSON (curves are CSV); every failure class
maps to its own exit code with a one-line JSON diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import metrics as met
from .curve import KeypointSet, column_profile, kalman_smooth
from .errors import (
    CanvasFitError,
    ChannelMismatchError,
    ConfigError,
    DegenerateConfigurationError,
    DegenerateGeometryError,
    DegenerateHistogramError,
    DuplicatePointError,
    EmptyMaskError,
    EmptySetError,
    LimbregError,
    MaskGapError,
    MatchingError,
    NoValleyError,
    ParameterError,
    RasterSizeError,
    SingularSystemError,
    SingularTransformError,
    StageError,
    UndefinedMetricError,
)
from .orientation import min_rect_direction, principal_direction_exhaustive
from .pipeline import (
    PipelineConfig,
    features_from_mask,
    load_config,
    run_pipeline,
    write_curve_csv,
)
from .raster import load_image, load_mask, save_image, save_mask
from .registration import AffineTransform, RansacParams
from .segmentation import extract_skin_mask
from .synthgen import ForearmParams, generate_pair

FORMAT_VERSION = 1

EXIT_CODES: dict[type, int] = {
    ChannelMismatchError: 10,
    RasterSizeError: 11,
    DegenerateHistogramError: 12,
    EmptyMaskError: 13,
    DegenerateGeometryError: 14,
    ParameterError: 15,
    NoValleyError: 16,
    MaskGapError: 17,
    MatchingError: 18,
    DegenerateConfigurationError: 19,
    DuplicatePointError: 20,
    SingularSystemError: 21,
    SingularTransformError: 22,
    UndefinedMetricError: 23,
    EmptySetError: 24,
    CanvasFitError: 25,
    ConfigError: 26,
}
EXIT_IO = 27
EXIT_OTHER = 29


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    for klass, code in EXIT_CODES.items():
        if isinstance(exc, klass):
            return code
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_OTHER


def _fail(exc: Exception) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, StageError):
        payload["stage"] = exc.stage
        payload["error"] = type(exc.cause).__name__
    print(json.dumps(payload), file=sys.stderr)
    return _exit_code(exc)


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(getattr(args, "config", None))
    updates: dict = {}
    if getattr(args, "mode", None):
        updates["mode"] = args.mode
    if getattr(args, "tps_lambda", None) is not None:
        updates["tps_lambda"] = args.tps_lambda
    if getattr(args, "ransac", None) is not None:
        updates["ransac"] = RansacParams(threshold=args.ransac)
    if updates:
        config = PipelineConfig(
            kalman=config.kalman,
            wrist_window=config.wrist_window,
            n_keypoint_columns=config.n_keypoint_columns,
            mode=updates.get("mode", config.mode),
            tps_lambda=updates.get("tps_lambda", config.tps_lambda),
            ransac=updates.get("ransac", config.ransac),
            overlay_weights=config.overlay_weights,
        )
    return config


def cmd_mask(args) -> int:
    image = load_image(args.input)
    mask = extract_skin_mask(image)
    save_mask(mask, args.output)
    return 0


def cmd_orient(args) -> int:
    mask = load_mask(args.mask)
    if args.method == "exhaustive":
        direction = principal_direction_exhaustive(mask, step=args.step)
    else:
        direction = min_rect_direction(mask)
    print(json.dumps({"angle": direction.angle, "method": direction.method, "extent": direction.extent}))
    return 0


def cmd_curve(args) -> int:
    mask = load_mask(args.mask)
    raw = column_profile(mask)
    filtered = kalman_smooth(raw)
    write_curve_csv(args.csv, raw, filtered)
    return 0


def cmd_keypoints(args) -> int:
    config = PipelineConfig(n_keypoint_columns=args.columns)
    mask = load_mask(args.mask)
    features = features_from_mask(mask, config)
    Path(args.json).write_text(json.dumps(features.keypoints.to_dict(), indent=2))
    return 0


def cmd_register(args) -> int:
    config = _config_from_args(args)
    fixed = load_image(args.fixed)
    moving = load_image(args.moving)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        result = run_pipeline(fixed, moving, config, debug_dir=args.debug_dir)
        save_image(result.warped, out_dir / "warped.png")
        written.append(out_dir / "warped.png")
        save_image(result.overlay, out_dir / "overlay.png")
        written.append(out_dir / "overlay.png")
        (out_dir / "transform.json").write_text(json.dumps(result.transform_dict(), indent=2))
        written.append(out_dir / "transform.json")
        (out_dir / "report.json").write_text(json.dumps(result.report.to_dict(), indent=2))
        written.append(out_dir / "report.json")
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    print(json.dumps(result.report.to_dict()))
    return 0


def cmd_evaluate(args) -> int:
    fixed_mask = load_mask(args.fixed_mask)
    warped_mask = load_mask(args.warped_mask)
    fixed_boundary = met.boundary_points(fixed_mask)
    warped_boundary = met.boundary_points(warped_mask)
    ed_mean = None
    if args.keypoints:
        fixed_kp = KeypointSet.from_dict(json.loads(Path(args.keypoints[0]).read_text()))
        moving_kp = KeypointSet.from_dict(json.loads(Path(args.keypoints[1]).read_text()))
        if not args.transform:
            raise ConfigError("--keypoints requires --transform")
        payload = json.loads(Path(args.transform).read_text())
        matrix = payload["affine"]["matrix"] if "affine" in payload else payload["matrix"]
        transform = AffineTransform(np.asarray(matrix, dtype=np.float64))
        _, ed_mean = met.keypoint_ed(transform, moving_kp, fixed_kp)
    report = met.RegistrationReport(
        dice=met.dice(warped_mask, fixed_mask),
        jaccard=met.jaccard(warped_mask, fixed_mask),
        hausdorff=met.hausdorff(warped_boundary, fixed_boundary),
        asd=met.asd(warped_boundary, fixed_boundary),
        assd=met.assd(warped_boundary, fixed_boundary),
        keypoint_ed_mean=ed_mean,
        parameters={},
    )
    print(json.dumps(report.to_dict()))
    return 0


def parse_transform_spec(spec: str, canvas: tuple[int, int]) -> AffineTransform:
    """Build an affine from "rot=10,scale=1.1,tx=25,ty=-5" about the canvas center."""
    fields = {"rot": 0.0, "scale": 1.0, "tx": 0.0, "ty": 0.0}
    if spec:
        for chunk in spec.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise ConfigError(f"transform: expected key=value, got {chunk!r}")
            key, value = (p.strip() for p in chunk.split("=", 1))
            if key not in fields:
                raise ConfigError(f"transform: unknown key {key!r}")
            try:
                fields[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"transform: bad number for {key}: {value!r}") from exc
    c = math.cos(math.radians(fields["rot"]))
    s = math.sin(math.radians(fields["rot"]))
    lin = fields["scale"] * np.array([[c, -s], [s, c]])
    cx, cy = (canvas[0] - 1) / 2.0, (canvas[1] - 1) / 2.0
    center = np.array([cx, cy])
    t = center - lin @ center + np.array([fields["tx"], fields["ty"]])
    return AffineTransform(np.column_stack([lin, t]))


def cmd_synth(args) -> int:
    params = ForearmParams(axial_angle=args.angle, in_plane_angle=args.in_plane, seed=args.seed)
    transform = parse_transform_spec(args.transform, params.canvas)
    fixed, moving, gt = generate_pair(params, transform, deform=args.deform)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_image(fixed.image, out / "fixed.png")
    save_image(moving.image, out / "moving.png")
    save_mask(fixed.mask, out / "fixed_mask.pgm")
    save_mask(moving.mask, out / "moving_mask.pgm")
    (out / "fixed_keypoints.json").write_text(json.dumps(fixed.keypoints.to_dict(), indent=2))
    (out / "moving_keypoints.json").write_text(json.dumps(moving.keypoints.to_dict(), indent=2))
    (out / "transform_gt.json").write_text(json.dumps(gt.to_dict(), indent=2))
    return 0


def _run_batch_entry(name: str, fixed_path: str, moving_path: str, out_root: Path, config: PipelineConfig) -> None:
    fixed = load_image(fixed_path)
    moving = load_image(moving_path)
    out_dir = out_root / name
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        result = run_pipeline(fixed, moving, config)
        save_image(result.warped, out_dir / "warped.png")
        written.append(out_dir / "warped.png")
        save_image(result.overlay, out_dir / "overlay.png")
        written.append(out_dir / "overlay.png")
        (out_dir / "transform.json").write_text(json.dumps(result.transform_dict(), indent=2))
        written.append(out_dir / "transform.json")
        (out_dir / "report.json").write_text(json.dumps(result.report.to_dict(), indent=2))
        written.append(out_dir / "report.json")
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def cmd_batch(args) -> int:
    config = _config_from_args(args)
    entries: list[tuple[str, str, str]] = []
    manifest = Path(args.manifest)
    for lineno, line in enumerate(manifest.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: expected 'name,fixed,moving', got {line!r}")
        entries.append((parts[0], parts[1], parts[2]))
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_run_batch_entry, name, fx, mv, out_root, config)
                for name, fx, mv in entries
            ]
            for future in futures:
                future.result()
    else:
        for name, fx, mv in entries:
            _run_batch_entry(name, fx, mv, out_root, config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limbreg",
        description="Structure-based limb image registration",
    )
    parser.add_argument(
        "--version", action="version", version=f"limbreg {__version__} (format {FORMAT_VERSION})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="extract the skin mask of an image")
    p.add_argument("input")
    p.add_argument("output", help="output mask (PGM, foreground=255)")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("orient", help="principal direction of a mask as JSON")
    p.add_argument("mask")
    p.add_argument("--method", choices=["min_rect", "exhaustive"], default="min_rect")
    p.add_argument("--step", type=float, default=1.0, help="angle step for the exhaustive sweep")
    p.set_defaults(func=cmd_orient)

    p = sub.add_parser("curve", help="per-column width profile as CSV")
    p.add_argument("mask")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("keypoints", help="structural keypoints of a mask as JSON")
    p.add_argument("mask")
    p.add_argument("--json", required=True)
    p.add_argument("--columns", type=int, default=10)
    p.set_defaults(func=cmd_keypoints)

    p = sub.add_parser("register", help="register a moving image onto a fixed image")
    p.add_argument("fixed")
    p.add_argument("moving")
    p.add_argument("--mode", choices=["fam", "fam-tps"], default=None)
    p.add_argument("--lambda", dest="tps_lambda", type=float, default=None)
    p.add_argument("--ransac", type=float, default=None, metavar="THRESHOLD")
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--debug-dir", default=None)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("evaluate", help="overlap and surface metrics for two masks")
    p.add_argument("fixed_mask")
    p.add_argument("warped_mask")
    p.add_argument("--keypoints", nargs=2, metavar=("FIXED_JSON", "MOVING_JSON"))
    p.add_argument("--transform", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic registration pair")
    p.add_argument("--angle", type=float, default=0.0, help="axial rotation angle, 0-90")
    p.add_argument("--in-plane", type=float, default=0.0, dest="in_plane")
    p.add_argument("--transform", default="", help='e.g. "rot=10,scale=1.1,tx=25,ty=-5"')
    p.add_argument("--deform", type=float, default=None, help="edge bump amplitude in px")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("batch", help="register many pairs from a manifest CSV")
    p.add_argument("manifest", help="lines of: name,fixed_path,moving_path")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--mode", choices=["fam", "fam-tps"], default=None)
    p.add_argument("--lambda", dest="tps_lambda", type=float, default=None)
    p.add_argument("--ransac", type=float, default=None, metavar="THRESHOLD")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_batch)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LimbregError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    raise SystemExit(main())
