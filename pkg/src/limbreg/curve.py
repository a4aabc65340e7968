"""Width profile of a horizontal limb mask and its structural keypoints.

The profile counts foreground pixels per image column.  After Kalman
smoothing, its best-scored valley marks the wrist; the farthest occupied
column is the distal end; upper/lower boundary rows sampled at uniform
columns between the two give the matched keypoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMaskError, MaskGapError, NoValleyError, ParameterError
from .raster import BinaryMask


@dataclass(frozen=True)
class FeatureCurve:
    """Per-column profile; kind is "raw" (integer counts) or "filtered"."""

    values: np.ndarray
    kind: str = "raw"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("curve values must be 1-D")
        if self.kind not in ("raw", "filtered"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "values", v)
        v.flags.writeable = False

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class KalmanParams:
    """Constant-velocity filter noise settings; all strictly positive."""

    process_noise_q: float = 0.01
    measurement_noise_r: float = 4.0
    initial_variance_p0: float = 1.0

    def __post_init__(self):
        for name in ("process_noise_q", "measurement_noise_r", "initial_variance_p0"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class KeypointSet:
    """Boundary keypoints ordered distal->wrist, (upper, lower) per column."""

    points: np.ndarray  # (2k, 2) float64, columns (x, y)
    wrist_x: float
    distal_x: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        object.__setattr__(self, "points", pts)
        pts.flags.writeable = False

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "wrist_x": float(self.wrist_x),
            "distal_x": float(self.distal_x),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KeypointSet":
        return cls(
            points=np.asarray(d["points"], dtype=np.float64),
            wrist_x=float(d["wrist_x"]),
            distal_x=float(d["distal_x"]),
        )


def column_profile(mask: BinaryMask) -> FeatureCurve:
    """Foreground pixel count per column of a horizontally oriented mask."""
    counts = np.count_nonzero(mask.pixels, axis=0)
    return FeatureCurve(values=counts.astype(np.float64), kind="raw")


def kalman_smooth(curve: FeatureCurve, params: KalmanParams = KalmanParams()) -> FeatureCurve:
    """Forward constant-velocity Kalman filter along the column axis.

    State is (value, slope) with transition [[1, 1], [0, 1]] and the value
    observed; the filtered value sequence is returned.  Initialized at
    (values[0], 0) with covariance p0*I.
    """
    v = curve.values
    if v.shape[0] < 2:
        raise ParameterError("curve must have at least 2 samples")
    q = params.process_noise_q
    r = params.measurement_noise_r
    x0, x1 = float(v[0]), 0.0
    p00 = p11 = params.initial_variance_p0
    p01 = 0.0
    out = np.empty_like(v)
    out[0] = x0
    for i in range(1, v.shape[0]):
        # predict: x = F x, P = F P F^T + qI with F = [[1,1],[0,1]]
        x0 = x0 + x1
        p00 = p00 + 2.0 * p01 + p11 + q
        p01 = p01 + p11
        p11 = p11 + q
        # update with measured value
        innov = float(v[i]) - x0
        s = p00 + r
        k0 = p00 / s
        k1 = p01 / s
        x0 += k0 * innov
        x1 += k1 * innov
        p11 -= k1 * p01
        p01 -= k1 * p00
        p00 -= k0 * p00
        out[i] = x0
    return FeatureCurve(values=out, kind="filtered")


def default_window(width: int) -> int:
    """Valley-scoring window for a given profile width: width/16, even, in [8, 64]."""
    w = round(width / 16)
    if w % 2:
        w -= 1
    return int(min(64, max(8, w)))


def _valley_candidates(values: np.ndarray, min_prominence: float = 2.0) -> list[int]:
    """Plateau-aware strict local minima on positive columns, by prominence.

    A candidate is the leftmost column of a run of equal values that is
    strictly below both neighbors.  Prominence is the smaller of the two
    barrier heights climbed before reaching a strictly lower value.
    """
    n = values.shape[0]
    out: list[int] = []
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j < n - 1 and values[i - 1] > values[i] and values[j + 1] > values[j]:
            if values[i] > 0.0:
                prom = min(_barrier(values, i, -1), _barrier(values, j, +1)) - values[i]
                if prom >= min_prominence:
                    out.append(i)
        i = j + 1
    return out


def _barrier(values: np.ndarray, start: int, step: int) -> float:
    """Highest value reached walking from a valley before dropping below it."""
    best = values[start]
    k = start + step
    while 0 <= k < values.shape[0] and values[k] >= values[start]:
        if values[k] > best:
            best = values[k]
        k += step
    return float(best)


def wrist_score(values: np.ndarray, t: int, window: int) -> int:
    """Count of window samples strictly above the candidate valley.

    Window offsets run from -window/2 + 1 to +window/2; indices falling
    off the curve are clamped to its ends so border valleys stay scoreable.
    """
    n = values.shape[0]
    half = window // 2
    score = 0
    for i in range(1, window + 1):
        idx = t - half + i
        if idx < 0:
            idx = 0
        elif idx > n - 1:
            idx = n - 1
        if values[idx] - values[t] > 0:
            score += 1
    return score


def detect_wrist(curve: FeatureCurve, window: int) -> int:
    """Column of the best-scored valley of the filtered profile.

    Ties resolve to the deeper valley, then to the smaller column.
    """
    if window < 4 or window % 2:
        raise ParameterError(f"window must be even and >= 4, got {window}")
    values = curve.values
    candidates = _valley_candidates(values)
    if not candidates:
        raise NoValleyError("profile has no valley candidate")
    best_t = -1
    best_key: tuple[float, float, float] | None = None
    for t in candidates:
        key = (-wrist_score(values, t, window), values[t], t)
        if best_key is None or key < best_key:
            best_key = key
            best_t = t
    return best_t


def distal_point(mask: BinaryMask, wrist_x: int) -> int:
    """Occupied column farthest from the wrist.

    On a distance tie the column on the side of the wrist holding less
    foreground (the hand side) loses; a further tie goes to the smaller
    column.
    """
    counts = np.count_nonzero(mask.pixels, axis=0)
    occupied = np.nonzero(counts)[0]
    if occupied.size == 0:
        raise EmptyMaskError("mask has no foreground")
    lo, hi = int(occupied[0]), int(occupied[-1])
    d_lo, d_hi = abs(lo - wrist_x), abs(hi - wrist_x)
    if d_lo > d_hi:
        return lo
    if d_hi > d_lo:
        return hi
    left_mass = counts[:wrist_x].sum()
    right_mass = counts[wrist_x + 1 :].sum()
    if left_mass > right_mass:
        return lo
    if right_mass > left_mass:
        return hi
    return min(lo, hi)


def sample_edge_points(
    mask: BinaryMask, wrist_x: int, distal_x: int, n_columns: int = 10
) -> KeypointSet:
    """Upper/lower boundary rows at uniform columns from distal end to wrist.

    Columns are rounded to integers; collisions shift one pixel toward the
    wrist.  Each sampled column must contain foreground.
    """
    if n_columns < 2:
        raise ParameterError(f"n_columns must be >= 2, got {n_columns}")
    if wrist_x == distal_x:
        raise ParameterError("wrist and distal columns coincide")
    raw_xs = np.linspace(distal_x, wrist_x, n_columns)
    step = 1 if wrist_x > distal_x else -1
    used: set[int] = set()
    cols: list[int] = []
    for rx in raw_xs:
        x = int(np.rint(rx))
        while x in used:
            x += step
        used.add(x)
        cols.append(x)
    points = np.empty((2 * n_columns, 2), dtype=np.float64)
    px = mask.pixels
    for k, x in enumerate(cols):
        if x < 0 or x >= mask.width:
            raise MaskGapError(f"sampled column {x} outside the mask")
        rows = np.nonzero(px[:, x])[0]
        if rows.size == 0:
            raise MaskGapError(f"no foreground in sampled column {x}")
        points[2 * k] = (x, rows[0])
        points[2 * k + 1] = (x, rows[-1])
    return KeypointSet(points=points, wrist_x=float(wrist_x), distal_x=float(distal_x))


def curve_peak(curve: FeatureCurve) -> tuple[int, float]:
    """Global maximum of the profile; ties go to the smallest column."""
    values = curve.values
    if values.shape[0] == 0:
        raise ParameterError("empty curve")
    idx = int(np.argmax(values))
    return idx, float(values[idx])
