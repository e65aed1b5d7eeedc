"""
Lane-base measurement from Hough lines.

Each line is scored against the CMB map, the scores go into a (ρ, θ)
histogram, and the strongest ρ on either side of the vehicle becomes that
side's candidate after the punishment step has favoured the innermost
marking. The two sides are finally combined into one measurement; a missing
side is mirrored from the other one using the previous lane width.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from scipy.ndimage import distance_transform_edt

from egolane.config import MeasurementConfig
from egolane.imaging import BinaryMap, HoughLine
from egolane.markings.histogram import build_histogram, dominant_angle
from models import LaneBase, LaneMeasurement

# Vertical sampling weight for the row-restricted distance transform: large
# enough that evidence in another row is never the nearest.
_ROW_ISOLATION = 1.0e6


def row_distance_map(cmb: BinaryMap) -> np.ndarray:
    """Horizontal distance from every pixel to the nearest evidence in its own row."""
    if not cmb.any():
        return np.full(cmb.shape, np.inf)
    return distance_transform_edt(~cmb.astype(bool), sampling=(_ROW_ISOLATION, 1.0))


def line_evidence_score(
    line: HoughLine,
    cmb: BinaryMap,
    b: float,
    row_distance: np.ndarray | None = None,
) -> float:
    """v(L) = Σ over in-image rows of max(0, b − distance to the nearest CMB evidence)."""
    dist = row_distance_map(cmb) if row_distance is None else row_distance
    rows = np.arange(cmb.shape[0])
    xs = np.rint(line.x_at(rows)).astype(int)
    inside = (xs >= 0) & (xs < cmb.shape[1])
    d = dist[rows[inside], xs[inside]]
    return float(np.maximum(0.0, b - d).sum())


def apply_punishment(
    h1d: np.ndarray,
    vehicle_x: float,
    gamma: float,
    neutral_halfwidth: float,
    bin_width: float = 1.0,
) -> np.ndarray:
    """
    Scale every bin outside the neutral band by 1 − γ·m, where m is the
    largest value strictly closer to the vehicle on the same side (neutral
    bins excluded). Inner markings therefore suppress outer ones.
    """
    values = np.asarray(h1d, dtype=np.float64)
    out = values.copy()
    centers = (np.arange(values.size) + 0.5) * bin_width
    neutral = np.abs(centers - vehicle_x) <= neutral_halfwidth
    left = np.flatnonzero((centers < vehicle_x) & ~neutral)[::-1]
    right = np.flatnonzero((centers >= vehicle_x) & ~neutral)
    for order in (left, right):
        if order.size == 0:
            continue
        side = values[order]
        inner_max = np.maximum.accumulate(np.concatenate(([0.0], side[:-1])))
        out[order] = side * np.clip(1.0 - gamma * inner_max, 0.0, 1.0)
    return out


def _angle_band(angle_bins: int, alpha: int, delta: int) -> np.ndarray:
    diff = np.abs(np.arange(angle_bins) - alpha)
    return np.minimum(diff, angle_bins - diff) <= delta


def select_side_candidates(
    lines: Sequence[HoughLine],
    cmb: BinaryMap,
    vehicle_x: float,
    config: MeasurementConfig,
    rho_bin: int = 3,
    angle_bins: int = 360,
    row_distance: np.ndarray | None = None,
) -> tuple[HoughLine | None, HoughLine | None]:
    if not lines:
        return None, None
    dist = row_distance_map(cmb) if row_distance is None else row_distance
    scores = [line_evidence_score(line, cmb, config.evidence_radius, dist) for line in lines]
    hist = build_histogram(lines, cmb.shape[1], rho_bin, angle_bins, weights=scores)
    alpha = dominant_angle(hist, config.angle_window)
    if alpha is None:
        return None, None

    band = _angle_band(angle_bins, alpha, config.angle_mask)
    h1d = hist.counts[:, band].max(axis=1)
    peak = h1d.max()
    if peak <= 0:
        return None, None
    punished = apply_punishment(h1d / peak, vehicle_x, config.gamma, config.neutral_halfwidth, rho_bin)
    centers = hist.rho_center(np.arange(h1d.size))

    picked: list[HoughLine | None] = []
    for side in (centers < vehicle_x, centers >= vehicle_x):
        masked = np.where(side, punished, 0.0)
        if masked.max() <= 0:
            picked.append(None)
            continue
        target = int(np.argmax(masked))
        in_bin = [
            (score, i)
            for i, (line, score) in enumerate(zip(lines, scores))
            if math.floor(line.rho / rho_bin) == target and band[int(math.floor(line.theta)) % angle_bins]
        ]
        picked.append(lines[max(in_bin)[1]] if in_bin else None)
    return picked[0], picked[1]


def lines_from_base(base: LaneBase | LaneMeasurement, height: int) -> tuple[HoughLine, HoughLine]:
    """Left and right boundaries of a straight lane base as lines."""
    half = base.width / 2.0
    bottom = height - 1
    left = HoughLine.from_segment(base.p_b - half, bottom, base.p_t - half, 0, base_row=bottom)
    right = HoughLine.from_segment(base.p_b + half, bottom, base.p_t + half, 0, base_row=bottom)
    return left, right


def pair_evidence(
    left: HoughLine,
    right: HoughLine,
    cmb: BinaryMap,
    b: float,
    row_distance: np.ndarray | None = None,
) -> float:
    dist = row_distance_map(cmb) if row_distance is None else row_distance
    return line_evidence_score(left, cmb, b, dist) + line_evidence_score(right, cmb, b, dist)


def build_measurement(
    left: HoughLine | None,
    right: HoughLine | None,
    prev: LaneBase | LaneMeasurement | None,
    cmb: BinaryMap,
    validity_threshold: float,
    b: float = 5.0,
    row_distance: np.ndarray | None = None,
) -> LaneMeasurement | None:
    """
    Combine the side candidates. Returns None when there is nothing to combine
    or when the pair's CMB support is not above `validity_threshold`.
    """
    height = cmb.shape[0]
    if left is not None and right is not None:
        source = "pair"
    elif left is not None and prev is not None:
        source, right = "single_left", left.shifted(prev.width)
    elif right is not None and prev is not None:
        source, left = "single_right", right.shifted(-prev.width)
    elif left is None and right is None and prev is not None:
        source = "carry_over"
        left, right = lines_from_base(prev, height)
    else:
        return None
    assert left is not None and right is not None

    if pair_evidence(left, right, cmb, b, row_distance) <= validity_threshold:
        return None
    width = right.rho - left.rho
    if width <= 0:
        return None
    top_left, top_right = float(left.x_at(0.0)), float(right.x_at(0.0))
    return LaneMeasurement(
        p_b=(left.rho + right.rho) / 2.0,
        p_t=(top_left + top_right) / 2.0,
        width=width,
        theta=(left.theta + right.theta) / 2.0,
        source=source,
    )
