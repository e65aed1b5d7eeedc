"""
Crosswalk detection on the DOG map.

A crosswalk is a run of wide strips parallel to the lane. The search region
is cleaned (close, then a wide erode that wipes out ordinary lane markings),
Hough lines give the strip direction, the region is turned so strips stand
upright, and the column-wise maximum becomes a ±1 signal. Convolving that
signal with its own reversed negation is positive away from the centre only
when the signal alternates, which is what `crosswalk_score` measures.
"""

from __future__ import annotations

import cv2
import numpy as np

from egolane.config import PipelineConfig
from egolane.imaging import BinaryMap, hough_lines, morph
from egolane.markings.histogram import angle_distance, build_histogram, dominant_angle
from models import CrosswalkResult, LaneBase, Rect


def crosswalk_region(shape: tuple[int, int], lane: LaneBase | None, config: PipelineConfig) -> Rect:
    """Search window: rows `near..far` above the bottom, across the ego lane (central third without one)."""
    rows, cols = shape
    m = config.markings
    y0 = max(0, rows - 1 - m.crosswalk_far_rows)
    y1 = max(y0 + 1, rows - m.crosswalk_near_rows)
    if lane is None:
        x0, x1 = cols // 3, cols - cols // 3
    else:
        half = max(1.0, lane.width / 2.0 - m.crosswalk_lane_margin)
        center = (lane.p_b + lane.p_t) / 2.0
        x0 = int(np.clip(round(center - half), 0, cols - 1))
        x1 = int(np.clip(round(center + half), x0 + 1, cols))
    return Rect(x=x0, y=y0, width=x1 - x0, height=y1 - y0)


def crosswalk_signal(projection: BinaryMap) -> np.ndarray:
    """R = s ∗ (−reverse(s)) with s the projection mapped {0, 1} → {−1, +1}."""
    s = np.where(projection, 1.0, -1.0)
    return np.convolve(s, -s[::-1])


def crosswalk_score(projection: BinaryMap) -> float:
    """max(R) over the lags left of centre plus max(R) over the lags right of it."""
    r = crosswalk_signal(projection)
    center = len(r) // 2
    left, right = r[:center], r[center + 1:]
    if left.size == 0 or right.size == 0:
        return float("-inf")
    return float(left.max() + right.max())


def _count_runs(projection: BinaryMap) -> int:
    padded = np.concatenate(([False], projection.astype(bool), [False]))
    return int(np.count_nonzero(np.diff(padded.astype(np.int8)) == 1))


def _upright(region: BinaryMap, alpha: float) -> BinaryMap:
    rows, cols = region.shape
    rotation = cv2.getRotationMatrix2D((cols / 2.0, rows / 2.0), 90.0 - alpha, 1.0)
    turned = cv2.warpAffine(region.astype(np.uint8), rotation, (cols, rows), flags=cv2.INTER_NEAREST, borderValue=0)
    return turned.astype(bool)


def detect_crosswalk(dog: BinaryMap, prev_lane: LaneBase | None, config: PipelineConfig) -> CrosswalkResult:
    m = config.markings
    region = crosswalk_region(dog.shape, prev_lane, config)
    window = dog[region.y:region.y2, region.x:region.x2]
    cleaned = morph(morph(window, "close", m.crosswalk_close), "erode", m.crosswalk_erode)
    lines = hough_lines(cleaned, config.imaging)
    if not lines:
        return CrosswalkResult(detected=False, region=region)

    hist = build_histogram(lines, region.width, m.rho_bin, m.angle_bins, clip_rho=True)
    alpha = dominant_angle(hist, m.angle_window)
    assert alpha is not None
    lane_direction = prev_lane.theta if prev_lane is not None else 90.0
    if angle_distance(alpha, lane_direction) > m.crosswalk_max_angle_deviation:
        return CrosswalkResult(detected=False, dominant_angle=alpha, region=region)

    projection = _upright(cleaned, alpha).any(axis=0)
    score = crosswalk_score(projection)
    detected = score > 0 and _count_runs(projection) >= m.crosswalk_min_strips
    return CrosswalkResult(
        detected=detected, dominant_angle=alpha, region=region, score=score if np.isfinite(score) else None
    )
