"""Debug overlay: the analysis drawn back onto the perspective frame."""

from __future__ import annotations

import cv2
import numpy as np

from egolane.config import PipelineConfig
from egolane.imaging import Homography, as_color
from models import FrameAnalysis

_LANE = (0, 220, 0)
_CONTROL = (0, 160, 255)
_SIGN = (255, 0, 255)
_TEXT = (255, 255, 255)


def _to_frame(points_ipm: np.ndarray, homography: Homography, config: PipelineConfig) -> np.ndarray:
    persp = homography.back_project(points_ipm)
    persp[:, 0] += config.roi.x
    persp[:, 1] += config.roi.y
    return np.rint(persp).astype(np.int32)


def render_overlay(
    frame: np.ndarray,
    analysis: FrameAnalysis,
    config: PipelineConfig,
    homography: Homography | None = None,
) -> np.ndarray:
    h = homography or Homography.from_values(config.homography)
    canvas = as_color(frame).copy()
    lane = analysis.lane
    if lane is not None and lane.rows:
        rows = np.asarray(lane.rows, dtype=np.float64)
        for xs in (lane.left, lane.right):
            pts = _to_frame(np.column_stack([xs, rows]), h, config)
            cv2.polylines(canvas, [pts.reshape(-1, 1, 2)], False, _LANE, 2)
        top = float(config.ipm_height - 1)
        control_rows = np.array([top, top / 2.0, 0.0])
        for pt in _to_frame(np.column_stack([lane.control_points, control_rows]), h, config):
            cv2.circle(canvas, (int(pt[0]), int(pt[1])), 4, _CONTROL, cv2.FILLED)

    for sign in analysis.road_signs:
        b = sign.bbox
        corners = np.array([[b.x, b.y], [b.x2, b.y], [b.x2, b.y2], [b.x, b.y2]], dtype=np.float64)
        cv2.polylines(canvas, [_to_frame(corners, h, config).reshape(-1, 1, 2)], True, _SIGN, 2)

    lines = [
        f"L {analysis.lmt_left or '-'}  R {analysis.lmt_right or '-'}",
        f"dev {analysis.deviation:+.2f}" if analysis.deviation is not None else "dev -",
        f"tracker {analysis.tracker_status}",
    ]
    if analysis.crosswalk.detected:
        lines.append("crosswalk")
    if analysis.lane_change:
        lines.append(f"lane change {analysis.lane_change}")
    for i, text in enumerate(lines):
        cv2.putText(canvas, text, (10, 24 + 22 * i), cv2.FONT_HERSHEY_SIMPLEX, 0.6, _TEXT, 1, cv2.LINE_AA)
    return canvas
