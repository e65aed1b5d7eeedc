"""
Prediction vs ground-truth metrics.

Lane accuracy is the absolute boundary error at the evaluation rows as a
percentage of the true lane width, reported separately for the near rows and
the far row. Frames where the truth has a lane but the prediction has none
lower the coverage; they never enter the MAE. Rows outside the predicted trust
area are excluded and counted.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from models import (
    FrameAnalysis,
    GroundTruth,
    GroundTruthFrame,
    LaneRecord,
    MetricsReport,
    RunHeader,
    SignClass,
    StageTiming,
)

logger = logging.getLogger(__name__)

LANE_CHANGE_TOLERANCE = 15

ERROR_COLUMNS = ["frame_index", "row", "region", "side", "pred_x", "gt_x", "error_pct"]


def align_predictions(
    analyses: Iterable[FrameAnalysis], frame_indices: Sequence[int] | None = None
) -> dict[int, FrameAnalysis]:
    """Key each analysis by its source frame (runs with dropped frames carry the mapping in the header)."""
    aligned: dict[int, FrameAnalysis] = {}
    for analysis in analyses:
        index = analysis.frame_index
        if frame_indices is not None:
            if index >= len(frame_indices):
                logger.warning("Frame %d has no source index; ignored", index)
                continue
            index = frame_indices[index]
        aligned[index] = analysis
    return aligned


def boundary_at_row(lane: LaneRecord, row: int, side: str) -> float | None:
    """Predicted boundary x at an image row, or None when the row lies outside the sampled trust area."""
    if not lane.rows:
        return None
    rows = np.asarray(lane.rows[::-1], dtype=np.float64)
    xs = np.asarray((lane.left if side == "left" else lane.right)[::-1], dtype=np.float64)
    if not rows[0] <= row <= rows[-1]:
        return None
    return float(np.interp(row, rows, xs))


def _center_at_bottom(lane: LaneRecord) -> float | None:
    return float(lane.center[0]) if lane.center else None


def lane_error_table(pred: Mapping[int, FrameAnalysis], gt: GroundTruth) -> tuple[pd.DataFrame, int, int, int]:
    """
    One row per (frame, evaluation row, side) with a usable prediction.

    Returns (table, frames considered, frames with a predicted lane, excluded points).
    """
    records: list[dict] = []
    considered = with_lane = excluded = 0
    for truth in gt.frames:
        analysis = pred.get(truth.frame_index)
        if analysis is None:
            continue
        considered += 1
        if analysis.lane is None:
            continue
        with_lane += 1
        for k, row in enumerate(gt.eval_rows):
            region = "near" if k < gt.near_rows else "far"
            for side, true_x in (("left", truth.left[k]), ("right", truth.right[k])):
                x = boundary_at_row(analysis.lane, row, side)
                if x is None:
                    excluded += 1
                    continue
                records.append(
                    {
                        "frame_index": truth.frame_index,
                        "row": row,
                        "region": region,
                        "side": side,
                        "pred_x": x,
                        "gt_x": true_x,
                        "error_pct": 100.0 * abs(x - true_x) / truth.width,
                    }
                )
    return pd.DataFrame.from_records(records, columns=ERROR_COLUMNS), considered, with_lane, excluded


def _mean_std(values: pd.Series) -> tuple[float | None, float | None]:
    if values.empty:
        return None, None
    return float(values.mean()), float(values.std(ddof=0))


def lane_metrics(pred: Mapping[int, FrameAnalysis], gt: GroundTruth) -> dict[str, float | int | None]:
    table, considered, with_lane, excluded = lane_error_table(pred, gt)
    near_mae, near_std = _mean_std(table.loc[table["region"] == "near", "error_pct"])
    far_mae, far_std = _mean_std(table.loc[table["region"] == "far", "error_pct"])

    center_errors: list[float] = []
    deviation_errors: list[float] = []
    for truth in gt.frames:
        analysis = pred.get(truth.frame_index)
        if analysis is None or analysis.lane is None:
            continue
        center = _center_at_bottom(analysis.lane)
        if center is not None:
            center_errors.append(100.0 * abs(center - truth.center) / truth.width)
        if analysis.deviation is not None:
            deviation_errors.append(100.0 * abs(analysis.deviation - truth.deviation))

    return {
        "near_mae_pct": near_mae,
        "near_std_pct": near_std,
        "far_mae_pct": far_mae,
        "far_std_pct": far_std,
        "center_mae_pct": float(np.mean(center_errors)) if center_errors else None,
        "deviation_mae_pct": float(np.mean(deviation_errors)) if deviation_errors else None,
        "coverage": with_lane / considered if considered else 0.0,
        "excluded_points": excluded,
    }


def _signs_match(analysis: FrameAnalysis, truth: GroundTruthFrame) -> bool:
    found = sorted({s.sign_class for s in analysis.road_signs if s.sign_class != SignClass.UNKNOWN})
    return found == sorted(set(truth.signs))


def _lmt_match(predicted, labels) -> bool:
    if not labels:
        return predicted is None
    return predicted in labels


def _accuracy(hits: list[bool]) -> float | None:
    return sum(hits) / len(hits) if hits else None


def detection_metrics(pred: Mapping[int, FrameAnalysis], gt: GroundTruth) -> dict[str, float | None]:
    """
    Per-frame accuracy of each detector. Crosswalk and signs are scored on every
    predicted frame; LMT and adjacency only where a lane was reported. Around an
    LMT change either annotated class counts as correct.
    """
    crosswalk: list[bool] = []
    signs: list[bool] = []
    lmt: list[bool] = []
    adjacency: list[bool] = []
    for truth in gt.frames:
        analysis = pred.get(truth.frame_index)
        if analysis is None:
            continue
        crosswalk.append(analysis.crosswalk.detected == truth.crosswalk)
        signs.append(_signs_match(analysis, truth))
        if analysis.lane is None:
            continue
        lmt.append(_lmt_match(analysis.lmt_left, truth.lmt_left))
        lmt.append(_lmt_match(analysis.lmt_right, truth.lmt_right))
        adjacency.append(analysis.adjacent_left == truth.adjacent_left)
        adjacency.append(analysis.adjacent_right == truth.adjacent_right)
    return {
        "crosswalk_accuracy": _accuracy(crosswalk),
        "sign_accuracy": _accuracy(signs),
        "lmt_accuracy": _accuracy(lmt),
        "adjacency_accuracy": _accuracy(adjacency),
    }


def lane_change_metrics(
    pred: Mapping[int, FrameAnalysis], gt: GroundTruth, tolerance: int = LANE_CHANGE_TOLERANCE
) -> dict[str, float | None]:
    """Greedy one-to-one matching of events of the same direction within ±`tolerance` frames."""
    truth_events = [(f.frame_index, f.lane_change) for f in gt.frames if f.lane_change is not None]
    predicted = sorted((i, a.lane_change) for i, a in pred.items() if a.lane_change is not None)
    unmatched = list(truth_events)
    matched = 0
    for index, kind in predicted:
        candidates = [e for e in unmatched if e[1] == kind and abs(e[0] - index) <= tolerance]
        if candidates:
            unmatched.remove(min(candidates, key=lambda e: abs(e[0] - index)))
            matched += 1
    return {
        "lane_change_precision": matched / len(predicted) if predicted else None,
        "lane_change_recall": matched / len(truth_events) if truth_events else None,
    }


def timing_stats(analyses: Iterable[FrameAnalysis]) -> dict[str, StageTiming]:
    frame = pd.DataFrame([a.timings_ms for a in analyses])
    if frame.empty:
        return {}
    return {
        str(name): StageTiming(mean_ms=float(column.mean()), std_ms=float(column.std(ddof=0)))
        for name, column in frame.items()
    }


def evaluate(
    header: RunHeader,
    analyses: Sequence[FrameAnalysis],
    gt: GroundTruth,
    label: str | None = None,
) -> MetricsReport:
    pred = align_predictions(analyses, header.frame_indices)
    report = MetricsReport(
        frames=len(pred),
        timings=timing_stats(analyses),
        label=label,
        **lane_metrics(pred, gt),
        **detection_metrics(pred, gt),
        **lane_change_metrics(pred, gt),
    )
    logger.info(
        "Evaluated %d frames: near %s%%, far %s%%, coverage %.2f",
        report.frames,
        _fmt(report.near_mae_pct),
        _fmt(report.far_mae_pct),
        report.coverage,
    )
    return report


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def write_error_csv(pred: Mapping[int, FrameAnalysis], gt: GroundTruth, path) -> int:
    """Per-frame, per-row boundary errors for plotting; returns the number of rows written."""
    table, _, _, _ = lane_error_table(pred, gt)
    table.to_csv(path, index=False, float_format="%.4f")
    return len(table)
