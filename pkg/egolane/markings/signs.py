"""Road-sign candidates (DOG ∨ VAD blobs inside the ego lane) and their classification."""

from __future__ import annotations

import logging
from collections.abc import Mapping

import cv2
import numpy as np

from egolane.config import MarkingsConfig, PipelineConfig
from egolane.imaging import BinaryMap, GrayImage, morph, ncc
from models import LaneBase, Rect, RoadSign, SignClass

logger = logging.getLogger(__name__)


def lane_offsets(shape: tuple[int, int], lane: LaneBase | None) -> tuple[np.ndarray, float]:
    """Signed horizontal distance of every pixel to the lane centre line, and the lane half width."""
    rows, cols = shape
    if lane is None:
        center = np.full(rows, cols / 2.0)
        half = cols / 6.0
    else:
        t = (rows - 1 - np.arange(rows)) / max(rows - 1, 1)
        center = lane.p_b + (lane.p_t - lane.p_b) * t
        half = lane.width / 2.0
    return np.arange(cols)[None, :] - center[:, None], half


def row_runs(flags: np.ndarray, max_gap: int, min_length: int) -> list[tuple[int, int]]:
    """Inclusive (start, end) runs of True, bridging gaps up to `max_gap`, at least `min_length` long."""
    idx = np.flatnonzero(flags)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > max_gap + 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    ends = np.concatenate((idx[breaks], [idx[-1]]))
    return [(int(s), int(e)) for s, e in zip(starts, ends) if e - s + 1 >= min_length]


def extract_sign_candidates(
    dog: BinaryMap,
    vad: BinaryMap,
    gray: GrayImage,
    lane: LaneBase | None,
    config: MarkingsConfig,
    exclude: Rect | None = None,
) -> list[Rect]:
    offsets, half = lane_offsets(dog.shape, lane)
    region = np.abs(offsets) <= max(1.0, half - config.sign_lane_margin)
    center_band = np.abs(offsets) <= half * config.sign_center_band
    evidence = morph((dog | vad) & region, "close", config.sign_close) & region
    if exclude is not None:
        evidence[exclude.y:exclude.y2, exclude.x:exclude.x2] = False

    boxes: list[Rect] = []
    for top, bottom in row_runs(evidence.any(axis=1), config.sign_row_gap, config.sign_min_height):
        band = evidence[top:bottom + 1]
        cols = np.flatnonzero(band.any(axis=0))
        if not (band & center_band[top:bottom + 1]).any():
            continue
        boxes.append(Rect(x=int(cols[0]), y=top, width=int(cols[-1] - cols[0] + 1), height=bottom - top + 1))
    if not boxes:
        return []

    surround = region.copy()
    for box in boxes:
        surround[box.y:box.y2, box.x:box.x2] = False
    if not surround.any():
        return boxes
    values = gray[surround].astype(np.float64)
    bright = values.mean() + values.std()
    return [b for b in boxes if gray[b.y:b.y2, b.x:b.x2].mean() > bright]


def classify_sign(
    candidate: GrayImage,
    templates: Mapping[SignClass, GrayImage],
    aspect_threshold: float = 4.0,
    match_threshold: float = 0.6,
    bbox: Rect | None = None,
) -> RoadSign:
    rows, cols = candidate.shape[:2]
    box = bbox or Rect(x=0, y=0, width=cols, height=rows)
    if box.aspect_ratio > aspect_threshold:
        return RoadSign(sign_class=SignClass.STOP_LINE, bbox=box)
    best_class, best_score = SignClass.UNKNOWN, 0.0
    for sign_class, template in templates.items():
        resized = cv2.resize(candidate, (template.shape[1], template.shape[0]), interpolation=cv2.INTER_AREA)
        score = ncc(resized, template)
        if score > best_score:
            best_class, best_score = sign_class, score
    if best_score <= match_threshold:
        return RoadSign(sign_class=SignClass.UNKNOWN, bbox=box, score=best_score)
    return RoadSign(sign_class=best_class, bbox=box, score=best_score)


def detect_road_signs(
    dog: BinaryMap,
    vad: BinaryMap,
    gray: GrayImage,
    lane: LaneBase | None,
    templates: Mapping[SignClass, GrayImage],
    config: PipelineConfig,
    exclude: Rect | None = None,
) -> list[RoadSign]:
    m = config.markings
    signs = []
    for box in extract_sign_candidates(dog, vad, gray, lane, m, exclude):
        crop = gray[box.y:box.y2, box.x:box.x2]
        signs.append(classify_sign(crop, templates, m.sign_aspect_threshold, m.sign_match_threshold, bbox=box))
    if signs:
        logger.debug("Road signs: %s", ", ".join(s.sign_class.value for s in signs))
    return signs
