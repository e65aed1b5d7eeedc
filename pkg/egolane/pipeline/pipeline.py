"""
Per-frame ego-lane analysis.

  1. preprocess + feature maps (SRF, DOG, VAD, INB, CMB)
  2. crosswalk and road-sign detection on DOG/VAD
  3. removal of both from every map
  4. Hough on the skeleton of SRF → side candidates → buffers → measurement
     → Kalman + FSM lane base
  5. trust area → particle filter (or the straight base when disabled)
  6. lane marking types, then adjacent lanes, deviation and lane changes

All state that survives between frames lives in `PipelineState`.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from egolane.attributes import (
    LaneChangeDetector,
    LmtBuffer,
    classify_lmt_raw,
    detect_adjacent,
    deviation,
    report_lmt,
)
from egolane.config import PipelineConfig
from egolane.errors import FrameReadError
from egolane.features import extract_feature_maps, preprocess
from egolane.imaging import GrayImage, Homography, hough_lines, skeletonize
from egolane.lane import (
    LaneBuffers,
    LaneCurvatureFilter,
    LaneEstimate,
    LaneTracker,
    build_measurement,
    estimate_from_base,
    fsm_step,
    lines_from_base,
    pair_evidence,
    row_distance_map,
    select_side_candidates,
    trust_area,
    update_buffers,
)
from egolane.markings import detect_crosswalk, detect_road_signs, load_templates, remove_markings
from egolane.pipeline.frames import read_frame
from egolane.pipeline.timing import StageTimer
from models import FrameAnalysis, FrameError, LaneBase, LaneMarkingType, SignClass

logger = logging.getLogger(__name__)

_LMT_ROW_STEP = 2


@dataclass
class PipelineState:
    buffers: LaneBuffers
    tracker: LaneTracker
    curvature: LaneCurvatureFilter
    lmt_left: LmtBuffer
    lmt_right: LmtBuffer
    lane_change: LaneChangeDetector
    raw_left: LaneMarkingType | None = None
    raw_right: LaneMarkingType | None = None
    last_base: LaneBase | None = None
    last_estimate: LaneEstimate | None = None
    frames_seen: int = 0

    @classmethod
    def initial(cls, config: PipelineConfig) -> PipelineState:
        a = config.attributes
        rng = np.random.default_rng(config.seed)
        return cls(
            buffers=LaneBuffers.create(config.measurement.buffer_size),
            tracker=LaneTracker(config.kalman, config.ipm_height),
            curvature=LaneCurvatureFilter(config.particles, config.ipm_height, rng),
            lmt_left=LmtBuffer(a.lmt_buffer_size),
            lmt_right=LmtBuffer(a.lmt_buffer_size),
            lane_change=LaneChangeDetector(a.lane_change_threshold, a.lane_change_jump, a.lane_change_window),
        )

    def reset_lane(self) -> None:
        """Forget the current lane; the next measurement starts a new one."""
        self.buffers.left.clear()
        self.buffers.right.clear()
        self.tracker.reset()
        self.curvature.reset()

    def hand_over_lmt(self, change: str) -> None:
        """After a lane change the boundary that was crossed becomes the other side of the new lane."""
        if change == "to_right":
            crossed, fresh = self.lmt_right, self.lmt_left
            self.raw_left, self.raw_right = self.raw_right, None
        else:
            crossed, fresh = self.lmt_left, self.lmt_right
            self.raw_left, self.raw_right = None, self.raw_left
        fresh.history.clear()
        fresh.history.extend(crossed.history)
        crossed.history.clear()


def _boundary_samples(estimate: LaneEstimate, height: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = np.arange(0, max(estimate.trust_height, 1), _LMT_ROW_STEP, dtype=np.float64)
    left, right = estimate.boundaries_at(v)
    rows = (height - 1 - v).astype(int)
    return rows, left, right


def process_frame(
    frame: np.ndarray,
    state: PipelineState,
    config: PipelineConfig,
    templates: Mapping[SignClass, GrayImage],
    homography: Homography | None = None,
) -> tuple[FrameAnalysis, PipelineState]:
    """Analyse one frame. `state` is advanced in place and returned."""
    timer = StageTimer()
    flags: list[str] = []
    height = config.ipm_height
    prev_base = state.last_base

    with timer.stage("feature_maps_generation"):
        pre = preprocess(frame, config, homography)
        maps = extract_feature_maps(pre, config)

    with timer.stage("crosswalk_and_road_signs_detection"):
        crosswalk = detect_crosswalk(maps.dog, prev_base, config)
        exclude = crosswalk.region if crosswalk.detected else None
        signs = detect_road_signs(maps.dog, maps.vad, pre.gray_ipm, prev_base, templates, config, exclude)

    with timer.stage("crosswalk_and_road_signs_removal"):
        clean = remove_markings(maps, crosswalk, signs, config.markings.removal_margin)

    m = config.measurement
    with timer.stage("candidates_generation_and_kalman"):
        lines = hough_lines(skeletonize(clean.srf), config.imaging)
        distances = row_distance_map(clean.cmb)
        left, right = select_side_candidates(
            lines, clean.cmb, config.vehicle_x, m, config.markings.rho_bin, config.markings.angle_bins, distances
        )
        left_ok, left_swap = update_buffers(left, state.buffers.left, m.buffer_distance)
        right_ok, right_swap = update_buffers(right, state.buffers.right, m.buffer_distance)
        if left_swap or right_swap:
            flags.append("buffer_swap")
            state.tracker.reset()
            state.curvature.reset()
        measurement = build_measurement(
            left if left_ok else None,
            right if right_ok else None,
            prev_base,
            clean.cmb,
            config.validity_threshold,
            m.evidence_radius,
            distances,
        )

        def supported(base: LaneBase) -> bool:
            l, r = lines_from_base(base, height)
            return pair_evidence(l, r, clean.cmb, m.evidence_radius, distances) > config.validity_threshold

        base, tracker_flags = fsm_step(state.tracker, measurement, supported)
        flags.extend(tracker_flags)

    estimate: LaneEstimate | None = None
    with timer.stage("particle_filter"):
        if base is not None:
            trust = trust_area(clean.vad, state.last_estimate, signs, config.particles)
            if config.particles.enabled:
                estimate, pf_flags = state.curvature.step(base, clean.cmb, trust)
                flags.extend(pf_flags)
            else:
                estimate = estimate_from_base(base, height, trust)

    lmt_left = lmt_right = None
    with timer.stage("lane_marking_type_detection"):
        if estimate is not None:
            rows, xs_left, xs_right = _boundary_samples(estimate, height)
            a = config.attributes
            band = estimate.w1 * a.band_fraction
            state.raw_left, empty_left = classify_lmt_raw(
                rows, xs_left, "left", band, clean.inb, pre.color_ipm, a, state.raw_left
            )
            state.raw_right, empty_right = classify_lmt_raw(
                rows, xs_right, "right", band, clean.inb, pre.color_ipm, a, state.raw_right
            )
            if empty_left or empty_right:
                flags.append("lmt_band_empty")
            lmt_left = report_lmt(state.lmt_left, state.raw_left if not empty_left else None)
            lmt_right = report_lmt(state.lmt_right, state.raw_right if not empty_right else None)

    adjacent_left = adjacent_right = None
    dev = None
    lane_change = None
    with timer.stage("adjacent_lane_detection"):
        if base is not None:
            adjacent_left = detect_adjacent("left", lmt_left, base, lines, config.attributes)
            adjacent_right = detect_adjacent("right", lmt_right, base, lines, config.attributes)
        dev = deviation(config.vehicle_x, base)
        lane_change = state.lane_change.update(dev)
        if lane_change is not None:
            state.hand_over_lmt(lane_change)
        if dev is not None and abs(dev) > config.kalman.deviation_reset:
            logger.info("Deviation %.2f out of range; resetting the lane", dev)
            flags.append("deviation_reset")
            state.reset_lane()

    analysis = FrameAnalysis(
        frame_index=state.frames_seen,
        lane=estimate.to_record() if estimate is not None else None,
        lane_base=base,
        tracker_status=state.tracker.status,
        lmt_left=lmt_left,
        lmt_right=lmt_right,
        adjacent_left=adjacent_left,
        adjacent_right=adjacent_right,
        deviation=dev,
        lane_change=lane_change,
        crosswalk=crosswalk,
        road_signs=signs,
        flags=flags,
        timings_ms=timer.finish(),
    )
    state.last_base = base
    state.last_estimate = estimate
    state.frames_seen += 1
    if flags:
        logger.debug("Frame %d flags: %s", analysis.frame_index, ", ".join(flags))
    return analysis, state


class LanePipeline:
    """Owns the config, templates, homography and state of one run."""

    def __init__(
        self,
        config: PipelineConfig,
        templates: Mapping[SignClass, GrayImage] | None = None,
    ) -> None:
        self.config = config
        self.homography = Homography.from_values(config.homography)
        template_dir = Path(config.markings.template_dir) if config.markings.template_dir else None
        self.templates = templates or load_templates(template_dir, config.markings.sign_template_size)
        self.state = PipelineState.initial(config)

    def process(self, frame: np.ndarray) -> FrameAnalysis:
        analysis, self.state = process_frame(frame, self.state, self.config, self.templates, self.homography)
        return analysis

    def run(
        self,
        frames: Iterable[np.ndarray | Path],
        transform: Callable[[np.ndarray], np.ndarray] | None = None,
    ) -> Iterator[FrameAnalysis | FrameError]:
        """Analyse a sequence; paths are read lazily and unreadable ones become error records."""
        for item in frames:
            if isinstance(item, Path):
                try:
                    frame = read_frame(item)
                except FrameReadError as exc:
                    logger.warning("Skipping frame %d: %s", self.state.frames_seen, exc)
                    yield FrameError(frame_index=self.state.frames_seen, error=str(exc))
                    self.state.frames_seen += 1
                    continue
            else:
                frame = item
            yield self.process(transform(frame) if transform is not None else frame)
