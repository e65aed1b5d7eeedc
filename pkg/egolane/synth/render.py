"""
Synthetic road frames with exact ground truth.

Markings are drawn on an enlarged IPM canvas (bird's-eye, so every marking is
a simple polygon there) and the canvas is warped into the perspective RoI with
the pipeline's own homography. The pipeline sees a camera view; the oracle
knows every boundary, marking type and road sign by construction.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from pathlib import Path

import cv2
import numpy as np
from pydantic import ValidationError

from egolane.config import PipelineConfig
from egolane.errors import ConfigError, SceneSpecError
from egolane.imaging import Homography
from egolane.markings.templates import TemplateSet, render_templates
from egolane.synth.geometry import RoadGeometry, evaluation_rows
from models import GroundTruth, GroundTruthFrame, LaneMarkingType, SceneSpec, SignClass

logger = logging.getLogger(__name__)

# Canvas margins around the IPM rectangle. The top margin reaches far enough
# that the upper RoI rows (beyond the IPM top) still show the road.
_MARGIN_X = 320
_MARGIN_TOP = 640
_MARGIN_BOTTOM = 40
_SUBPIXEL_SHIFT = 3
_SKY = 120
_EDGE_SAMPLE_STEP = 8.0

_SOLID = {LaneMarkingType.WSS, LaneMarkingType.YSS, LaneMarkingType.YDS}
_DOUBLE = {LaneMarkingType.YDS, LaneMarkingType.YMS, LaneMarkingType.YMD}


def _line_patterns(lmt: LaneMarkingType, inner_sign: float) -> list[tuple[float, bool]]:
    """(offset in units of half the double spacing, solid?) for each painted line of a boundary."""
    if lmt not in _DOUBLE:
        return [(0.0, lmt in _SOLID)]
    if lmt == LaneMarkingType.YDS:
        return [(-1.0, True), (1.0, True)]
    inner_solid = lmt == LaneMarkingType.YMS
    return [(inner_sign, inner_solid), (-inner_sign, not inner_solid)]


class SceneRenderer:
    def __init__(self, spec: SceneSpec, config: PipelineConfig, templates: TemplateSet | None = None) -> None:
        self.spec = spec
        self.config = config
        self.geometry = RoadGeometry.of(spec, config)
        self.geometry.validate()
        self.templates = templates or render_templates(config.markings.sign_template_size)
        homography = Homography.from_values(config.homography)
        to_canvas = np.array([[1.0, 0.0, _MARGIN_X], [0.0, 1.0, _MARGIN_TOP], [0.0, 0.0, 1.0]])
        # RoI pixel → canvas pixel, used with WARP_INVERSE_MAP
        self._roi_to_canvas = to_canvas @ homography.matrix
        self._canvas_size = (
            config.ipm_width + 2 * _MARGIN_X,
            config.ipm_height + _MARGIN_TOP + _MARGIN_BOTTOM,
        )
        self._v_min = -float(_MARGIN_BOTTOM)
        self._v_max = float(config.ipm_height - 1 + _MARGIN_TOP)
        self.eval_rows = evaluation_rows(config.ipm_height)

    # ------------------------------------------------------------------ drawing

    def _to_canvas(self, xs: np.ndarray, v: np.ndarray) -> np.ndarray:
        ys = (self.config.ipm_height - 1 - v) + _MARGIN_TOP
        pts = np.stack([xs + _MARGIN_X, ys], axis=1)
        return np.round(pts * (1 << _SUBPIXEL_SHIFT)).astype(np.int32)

    def _fill_band(self, canvas: np.ndarray, left_of, v0: float, v1: float, width: float, color) -> None:
        v0, v1 = max(v0, self._v_min), min(v1, self._v_max)
        if v1 <= v0:
            return
        n = max(2, math.ceil((v1 - v0) / _EDGE_SAMPLE_STEP) + 1)
        v = np.linspace(v0, v1, n)
        left = np.asarray(left_of(v), dtype=np.float64)
        outline = np.concatenate([self._to_canvas(left, v), self._to_canvas(left + width, v)[::-1]])
        cv2.fillPoly(canvas, [outline], color, lineType=cv2.LINE_AA, shift=_SUBPIXEL_SHIFT)

    def _dash_intervals(self, t: int, boundary: int, line: int) -> Iterator[tuple[float, float]]:
        spec = self.spec
        period = spec.dash_length + spec.dash_gap
        travelled = self.geometry.travelled(t)
        first = math.floor((travelled + self._v_min) / period)
        last = math.floor((travelled + self._v_max) / period)
        for k in range(first, last + 1):
            if spec.noise.dash_erosion_prob > 0:
                draw = np.random.default_rng([spec.seed, boundary, line, k + (1 << 20)]).random()
                if draw < spec.noise.dash_erosion_prob:
                    continue
            yield k * period - travelled, k * period + spec.dash_length - travelled

    def _draw_boundaries(self, canvas: np.ndarray, t: int) -> None:
        spec = self.spec
        half_spacing = (spec.marking_width + spec.double_gap) / 2.0
        for k in range(spec.lane_count + 1):
            lmt = self.geometry.lmt(k, t)
            if lmt is None:
                continue
            color = spec.yellow_bgr if lmt.is_yellow else (spec.white,) * 3
            # the ego side of a mixed double faces the start lane
            inner_sign = 1.0 if k <= spec.start_lane else -1.0
            for line, (offset, solid) in enumerate(_line_patterns(lmt, inner_sign)):
                shift = offset * half_spacing - spec.marking_width / 2.0

                def left_of(v: np.ndarray, k: int = k, shift: float = shift) -> np.ndarray:
                    return self.geometry.boundary_x(k, t, v) + shift

                intervals = [(self._v_min, self._v_max)] if solid else self._dash_intervals(t, k, line)
                for v0, v1 in intervals:
                    self._fill_band(canvas, left_of, v0, v1, spec.marking_width, color)

    def _draw_crosswalks(self, canvas: np.ndarray, t: int) -> None:
        spec = self.spec
        white = (spec.white,) * 3
        road = spec.lane_count * spec.lane_width
        for placement in spec.crosswalks:
            v0 = placement.distance - self.geometry.travelled(t)
            pitch = placement.strip_width + placement.strip_gap
            for i in range(int(road // pitch) + 1):
                start = i * pitch + placement.strip_gap / 2.0
                width = min(placement.strip_width, road - start)
                if width <= 0:
                    break

                def left_of(v: np.ndarray, start: float = start) -> np.ndarray:
                    return self.geometry.boundary_x(0, t, v) + start

                self._fill_band(canvas, left_of, v0, v0 + placement.length, width, white)

    def _draw_signs(self, canvas: np.ndarray, t: int) -> None:
        spec = self.spec
        white = (spec.white,) * 3
        ipm_h = self.config.ipm_height
        for placement in spec.signs:
            v0 = placement.distance - self.geometry.travelled(t)
            v1 = v0 + placement.length
            if v1 < self._v_min or v0 > self._v_max:
                continue
            if placement.sign_class == SignClass.STOP_LINE:
                k = placement.lane
                inset = spec.marking_width

                def left_of(v: np.ndarray, k: int = k) -> np.ndarray:
                    return self.geometry.boundary_x(k, t, v) + inset

                self._fill_band(canvas, left_of, v0, v1, spec.lane_width - 2 * inset, white)
                continue
            vm = (v0 + v1) / 2.0
            center = float(
                (self.geometry.boundary_x(placement.lane, t, vm) + self.geometry.boundary_x(placement.lane + 1, t, vm))
                / 2.0
            )
            w, h = int(round(placement.width)), int(round(placement.length))
            glyph = cv2.resize(self.templates[placement.sign_class], (w, h), interpolation=cv2.INTER_NEAREST) > 0
            x0 = int(round(center - w / 2.0)) + _MARGIN_X
            y0 = int(round(ipm_h - 1 - v1)) + _MARGIN_TOP
            rows, cols = canvas.shape[:2]
            ys, xs = np.nonzero(glyph)
            ys, xs = ys + y0, xs + x0
            inside = (ys >= 0) & (ys < rows) & (xs >= 0) & (xs < cols)
            canvas[ys[inside], xs[inside]] = white

    def frame(self, t: int) -> np.ndarray:
        """BGR frame t of the scene."""
        spec, config = self.spec, self.config
        width, height = self._canvas_size
        canvas = np.full((height, width, 3), spec.asphalt, dtype=np.uint8)
        self._draw_boundaries(canvas, t)
        self._draw_crosswalks(canvas, t)
        self._draw_signs(canvas, t)

        roi = config.roi
        view = cv2.warpPerspective(
            canvas, self._roi_to_canvas, (roi.width, roi.height),
            flags=cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP,
            borderMode=cv2.BORDER_CONSTANT, borderValue=(spec.asphalt,) * 3,
        )
        frame = np.full((config.frame_height, config.frame_width, 3), spec.asphalt, dtype=np.uint8)
        frame[: roi.y] = _SKY
        frame[roi.y:roi.y + roi.height, roi.x:roi.x + roi.width] = view

        sigma = spec.noise.intensity_sigma
        if sigma > 0:
            rng = np.random.default_rng([spec.seed, t])
            noisy = frame.astype(np.float64) + rng.normal(0.0, sigma, frame.shape)
            frame = np.clip(np.round(noisy), 0, 255).astype(np.uint8)
        return frame

    # ------------------------------------------------------------- ground truth

    def _visible_signs(self, j: int, t: int) -> list[SignClass]:
        top = float(self.config.ipm_height - 1)
        found: list[SignClass] = []
        for placement in self.spec.signs:
            v0 = placement.distance - self.geometry.travelled(t)
            if placement.lane == j and v0 >= 0 and v0 + placement.length <= top:
                found.append(placement.sign_class)
        return found

    def _crosswalk_in_view(self, t: int) -> bool:
        m = self.config.markings
        for placement in self.spec.crosswalks:
            v0 = placement.distance - self.geometry.travelled(t)
            if v0 < m.crosswalk_far_rows and v0 + placement.length > m.crosswalk_near_rows:
                return True
        return False

    def truth(self, t: int) -> GroundTruthFrame:
        g = self.geometry
        j = g.ego_lane(t)
        v = np.array([self.config.ipm_height - 1 - r for r in self.eval_rows], dtype=np.float64)
        left_bottom = float(g.boundary_x(j, t, 0.0))
        right_bottom = float(g.boundary_x(j + 1, t, 0.0))
        center = (left_bottom + right_bottom) / 2.0
        lane_change = None
        if t > 0:
            previous = g.ego_lane(t - 1)
            if j > previous:
                lane_change = "to_right"
            elif j < previous:
                lane_change = "to_left"
        return GroundTruthFrame(
            frame_index=t,
            left=[float(x) for x in g.boundary_x(j, t, v)],
            right=[float(x) for x in g.boundary_x(j + 1, t, v)],
            center=center,
            width=self.spec.lane_width,
            lmt_left=g.lmt_labels(j, t),
            lmt_right=g.lmt_labels(j + 1, t),
            crosswalk=self._crosswalk_in_view(t),
            signs=self._visible_signs(j, t),
            adjacent_left=g.adjacency(j, "left", t),
            adjacent_right=g.adjacency(j, "right", t),
            deviation=(g.vehicle_x - center) / self.spec.lane_width,
            lane_change=lane_change,
        )

    def ground_truth(self) -> GroundTruth:
        return GroundTruth(
            scene=self.spec.name,
            eval_rows=self.eval_rows,
            frames=[self.truth(t) for t in range(self.spec.frame_count)],
        )

    def frames(self) -> Iterator[np.ndarray]:
        for t in range(self.spec.frame_count):
            yield self.frame(t)


def write_scene(spec: SceneSpec, config: PipelineConfig, out_dir: Path, gt_path: Path | None = None) -> GroundTruth:
    """Write numbered PNG frames into `out_dir` and the ground truth to `gt_path` (default out_dir/gt.json)."""
    out_dir = Path(out_dir)
    renderer = SceneRenderer(spec, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    for t, frame in enumerate(renderer.frames()):
        path = out_dir / f"{t:06d}.png"
        if not cv2.imwrite(str(path), frame):
            raise OSError(f"could not write {path}")
    truth = renderer.ground_truth()
    gt_path = Path(gt_path) if gt_path is not None else out_dir / "gt.json"
    gt_path.write_text(truth.model_dump_json(indent=2))
    logger.info("Wrote scene %s: %d frames to %s", spec.name, spec.frame_count, out_dir)
    return truth


def load_ground_truth(path: Path) -> GroundTruth:
    text = Path(path).read_text()
    try:
        return GroundTruth.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigError(f"invalid ground truth {path}: {exc}") from exc


def load_scene(path: Path) -> SceneSpec:
    text = Path(path).read_text()
    try:
        return SceneSpec.model_validate_json(text)
    except ValidationError as exc:
        raise SceneSpecError(f"invalid scene {path}: {exc}") from exc
