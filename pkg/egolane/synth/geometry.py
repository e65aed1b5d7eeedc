"""
Road geometry of a synthetic scene, expressed in IPM pixels.

Rows are counted upwards from the bottom IPM row (`v`). The vehicle sits at
`vehicle_x` on the bottom row; the road moves underneath it by `speed` px per
frame and sideways by the scripted lateral offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from egolane.config import PipelineConfig
from egolane.errors import SceneSpecError
from models import AdjacentLane, LaneMarkingType, SceneSpec

EVAL_FRACTIONS: tuple[float, ...] = (1 / 8, 3 / 8, 5 / 8, 7 / 8)


def evaluation_rows(height: int) -> list[int]:
    """IPM image rows where lanes are scored; the first three are near, the last far."""
    return [int(height - 1 - round(f * (height - 1))) for f in EVAL_FRACTIONS]


@dataclass(frozen=True)
class RoadGeometry:
    spec: SceneSpec
    vehicle_x: float
    height: int
    width: int

    @classmethod
    def of(cls, spec: SceneSpec, config: PipelineConfig) -> RoadGeometry:
        return cls(spec=spec, vehicle_x=config.vehicle_x, height=config.ipm_height, width=config.ipm_width)

    @property
    def radius_px(self) -> float | None:
        if self.spec.radius_m is None:
            return None
        return self.spec.radius_m * self.spec.px_per_meter

    def travelled(self, t: int) -> float:
        return self.spec.speed * t

    def offset(self, t: int) -> float:
        keys = self.spec.offsets
        if not keys:
            return 0.0
        return float(np.interp(t, [k.frame for k in keys], [k.offset for k in keys]))

    def bend(self, v: np.ndarray | float) -> np.ndarray:
        """Lateral displacement of the road at rows-above-bottom `v` (circular arc tangent at v = 0)."""
        v = np.asarray(v, dtype=np.float64)
        radius = self.radius_px
        if radius is None:
            return np.zeros_like(v)
        r = abs(radius)
        if np.any(np.abs(v) >= r):
            raise SceneSpecError(f"curve radius {self.spec.radius_m} m is too tight for the IPM height")
        return math.copysign(1.0, radius) * (r - np.sqrt(r * r - v * v))

    def boundary_x(self, k: int, t: int, v: np.ndarray | float) -> np.ndarray:
        """x of road boundary k (0 = leftmost) at frame t."""
        start_center = self.vehicle_x - self.offset(t)
        return start_center + self.bend(v) + (k - self.spec.start_lane - 0.5) * self.spec.lane_width

    def ego_lane(self, t: int) -> int:
        for j in range(self.spec.lane_count):
            if self.boundary_x(j, t, 0.0) <= self.vehicle_x < self.boundary_x(j + 1, t, 0.0):
                return j
        raise SceneSpecError(f"vehicle is off the road at frame {t}")

    def lmt(self, k: int, t: int) -> LaneMarkingType | None:
        current = self.spec.lmt_segments[0]
        for segment in self.spec.lmt_segments:
            if segment.start_frame <= t:
                current = segment
        return current.boundaries[k]

    def lmt_labels(self, k: int, t: int) -> list[LaneMarkingType]:
        """Accepted classes for boundary k; both sides of a change inside the transition window."""
        labels: list[LaneMarkingType] = []
        window = self.spec.transition_window
        for tt in (t - window, t, t + window):
            if 0 <= tt < self.spec.frame_count:
                lmt = self.lmt(k, tt)
                if lmt is not None and lmt not in labels:
                    labels.append(lmt)
        return labels

    def adjacency(self, j: int, side: str, t: int) -> AdjacentLane:
        neighbour = j - 1 if side == "left" else j + 1
        if not 0 <= neighbour < self.spec.lane_count:
            return AdjacentLane(present=False)
        boundary = self.lmt(j if side == "left" else j + 1, t)
        yellow = boundary is not None and boundary.is_yellow
        return AdjacentLane(present=True, direction="opposite" if yellow else "same")

    def validate(self) -> None:
        """The ego lane must stay inside the IPM image on every frame."""
        top = float(self.height - 1)
        for t in range(self.spec.frame_count):
            j = self.ego_lane(t)
            for v in (0.0, top):
                left = float(self.boundary_x(j, t, v))
                right = float(self.boundary_x(j + 1, t, v))
                if left < 0 or right >= self.width:
                    raise SceneSpecError(f"ego lane leaves the IPM image at frame {t}")
