from __future__ import annotations

import time
from collections.abc import Iterator
from contextlib import contextmanager

STAGES: tuple[str, ...] = (
    "feature_maps_generation",
    "crosswalk_and_road_signs_detection",
    "crosswalk_and_road_signs_removal",
    "candidates_generation_and_kalman",
    "particle_filter",
    "lane_marking_type_detection",
    "adjacent_lane_detection",
)


class StageTimer:
    """Wall-clock milliseconds per pipeline stage, plus the frame total."""

    def __init__(self) -> None:
        self._start = time.perf_counter()
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + (time.perf_counter() - t0) * 1000.0

    def finish(self) -> dict[str, float]:
        out = {name: self.timings.get(name, 0.0) for name in STAGES}
        out["total"] = (time.perf_counter() - self._start) * 1000.0
        return out
