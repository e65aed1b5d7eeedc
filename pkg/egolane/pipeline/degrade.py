"""Controlled degradations: lower capture quality and lower frame rate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import cv2
import numpy as np

SOURCE_FPS = 29.97


@dataclass(frozen=True)
class Degradation:
    kind: Literal["quality", "fps"]
    value: float

    @classmethod
    def parse(cls, text: str) -> Degradation:
        """'quality:50' (percent of the original size) or 'fps:15'."""
        kind, sep, raw = text.partition(":")
        if not sep or kind not in ("quality", "fps"):
            raise ValueError(f"degradation must be quality:<pct> or fps:<rate>, got {text!r}")
        try:
            value = float(raw)
        except ValueError as exc:
            raise ValueError(f"degradation value must be a number, got {raw!r}") from exc
        if kind == "quality" and not 0 < value <= 100:
            raise ValueError("quality must be in (0, 100]")
        if kind == "fps" and value <= 0:
            raise ValueError("fps must be positive")
        return cls(kind=kind, value=value)

    def __str__(self) -> str:
        return f"{self.kind}:{self.value:g}"

    def frame_indices(self, count: int, source_fps: float = SOURCE_FPS) -> list[int] | None:
        """Source frames that survive an fps degradation; None when every frame is kept."""
        if self.kind != "fps":
            return None
        return kept_indices(count, self.value, source_fps)

    def apply(self, frame: np.ndarray) -> np.ndarray:
        return degrade_quality(frame, self.value) if self.kind == "quality" else frame


def degrade_quality(frame: np.ndarray, quality: float) -> np.ndarray:
    """Nearest-neighbour downscale to `quality`% and linear upscale back to the original size."""
    if quality >= 100:
        return frame.copy()
    rows, cols = frame.shape[:2]
    small = (max(1, round(cols * quality / 100.0)), max(1, round(rows * quality / 100.0)))
    reduced = cv2.resize(frame, small, interpolation=cv2.INTER_NEAREST)
    return cv2.resize(reduced, (cols, rows), interpolation=cv2.INTER_LINEAR)


def kept_indices(count: int, target_fps: float, source_fps: float = SOURCE_FPS) -> list[int]:
    """Frames kept when dropping uniformly from `source_fps` to `target_fps`."""
    if target_fps >= source_fps:
        return list(range(count))
    ratio = source_fps / target_fps
    kept: list[int] = []
    k = 0
    while True:
        index = int(math.floor(k * ratio + 0.5))
        if index >= count:
            return kept
        kept.append(index)
        k += 1
