"""
Probabilistic Hough transform with lines expressed in lane coordinates.

Angles follow the image with its y axis pointing up: θ = 90° is a vertical
line, θ ∈ [0°, 180°). ρ is the x coordinate where the (extended) line meets
the base row, normally the bottom row of the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from egolane.config import ImagingConfig
from egolane.imaging.raster import BinaryMap, to_u8

_HORIZONTAL_EPS = 1e-9


@dataclass(frozen=True)
class HoughLine:
    rho: float
    theta: float  # degrees
    base_row: int
    votes: int = 0
    segment: tuple[float, float, float, float] | None = None

    @classmethod
    def from_segment(cls, x1: float, y1: float, x2: float, y2: float, base_row: int, votes: int = 0) -> HoughLine:
        dx = x2 - x1
        dy = y2 - y1
        theta = math.degrees(math.atan2(-dy, dx)) % 180.0
        if abs(dy) < _HORIZONTAL_EPS:
            rho = (x1 + x2) / 2.0
        else:
            rho = x1 + (base_row - y1) * dx / dy
        return cls(rho=float(rho), theta=float(theta), base_row=base_row, votes=votes, segment=(x1, y1, x2, y2))

    @property
    def is_horizontal(self) -> bool:
        return abs(math.sin(math.radians(self.theta))) < 1e-6

    def x_at(self, rows: np.ndarray | float) -> np.ndarray:
        """x of the line at the given rows; a horizontal line keeps ρ."""
        rows = np.asarray(rows, dtype=np.float64)
        if self.is_horizontal:
            return np.full_like(rows, self.rho)
        return self.rho + (self.base_row - rows) / math.tan(math.radians(self.theta))

    def shifted(self, dx: float) -> HoughLine:
        return HoughLine(rho=self.rho + dx, theta=self.theta, base_row=self.base_row)


def segment_support(bmap: BinaryMap, x1: float, y1: float, x2: float, y2: float) -> int:
    """Evidence pixels lying on the rasterized segment."""
    steps = int(max(abs(x2 - x1), abs(y2 - y1))) + 1
    xs = np.rint(np.linspace(x1, x2, steps)).astype(int)
    ys = np.rint(np.linspace(y1, y2, steps)).astype(int)
    inside = (xs >= 0) & (xs < bmap.shape[1]) & (ys >= 0) & (ys < bmap.shape[0])
    return int(np.count_nonzero(bmap[ys[inside], xs[inside]]))


def hough_lines(bmap: BinaryMap, params: ImagingConfig, base_row: int | None = None) -> list[HoughLine]:
    """Segments with at least `hough_min_votes` evidence pixels on them."""
    if not bmap.any():
        return []
    base = bmap.shape[0] - 1 if base_row is None else base_row
    found = cv2.HoughLinesP(
        to_u8(bmap),
        rho=params.hough_rho,
        theta=math.radians(params.hough_theta_deg),
        threshold=params.hough_threshold,
        minLineLength=params.hough_min_line_length,
        maxLineGap=params.hough_max_line_gap,
    )
    if found is None:
        return []
    lines: list[HoughLine] = []
    for x1, y1, x2, y2 in found.reshape(-1, 4).astype(float):
        votes = segment_support(bmap, x1, y1, x2, y2)
        if votes < params.hough_min_votes:
            continue
        lines.append(HoughLine.from_segment(x1, y1, x2, y2, base_row=base, votes=votes))
    return lines
