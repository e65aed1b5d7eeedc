"""Weighted (ρ, θ) histogram of Hough lines and its dominant direction."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from egolane.imaging import HoughLine


@dataclass(frozen=True)
class Histogram2D:
    counts: np.ndarray  # (rho_bins, angle_bins)
    rho_bin: int

    @property
    def angle_bins(self) -> int:
        return self.counts.shape[1]

    def rho_center(self, index: int | np.ndarray) -> np.ndarray:
        return (np.asarray(index) + 0.5) * self.rho_bin


def angle_bin(theta: float) -> int:
    return int(math.floor(theta))


def build_histogram(
    lines: Sequence[HoughLine],
    width: int,
    rho_bin: int = 3,
    angle_bins: int = 360,
    weights: Sequence[float] | None = None,
    clip_rho: bool = False,
) -> Histogram2D:
    """
    Bin lines by (⌊ρ/rho_bin⌋, ⌊θ⌋).

    Lines whose ρ falls outside [0, width) are dropped, or clamped to the edge
    bins when `clip_rho` is set.
    """
    rho_bins = max(1, math.ceil(width / rho_bin))
    counts = np.zeros((rho_bins, angle_bins), dtype=np.float64)
    for i, line in enumerate(lines):
        w = 1.0 if weights is None else float(weights[i])
        x = int(math.floor(line.rho / rho_bin))
        if not 0 <= x < rho_bins:
            if not clip_rho:
                continue
            x = min(max(x, 0), rho_bins - 1)
        counts[x, angle_bin(line.theta) % angle_bins] += w
    return Histogram2D(counts=counts, rho_bin=rho_bin)


def angle_window_sums(hist: Histogram2D, window: int) -> np.ndarray:
    """Σ over ρ and over angles a±window, wrapping around the angle axis."""
    per_angle = hist.counts.sum(axis=0)
    return convolve1d(per_angle, np.ones(2 * window + 1), mode="wrap")


def dominant_angle(hist: Histogram2D, window: int = 5) -> int | None:
    """Angle bin with the largest windowed sum; the first index wins ties."""
    if not hist.counts.any():
        return None
    return int(np.argmax(angle_window_sums(hist, window)))


def angle_distance(a: float, b: float, period: float = 180.0) -> float:
    d = abs(a - b) % period
    return min(d, period - d)
