"""
Lane marking type (LMT) of each ego-lane boundary.

Per frame a raw class comes from the INB evidence in a band around the
boundary: colour first (share of yellow evidence), then solid vs dashed (share
of rows with any evidence), then for yellow markings single vs double from the
share of rows with a white–black–white pattern. The reported class is the mode
of the last raw classes.
"""

from __future__ import annotations

import logging
import re
from collections import Counter, deque
from dataclasses import dataclass, field

import cv2
import numpy as np

from egolane.config import AttributesConfig
from egolane.imaging import BinaryMap, ColorImage
from models import LaneMarkingType

logger = logging.getLogger(__name__)

LMT = LaneMarkingType


def yellow_mask(color_ipm: ColorImage, lower: tuple[float, float, float], upper: tuple[float, float, float]) -> BinaryMap:
    """Pixels whose HSV lies in [lower, upper], given in (degrees, %, %)."""
    hsv = cv2.cvtColor(color_ipm, cv2.COLOR_BGR2HSV)
    lo = np.array([np.ceil(lower[0] / 2.0), np.ceil(lower[1] * 2.55), np.ceil(lower[2] * 2.55)], dtype=np.uint8)
    hi = np.array([np.floor(upper[0] / 2.0), np.floor(upper[1] * 2.55), np.floor(upper[2] * 2.55)], dtype=np.uint8)
    return cv2.inRange(hsv, lo, hi).astype(bool)


def boundary_band(bmap: BinaryMap, rows: np.ndarray, xs: np.ndarray, half_width: int) -> np.ndarray:
    """(len(rows), 2·half_width + 1) slices of `bmap` centred on the boundary; outside the image is False."""
    offsets = np.arange(-half_width, half_width + 1)
    cols = np.rint(xs).astype(int)[:, None] + offsets[None, :]
    inside = (cols >= 0) & (cols < bmap.shape[1])
    out = np.zeros(cols.shape, dtype=bool)
    rr = np.broadcast_to(rows[:, None], cols.shape)
    out[inside] = bmap[rr[inside], cols[inside]]
    return out


def _wbw_pattern(config: AttributesConfig) -> re.Pattern[bytes]:
    run, gap = config.wbw_min_run, config.wbw_min_gap
    return re.compile(rb"1{%d,}0{%d,}1{%d,}" % (run, gap, run))


def wbw_fraction(band: np.ndarray, config: AttributesConfig) -> float:
    """Share of rows with evidence that show white, black (≥ min gap), white."""
    pattern = _wbw_pattern(config)
    lit = band[band.any(axis=1)]
    if lit.shape[0] == 0:
        return 0.0
    encoded = np.where(lit, ord("1"), ord("0")).astype(np.uint8)
    hits = sum(1 for row in encoded if pattern.search(row.tobytes()))
    return hits / lit.shape[0]


def classify_lmt_raw(
    rows: np.ndarray,
    xs: np.ndarray,
    side: str,
    band_half_width: float,
    inb: BinaryMap,
    color_ipm: ColorImage,
    config: AttributesConfig,
    previous: LaneMarkingType | None = None,
) -> tuple[LaneMarkingType | None, bool]:
    """
    Raw class for one boundary sampled at (`rows`, `xs`). `side` is "left" or
    "right" and decides which half of a double marking faces the ego lane.
    Returns (class, flagged); an empty band carries `previous` and flags.
    """
    half = max(1, int(round(band_half_width)))
    band = boundary_band(inb, rows, xs, half)
    if not band.any():
        return previous, True
    yellow = boundary_band(yellow_mask(color_ipm, config.hsv_lower, config.hsv_upper), rows, xs, half)
    is_yellow = (band & yellow).sum() / band.sum() >= config.yellow_fraction
    dashed = band.any(axis=1).mean() < config.dashed_evidence_fraction
    if not is_yellow:
        return (LMT.WSD if dashed else LMT.WSS), False

    wbw = wbw_fraction(band, config)
    if wbw < config.wbw_single_max:
        return (LMT.YSD if dashed else LMT.YSS), False
    if wbw > config.wbw_double_min:
        return LMT.YDS, False
    inner = band[:, half + 1:] if side == "left" else band[:, :half]
    inner_dashed = inner.any(axis=1).mean() < config.dashed_evidence_fraction
    return (LMT.YMD if inner_dashed else LMT.YMS), False


@dataclass
class LmtBuffer:
    capacity: int = 30
    history: deque[LaneMarkingType] = field(default_factory=deque)

    def __post_init__(self) -> None:
        self.history = deque(self.history, maxlen=self.capacity)


def report_lmt(buffer: LmtBuffer, raw: LaneMarkingType | None) -> LaneMarkingType | None:
    """Push `raw` and return the buffer's mode; ties go to the more restrictive class."""
    if raw is not None:
        buffer.history.append(raw)
    if not buffer.history:
        return None
    counts = Counter(buffer.history)
    return max(counts, key=lambda lmt: (counts[lmt], lmt.restrictiveness))
