from .adjacent import detect_adjacent
from .departure import LaneChangeDetector, deviation
from .lmt import LmtBuffer, classify_lmt_raw, report_lmt, wbw_fraction, yellow_mask

__all__ = [
    "LaneChangeDetector",
    "LmtBuffer",
    "classify_lmt_raw",
    "detect_adjacent",
    "deviation",
    "report_lmt",
    "wbw_fraction",
    "yellow_mask",
]
