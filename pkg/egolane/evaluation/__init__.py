from .experiment import Variant, build_grid, run_grid, run_variant
from .metrics import (
    LANE_CHANGE_TOLERANCE,
    align_predictions,
    boundary_at_row,
    detection_metrics,
    evaluate,
    lane_change_metrics,
    lane_error_table,
    lane_metrics,
    timing_stats,
    write_error_csv,
)

__all__ = [
    "LANE_CHANGE_TOLERANCE",
    "Variant",
    "align_predictions",
    "boundary_at_row",
    "build_grid",
    "detection_metrics",
    "evaluate",
    "lane_change_metrics",
    "lane_error_table",
    "lane_metrics",
    "run_grid",
    "run_variant",
    "timing_stats",
    "write_error_csv",
]
