from .base import LaneKalman, LaneTracker, fsm_step, kalman_step
from .buffers import LaneBuffers, SideBuffers, update_buffers
from .curvature import (
    LaneCurvatureFilter,
    LaneEstimate,
    LaneParticle,
    ParticleCloud,
    estimate_from_base,
    predict,
    reset_filter,
    resample_and_estimate,
    trust_area,
    weigh,
    weigh_all,
)
from .measurement import (
    apply_punishment,
    build_measurement,
    line_evidence_score,
    lines_from_base,
    pair_evidence,
    row_distance_map,
    select_side_candidates,
)

__all__ = [
    "LaneBuffers",
    "LaneCurvatureFilter",
    "LaneEstimate",
    "LaneKalman",
    "LaneParticle",
    "LaneTracker",
    "ParticleCloud",
    "SideBuffers",
    "apply_punishment",
    "build_measurement",
    "estimate_from_base",
    "fsm_step",
    "kalman_step",
    "line_evidence_score",
    "lines_from_base",
    "pair_evidence",
    "predict",
    "reset_filter",
    "resample_and_estimate",
    "row_distance_map",
    "select_side_candidates",
    "trust_area",
    "update_buffers",
    "weigh",
    "weigh_all",
]
