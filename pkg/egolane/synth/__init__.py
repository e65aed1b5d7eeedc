from .geometry import EVAL_FRACTIONS, RoadGeometry, evaluation_rows
from .render import SceneRenderer, load_ground_truth, load_scene, write_scene
from .scenes import (
    PRESETS,
    arc_scene,
    crosswalk_scene,
    lane_change_scene,
    lmt_transition_scene,
    oracle_suite,
    sign_scene,
    straight_scene,
)

__all__ = [
    "EVAL_FRACTIONS",
    "PRESETS",
    "RoadGeometry",
    "SceneRenderer",
    "arc_scene",
    "crosswalk_scene",
    "evaluation_rows",
    "lane_change_scene",
    "lmt_transition_scene",
    "load_ground_truth",
    "load_scene",
    "oracle_suite",
    "sign_scene",
    "straight_scene",
    "write_scene",
]
