from .crosswalk import crosswalk_region, crosswalk_score, crosswalk_signal, detect_crosswalk
from .histogram import Histogram2D, angle_distance, build_histogram, dominant_angle
from .removal import remove_markings
from .signs import classify_sign, detect_road_signs, extract_sign_candidates
from .templates import TemplateSet, load_templates, render_templates, write_templates

__all__ = [
    "Histogram2D",
    "TemplateSet",
    "angle_distance",
    "build_histogram",
    "classify_sign",
    "crosswalk_region",
    "crosswalk_score",
    "crosswalk_signal",
    "detect_crosswalk",
    "detect_road_signs",
    "dominant_angle",
    "extract_sign_candidates",
    "load_templates",
    "remove_markings",
    "render_templates",
    "write_templates",
]
