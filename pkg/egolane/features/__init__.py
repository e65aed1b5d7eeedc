from .maps import (
    FeatureMaps,
    combined_map,
    dog_kernel,
    dog_map,
    dog_response,
    extract_feature_maps,
    inb_map,
    srf_map,
    srf_response,
    vad_map,
)
from .preprocess import PreprocessedFrame, preprocess

__all__ = [
    "FeatureMaps",
    "PreprocessedFrame",
    "combined_map",
    "dog_kernel",
    "dog_map",
    "dog_response",
    "extract_feature_maps",
    "inb_map",
    "preprocess",
    "srf_map",
    "srf_response",
    "vad_map",
]
