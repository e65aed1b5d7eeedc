from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from egolane.config import PipelineConfig, Roi
from egolane.errors import CalibrationError
from egolane.imaging import BinaryMap, ColorImage, GrayImage, Homography, as_color, as_gray, valid_region, warp_ipm


@dataclass(frozen=True)
class PreprocessedFrame:
    gray_persp: GrayImage  # RoI crop
    gray_ipm: GrayImage
    color_ipm: ColorImage
    valid_ipm: BinaryMap
    homography: Homography
    roi: Roi


def preprocess(frame: np.ndarray, config: PipelineConfig, homography: Homography | None = None) -> PreprocessedFrame:
    """Grayscale conversion, RoI crop and the IPM warp of both gray and colour."""
    rows, cols = frame.shape[:2]
    if (cols, rows) != (config.frame_width, config.frame_height):
        raise CalibrationError(
            f"frame is {cols}×{rows} but the calibration expects {config.frame_width}×{config.frame_height}"
        )
    h = homography or Homography.from_values(config.homography)
    roi = config.roi
    window = (slice(roi.y, roi.y + roi.height), slice(roi.x, roi.x + roi.width))
    gray_persp = np.ascontiguousarray(as_gray(frame)[window])
    color_persp = np.ascontiguousarray(as_color(frame)[window])
    return PreprocessedFrame(
        gray_persp=gray_persp,
        gray_ipm=warp_ipm(gray_persp, h, config.ipm_size),
        color_ipm=warp_ipm(color_persp, h, config.ipm_size),
        valid_ipm=valid_region(gray_persp.shape, h, config.ipm_size),
        homography=h,
        roi=roi,
    )
