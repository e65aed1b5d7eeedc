"""
Feature maps.

Each map is a binary evidence image in IPM space:

  SRF  step-row filter, run on the perspective crop with a row-dependent half
       width τ and warped afterwards.
  DOG  horizontal difference of Gaussians tuned to the marking width.
  VAD  vertical absolute derivative (horizontal edges: stop lines, sign ends).
  INB  intensity-based threshold whose statistics come from SRF evidence.
  CMB  SRF ∧ INB, the map lane boundaries are fitted on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import cv2
import numpy as np

from egolane.config import FeatureConfig, PipelineConfig
from egolane.features.preprocess import PreprocessedFrame
from egolane.imaging import BinaryMap, GrayImage, Homography, morph, warp_ipm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureMaps:
    srf: BinaryMap
    dog: BinaryMap
    vad: BinaryMap
    inb: BinaryMap
    cmb: BinaryMap

    def cleared(self, mask: BinaryMap) -> FeatureMaps:
        """Copy with every map zeroed under `mask`; CMB is recomputed."""
        keep = ~mask
        srf = self.srf & keep
        inb = self.inb & keep
        return replace(self, srf=srf, dog=self.dog & keep, vad=self.vad & keep, inb=inb, cmb=combined_map(srf, inb))


def row_taus(rows: int, tau_top: int, tau_bottom: int) -> np.ndarray:
    """τ for each row, linear from the top row to the bottom row."""
    if rows == 1:
        return np.array([tau_bottom], dtype=int)
    return np.rint(np.linspace(tau_top, tau_bottom, rows)).astype(int)


def srf_response(persp: GrayImage, tau_top: int, tau_bottom: int) -> np.ndarray:
    """y = 2x(i) − (x(i−τ) + x(i+τ)) − |x(i−τ) − x(i+τ)|; 0 where i±τ leaves the row."""
    rows, cols = persp.shape
    img = persp.astype(np.int32)
    taus = row_taus(rows, tau_top, tau_bottom)[:, None]
    idx = np.arange(cols)[None, :]
    left_idx = idx - taus
    right_idx = idx + taus
    inside = (left_idx >= 0) & (right_idx < cols)
    left = np.take_along_axis(img, np.clip(left_idx, 0, cols - 1), axis=1)
    right = np.take_along_axis(img, np.clip(right_idx, 0, cols - 1), axis=1)
    response = 2 * img - (left + right) - np.abs(left - right)
    return np.where(inside, response, 0)


def srf_map(
    persp: GrayImage,
    tau_top: int,
    tau_bottom: int,
    homography: Homography,
    threshold: float,
    out_size: tuple[int, int],
) -> BinaryMap:
    evidence = srf_response(persp, tau_top, tau_bottom) > threshold
    return warp_ipm(evidence, homography, out_size)


def dog_kernel(marking_width: float) -> np.ndarray:
    sigma_narrow = marking_width / 3.0
    sigma_wide = 3.0 * sigma_narrow
    ksize = 2 * math.ceil(3.0 * sigma_wide) + 1
    narrow = cv2.getGaussianKernel(ksize, sigma_narrow, cv2.CV_64F)
    wide = cv2.getGaussianKernel(ksize, sigma_wide, cv2.CV_64F)
    return (narrow - wide).ravel()


def dog_response(ipm: GrayImage, marking_width: float) -> np.ndarray:
    return cv2.sepFilter2D(
        ipm.astype(np.float32), cv2.CV_32F,
        kernelX=dog_kernel(marking_width).astype(np.float32),
        kernelY=np.ones(1, dtype=np.float32),
        borderType=cv2.BORDER_REPLICATE,
    )


def dog_map(ipm: GrayImage, marking_width: float, threshold: float) -> BinaryMap:
    return dog_response(ipm, marking_width) > threshold


def vad_map(ipm: GrayImage, threshold: float) -> BinaryMap:
    img = ipm.astype(np.int32)
    out = np.zeros(ipm.shape, dtype=bool)
    out[1:-1] = np.abs(img[2:] - img[:-2]) / 2.0 > threshold
    return out


def inb_map(ipm: GrayImage, srf: BinaryMap, valid: BinaryMap | None = None) -> BinaryMap:
    """
    Two-stage intensity threshold.

    Background statistics (μ_A, σ_A) come from valid non-SRF pixels. Pixels that
    are SRF evidence and brighter than μ_A + 2σ_A describe the markings
    (μ_LM, σ_LM); every valid pixel with intensity ≥ μ_LM − σ_LM is evidence.
    """
    srf = srf.astype(bool)
    if not srf.any():
        return np.zeros(ipm.shape, dtype=bool)
    region = np.ones(ipm.shape, dtype=bool) if valid is None else valid.astype(bool)
    img = ipm.astype(np.float64)
    background = img[region & ~srf]
    if background.size == 0:
        background = img[region]
    mu_a, sigma_a = float(background.mean()), float(background.std())
    markings = img[srf & region & (img > mu_a + 2.0 * sigma_a)]
    if markings.size == 0:
        logger.debug("No bright SRF pixels; INB statistics fall back to all SRF pixels")
        markings = img[srf & region] if (srf & region).any() else img[srf]
    mu_lm, sigma_lm = float(markings.mean()), float(markings.std())
    return region & (img >= mu_lm - sigma_lm)


def combined_map(srf: BinaryMap, inb: BinaryMap) -> BinaryMap:
    return np.logical_and(srf, inb)


def _trim_border(bmap: BinaryMap, valid: BinaryMap, margin: int) -> BinaryMap:
    if margin <= 0:
        return bmap & valid
    inner = morph(valid, "erode", (2 * margin + 1, 2 * margin + 1))
    return bmap & inner


def extract_feature_maps(frame: PreprocessedFrame, config: PipelineConfig) -> FeatureMaps:
    f: FeatureConfig = config.features
    srf = srf_map(frame.gray_persp, f.tau_top, f.tau_bottom, frame.homography, f.srf_threshold, config.ipm_size)
    dog = _trim_border(dog_map(frame.gray_ipm, f.dog_marking_width, f.dog_threshold), frame.valid_ipm, f.border_margin)
    vad = _trim_border(vad_map(frame.gray_ipm, f.vad_threshold), frame.valid_ipm, f.border_margin)
    inb = inb_map(frame.gray_ipm, srf, frame.valid_ipm)
    return FeatureMaps(srf=srf, dog=dog, vad=vad, inb=inb, cmb=combined_map(srf, inb))
