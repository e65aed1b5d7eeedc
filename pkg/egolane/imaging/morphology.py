"""Binary morphology. Kernels are given as (width, height)."""

from typing import Literal

import cv2
import numpy as np
from skimage.morphology import skeletonize as _skeletonize

from egolane.imaging.raster import BinaryMap

MorphOp = Literal["open", "close", "erode", "dilate"]

_CV_OPS = {
    "open": cv2.MORPH_OPEN,
    "close": cv2.MORPH_CLOSE,
    "erode": cv2.MORPH_ERODE,
    "dilate": cv2.MORPH_DILATE,
}


def morph(bmap: BinaryMap, op: MorphOp, kernel: tuple[int, int]) -> BinaryMap:
    width, height = kernel
    if width < 1 or height < 1:
        raise ValueError(f"kernel must be at least 1×1, got {kernel}")
    element = np.ones((height, width), dtype=np.uint8)
    out = cv2.morphologyEx(bmap.astype(np.uint8), _CV_OPS[op], element)
    return out.astype(bool)


def skeletonize(bmap: BinaryMap) -> BinaryMap:
    """Topology-preserving thinning to one-pixel curves."""
    if not bmap.any():
        return np.zeros_like(bmap, dtype=bool)
    return _skeletonize(bmap)
