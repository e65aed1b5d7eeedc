"""Homography handling and the inverse-perspective warp."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import cv2
import numpy as np

from egolane.errors import CalibrationError
from egolane.imaging.raster import BinaryMap

_MIN_ABS_DET = 1e-9


@dataclass(frozen=True)
class Homography:
    """3×3 projective map from RoI-local perspective pixels to IPM pixels."""

    matrix: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> Homography:
        matrix = np.asarray(values, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(matrix)):
            raise CalibrationError("homography contains non-finite values")
        det = float(np.linalg.det(matrix))
        if abs(det) < _MIN_ABS_DET:
            raise CalibrationError(f"homography is not invertible (det={det:.3g})")
        return cls(matrix=matrix, inverse=np.linalg.inv(matrix))

    def project(self, points: np.ndarray) -> np.ndarray:
        """Perspective → IPM for an (n, 2) array of (x, y) points."""
        return _apply(self.matrix, points)

    def back_project(self, points: np.ndarray) -> np.ndarray:
        """IPM → perspective."""
        return _apply(self.inverse, points)


def _apply(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 1, 2)
    if pts.shape[0] == 0:
        return np.empty((0, 2))
    return cv2.perspectiveTransform(pts, matrix).reshape(-1, 2)


def _as_homography(h: Homography | Sequence[float] | np.ndarray) -> Homography:
    return h if isinstance(h, Homography) else Homography.from_values(h)


def warp_ipm(
    image: np.ndarray,
    homography: Homography | Sequence[float] | np.ndarray,
    out_size: tuple[int, int],
    interpolation: int = cv2.INTER_LINEAR,
) -> np.ndarray:
    """
    Resample `image` into the IPM plane. `out_size` is (width, height).

    Binary maps are warped with nearest-neighbour sampling and come back binary;
    pixels with no source are 0.
    """
    h = _as_homography(homography)
    if image.dtype == np.bool_:
        warped = cv2.warpPerspective(
            image.astype(np.uint8), h.matrix, out_size, flags=cv2.INTER_NEAREST,
            borderMode=cv2.BORDER_CONSTANT, borderValue=0,
        )
        return warped.astype(bool)
    return cv2.warpPerspective(
        image, h.matrix, out_size, flags=interpolation,
        borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )


def valid_region(src_shape: tuple[int, int], homography: Homography, out_size: tuple[int, int]) -> BinaryMap:
    """IPM pixels that sample from inside a source of (rows, cols) `src_shape`."""
    ones = np.ones(src_shape, dtype=bool)
    return warp_ipm(ones, homography, out_size)
