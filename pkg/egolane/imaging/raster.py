"""Raster aliases. Images are (row, col) numpy arrays; colour images are BGR."""

from typing import TypeAlias

import cv2
import numpy as np
import numpy.typing as npt

GrayImage: TypeAlias = npt.NDArray[np.uint8]
ColorImage: TypeAlias = npt.NDArray[np.uint8]
BinaryMap: TypeAlias = npt.NDArray[np.bool_]


def as_gray(frame: np.ndarray) -> GrayImage:
    if frame.ndim == 2:
        return frame.astype(np.uint8, copy=False)
    return cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)


def as_color(frame: np.ndarray) -> ColorImage:
    if frame.ndim == 3:
        return frame.astype(np.uint8, copy=False)
    return cv2.cvtColor(frame, cv2.COLOR_GRAY2BGR)


def to_u8(mask: BinaryMap) -> GrayImage:
    return mask.astype(np.uint8) * 255
