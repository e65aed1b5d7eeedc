"""
Arrow templates for road-sign classification.

The default set is drawn on the fly (8 arrows, 32×32, values 0/255). A set on
disk must provide arrow_1.png .. arrow_8.png with the same contract.
"""

from __future__ import annotations

import logging
from pathlib import Path

import cv2
import numpy as np

from egolane.errors import TemplateError
from egolane.imaging import GrayImage
from egolane.paths import TEMPLATE_FILENAMES
from models import ARROW_CLASSES, SignClass

logger = logging.getLogger(__name__)

TemplateSet = dict[SignClass, GrayImage]

_CANVAS = 128
_STEM_HALF = 12
_WHITE = 255


def _stem(canvas: np.ndarray, top: int) -> None:
    cv2.rectangle(canvas, (64 - _STEM_HALF, top), (64 + _STEM_HALF, _CANVAS - 4), _WHITE, cv2.FILLED)


def _head_up(canvas: np.ndarray) -> None:
    cv2.fillPoly(canvas, [np.array([[64, 2], [26, 46], [102, 46]], dtype=np.int32)], _WHITE)
    _stem(canvas, 40)


def _branch(canvas: np.ndarray, direction: int) -> None:
    tip = 64 + direction * 62
    neck = 64 + direction * 34
    cv2.rectangle(canvas, (min(64, neck), 58), (max(64, neck), 82), _WHITE, cv2.FILLED)
    cv2.fillPoly(canvas, [np.array([[tip, 70], [neck, 42], [neck, 98]], dtype=np.int32)], _WHITE)


def _u_turn(canvas: np.ndarray) -> None:
    _stem(canvas, 44)
    cv2.ellipse(canvas, (44, 44), (20, 20), 0, 180, 360, _WHITE, 2 * _STEM_HALF)
    cv2.rectangle(canvas, (24 - _STEM_HALF, 44), (24 + _STEM_HALF, 84), _WHITE, cv2.FILLED)
    cv2.fillPoly(canvas, [np.array([[24, 122], [0, 84], [48, 84]], dtype=np.int32)], _WHITE)


def _draw(kind: int) -> np.ndarray:
    canvas = np.zeros((_CANVAS, _CANVAS), dtype=np.uint8)
    if kind == 1:
        _head_up(canvas)
    elif kind == 2:
        _stem(canvas, 58)
        _branch(canvas, -1)
    elif kind == 3:
        _stem(canvas, 58)
        _branch(canvas, +1)
    elif kind == 4:
        _head_up(canvas)
        _branch(canvas, -1)
    elif kind == 5:
        _head_up(canvas)
        _branch(canvas, +1)
    elif kind == 6:
        _u_turn(canvas)
    elif kind == 7:
        _stem(canvas, 58)
        _branch(canvas, -1)
        _branch(canvas, +1)
    else:
        _head_up(canvas)
        _branch(canvas, -1)
        _branch(canvas, +1)
    return canvas


def render_templates(size: int = 32) -> TemplateSet:
    templates: TemplateSet = {}
    for k, sign_class in enumerate(ARROW_CLASSES, start=1):
        small = cv2.resize(_draw(k), (size, size), interpolation=cv2.INTER_AREA)
        templates[sign_class] = np.where(small >= 128, _WHITE, 0).astype(np.uint8)
    return templates


def load_templates(directory: Path | None, size: int = 32) -> TemplateSet:
    """Templates from `directory`, or the generated set when it is None."""
    if directory is None:
        return render_templates(size)
    directory = Path(directory)
    templates: TemplateSet = {}
    for sign_class, filename in zip(ARROW_CLASSES, TEMPLATE_FILENAMES):
        path = directory / filename
        image = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
        if image is None:
            raise TemplateError(f"missing or unreadable template {path}")
        if image.shape != (size, size):
            raise TemplateError(f"template {path} is {image.shape[1]}×{image.shape[0]}, expected {size}×{size}")
        templates[sign_class] = np.where(image >= 128, _WHITE, 0).astype(np.uint8)
    logger.info("Loaded %d arrow templates from %s", len(templates), directory)
    return templates


def write_templates(directory: Path, size: int = 32) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for (sign_class, image), filename in zip(render_templates(size).items(), TEMPLATE_FILENAMES):
        path = directory / filename
        if not cv2.imwrite(str(path), image):
            raise OSError(f"could not write {path}")
        written.append(path)
    return written
