"""Frame sources and run files (JSONL: one header line, then one record per frame)."""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Iterable
from pathlib import Path
from typing import IO

import cv2
import numpy as np

from egolane.errors import FrameReadError
from models import FrameAnalysis, FrameError, RunHeader

logger = logging.getLogger(__name__)

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}
_DIGITS = re.compile(r"(\d+)")


def _frame_key(path: Path) -> tuple[int, str]:
    match = _DIGITS.findall(path.stem)
    return (int(match[-1]) if match else -1, path.name)


def list_frames(source: Path) -> list[Path]:
    """Numbered images in a directory, or the paths listed one per line in a text file."""
    source = Path(source)
    if source.is_dir():
        return sorted((p for p in source.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES), key=_frame_key)
    if source.is_file():
        base = source.parent
        lines = [line.strip() for line in source.read_text().splitlines()]
        return [Path(line) if Path(line).is_absolute() else base / line for line in lines if line]
    raise FileNotFoundError(f"no frames at {source}")


def read_frame(path: Path) -> np.ndarray:
    image = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if image is None:
        raise FrameReadError(f"cannot decode frame {path}")
    return image


class RunWriter:
    """Writes a run file; `omit_timings` zeroes timings so reruns are byte-identical."""

    def __init__(self, handle: IO[str], header: RunHeader, omit_timings: bool = False) -> None:
        self._handle = handle
        self._omit_timings = omit_timings
        handle.write(header.model_dump_json() + "\n")

    def write(self, record: FrameAnalysis | FrameError) -> None:
        if isinstance(record, FrameAnalysis) and self._omit_timings:
            record = record.model_copy(update={"timings_ms": {k: 0.0 for k in record.timings_ms}})
        self._handle.write(record.model_dump_json() + "\n")

    def write_all(self, records: Iterable[FrameAnalysis | FrameError]) -> None:
        for record in records:
            self.write(record)


def read_run(path: Path) -> tuple[RunHeader, list[FrameAnalysis], list[FrameError]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    header = RunHeader.model_validate_json(lines[0])
    analyses: list[FrameAnalysis] = []
    errors: list[FrameError] = []
    for line in lines[1:]:
        if not line.strip():
            continue
        data = json.loads(line)
        if "error" in data:
            errors.append(FrameError.model_validate(data))
        else:
            analyses.append(FrameAnalysis.model_validate(data))
    return header, analyses, errors
