"""Per-side candidate buffers that reject outliers and notice a lasting change of lane."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

from egolane.imaging import HoughLine

logger = logging.getLogger(__name__)


@dataclass
class SideBuffers:
    capacity: int = 10
    correct: deque[tuple[float, float]] = field(default_factory=deque)
    incorrect: deque[tuple[float, float]] = field(default_factory=deque)

    def __post_init__(self) -> None:
        self.correct = deque(self.correct, maxlen=self.capacity)
        self.incorrect = deque(self.incorrect, maxlen=self.capacity)

    def mean(self) -> tuple[float, float] | None:
        if not self.correct:
            return None
        n = len(self.correct)
        return (sum(p[0] for p in self.correct) / n, sum(p[1] for p in self.correct) / n)

    def clear(self) -> None:
        self.correct.clear()
        self.incorrect.clear()


@dataclass
class LaneBuffers:
    left: SideBuffers
    right: SideBuffers

    @classmethod
    def create(cls, capacity: int) -> LaneBuffers:
        return cls(left=SideBuffers(capacity), right=SideBuffers(capacity))


def update_buffers(candidate: HoughLine | None, buffers: SideBuffers, distance: float) -> tuple[bool, bool]:
    """
    Returns (accepted, force_swap).

    A candidate is accepted while B_correct is filling up or when it lies closer than
    `distance` to B_correct's mean in raw (ρ, θ). Rejections collect in
    B_incorrect; once it fills, the two buffers swap places and the candidate
    is accepted with force_swap set.
    """
    if candidate is None:
        return False, False
    point = (candidate.rho, candidate.theta)
    mean = buffers.mean()
    if len(buffers.correct) < buffers.capacity or (
        mean is not None and math.dist(point, mean) < distance
    ):
        buffers.correct.append(point)
        buffers.incorrect.clear()
        return True, False

    buffers.incorrect.append(point)
    if len(buffers.incorrect) < buffers.capacity:
        return False, False
    logger.info("Candidate buffer swap at rho=%.1f theta=%.1f", *point)
    buffers.correct, buffers.incorrect = buffers.incorrect, buffers.correct
    buffers.incorrect.clear()
    return True, True
