from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from models import LaneBase, LaneChange


def deviation(vehicle_x: float, lane: LaneBase | None) -> float | None:
    """Signed offset of the vehicle from the lane centre in lane widths; + = right of centre."""
    if lane is None or lane.width <= 0:
        return None
    return (vehicle_x - lane.p_b) / lane.width


@dataclass
class LaneChangeDetector:
    """
    A lane change shows up as the deviation passing ±threshold and then
    snapping to the other sign, by more than `jump`, within `window` frames,
    when the tracker moves over to the new lane.
    """

    threshold: float = 0.5
    jump: float = 0.8
    window: int = 5
    history: deque[float] = field(default_factory=deque)
    cooldown: int = 0

    def __post_init__(self) -> None:
        self.history = deque(self.history, maxlen=self.window)

    def update(self, dev: float | None) -> LaneChange | None:
        if self.cooldown > 0:
            self.cooldown -= 1
        if dev is None:
            return None
        event: LaneChange | None = None
        if self.cooldown == 0:
            for past in self.history:
                if past >= self.threshold and dev < 0 and past - dev > self.jump:
                    event = "to_right"
                    break
                if past <= -self.threshold and dev > 0 and dev - past > self.jump:
                    event = "to_left"
                    break
        if event is not None:
            self.history.clear()
            self.cooldown = self.window
        self.history.append(dev)
        return event
