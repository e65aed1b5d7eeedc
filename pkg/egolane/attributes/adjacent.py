from collections.abc import Iterable

from egolane.config import AttributesConfig
from egolane.imaging import HoughLine
from egolane.markings.histogram import angle_distance
from models import AdjacentLane, LaneBase, LaneMarkingType


def detect_adjacent(
    side: str,
    lmt: LaneMarkingType | None,
    lane: LaneBase,
    lines: Iterable[HoughLine],
    config: AttributesConfig,
) -> AdjacentLane:
    """
    Is there a lane beyond this boundary?

    Any marking but a white single solid line implies one: yellow means the
    opposite direction, white the same. Behind a WSS line a lane is assumed
    only if a parallel line sits one lane width further out and the band in
    between is (almost) free of lines.
    """
    if lmt is None:
        return AdjacentLane(present=False)
    if lmt != LaneMarkingType.WSS:
        return AdjacentLane(present=True, direction="opposite" if lmt.is_yellow else "same")

    sign = -1.0 if side == "left" else 1.0
    boundary = lane.p_b + sign * lane.width / 2.0
    target = boundary + sign * lane.width
    band = lane.width / 4.0
    gap_lo, gap_hi = sorted((boundary + sign * lane.width / 8.0, target - sign * band))

    parallel = 0
    in_gap = 0
    for line in lines:
        if abs(line.rho - target) <= band and angle_distance(line.theta, lane.theta) <= config.adjacency_angle:
            parallel += 1
        elif gap_lo < line.rho < gap_hi:
            in_gap += 1
    if parallel >= 1 and in_gap < config.adjacency_gap_max:
        return AdjacentLane(present=True, direction="same")
    return AdjacentLane(present=False)
