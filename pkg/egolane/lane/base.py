"""
Lane-base tracking: a constant-velocity Kalman filter over
(p_b, ṗ_b, p_t, ṗ_t, w, ẇ) wrapped in an Active / Inactive / Disabled
state machine.

Active     measurements are filtered and the corrected state is output.
Inactive   the last output is held (and reported only while it still has
           CMB support); `hysteresis_frames` consecutive measurements
           re-activate, as many consecutive misses disable.
Disabled   nothing is output until `hysteresis_frames` consecutive
           measurements arrive.

A filter without state (fresh, or reset after a buffer swap) initializes from
the next measurement and goes Active immediately.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from filterpy.kalman import KalmanFilter

from egolane.config import KalmanConfig
from models import LaneBase, LaneMeasurement, TrackerStatus

logger = logging.getLogger(__name__)

_POSITIONS = (0, 2, 4)


def base_theta(p_b: float, p_t: float, height: int) -> float:
    return math.degrees(math.atan2(height - 1, p_t - p_b))


class LaneKalman:
    def __init__(self, config: KalmanConfig, height: int) -> None:
        self.config = config
        self.height = height
        self._kf: KalmanFilter | None = None
        self._inflate_next = False

    @property
    def is_initialized(self) -> bool:
        return self._kf is not None

    @property
    def x(self) -> np.ndarray:
        assert self._kf is not None
        return self._kf.x.ravel()

    @property
    def P(self) -> np.ndarray:
        assert self._kf is not None
        return self._kf.P

    def reset(self) -> None:
        """Drop the state; the next initialization uses an inflated covariance."""
        self._kf = None
        self._inflate_next = True

    def initialize(self, z: LaneMeasurement) -> None:
        c = self.config
        kf = KalmanFilter(dim_x=6, dim_z=3)
        step = np.array([[1.0, 1.0], [0.0, 1.0]])
        kf.F = np.kron(np.eye(3), step)
        kf.H = np.zeros((3, 6))
        for row, col in enumerate(_POSITIONS):
            kf.H[row, col] = 1.0
        kf.Q = np.diag([c.position_process_noise, c.velocity_process_noise] * 3)
        kf.R = np.eye(3) * c.measurement_noise
        inflation = c.reset_inflation if self._inflate_next else 1.0
        kf.P = np.diag([c.initial_position_variance, c.initial_velocity_variance] * 3) * inflation
        kf.x = np.array([[z.p_b], [0.0], [z.p_t], [0.0], [z.width], [0.0]])
        self._kf = kf
        self._inflate_next = False

    def hold_width_rate(self) -> None:
        assert self._kf is not None
        self._kf.x[5, 0] = 0.0

    def predict(self) -> None:
        assert self._kf is not None
        self._kf.predict()

    def update(self, z: LaneMeasurement) -> None:
        assert self._kf is not None
        kf = self._kf
        if z.source in ("single_left", "single_right"):
            # width is not observed: a zero H row leaves it out of the gain, and
            # it is pinned with its rate for this step
            width = kf.x[4, 0]
            H = kf.H.copy()
            H[2] = 0.0
            kf.update(np.array([z.p_b, z.p_t, 0.0]), H=H)
            kf.x[4, 0] = width
            kf.x[5, 0] = 0.0
        else:
            kf.update(np.array([z.p_b, z.p_t, z.width]))

    def output(self) -> LaneBase:
        x = self.x
        return LaneBase(
            p_b=float(x[0]), p_t=float(x[2]), width=float(x[4]),
            theta=base_theta(float(x[0]), float(x[2]), self.height),
        )


def _finite(z: LaneMeasurement) -> bool:
    return all(math.isfinite(v) for v in (z.p_b, z.p_t, z.width, z.theta))


def kalman_step(kalman: LaneKalman, z: LaneMeasurement | None) -> tuple[LaneBase, list[str]]:
    """Predict, then correct with `z` when it is usable. Returns the output and any flags."""
    flags: list[str] = []
    if z is not None and z.source in ("single_left", "single_right"):
        kalman.hold_width_rate()
    kalman.predict()
    if z is not None:
        if _finite(z):
            kalman.update(z)
        else:
            logger.warning("Non-finite lane measurement ignored")
            flags.append("nonfinite_measurement")
    return kalman.output(), flags


@dataclass
class LaneTracker:
    config: KalmanConfig
    height: int
    status: TrackerStatus = "disabled"
    with_streak: int = 0
    without_streak: int = 0
    held: LaneBase | None = None
    kalman: LaneKalman = field(init=False)

    def __post_init__(self) -> None:
        self.kalman = LaneKalman(self.config, self.height)

    def reset(self) -> None:
        self.kalman.reset()

    def _set_status(self, status: TrackerStatus) -> None:
        if status != self.status:
            logger.info("Lane tracker %s -> %s", self.status, status)
        self.status = status
        self.with_streak = 0
        self.without_streak = 0

    def _activate(self, z: LaneMeasurement) -> LaneBase:
        self.kalman.initialize(z)
        self._set_status("active")
        self.held = self.kalman.output()
        return self.held


def fsm_step(
    tracker: LaneTracker,
    z: LaneMeasurement | None,
    is_supported: Callable[[LaneBase], bool] = lambda _: True,
) -> tuple[LaneBase | None, list[str]]:
    """Advance the tracker by one frame. `is_supported` gates held (Inactive) output."""
    if z is not None and not _finite(z) and tracker.status != "active":
        z = None
    if z is not None and not tracker.kalman.is_initialized:
        return tracker._activate(z), []

    limit = tracker.config.hysteresis_frames
    if tracker.status == "active":
        if z is not None:
            out, flags = kalman_step(tracker.kalman, z)
            tracker.held = out
            return out, flags
        tracker._set_status("inactive")
        tracker.without_streak = 1
        return _held(tracker, is_supported), []

    if tracker.status == "inactive":
        if z is not None:
            tracker.with_streak += 1
            tracker.without_streak = 0
            if tracker.with_streak >= limit:
                return tracker._activate(z), []
            return _held(tracker, is_supported), []
        tracker.without_streak += 1
        tracker.with_streak = 0
        if tracker.without_streak >= limit:
            tracker._set_status("disabled")
            tracker.held = None
            return None, []
        return _held(tracker, is_supported), []

    if z is None:
        tracker.with_streak = 0
        return None, []
    tracker.with_streak += 1
    if tracker.with_streak >= limit:
        return tracker._activate(z), []
    return None, []


def _held(tracker: LaneTracker, is_supported: Callable[[LaneBase], bool]) -> LaneBase | None:
    if tracker.held is None or not is_supported(tracker.held):
        return None
    return tracker.held
