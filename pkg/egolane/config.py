"""
Pipeline configuration.

Every tunable lives in exactly one place: a section per pipeline module plus the
camera calibration at the top level. The config is a frozen pydantic model so it
round-trips through JSON unchanged, and a handful of run-level knobs can be
overridden from EGOLANE_* environment variables (read after `load_dotenv()`).
"""

from __future__ import annotations

import hashlib
import logging
import os
from pathlib import Path

import cv2
import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from egolane.errors import ConfigError

logger = logging.getLogger(__name__)

# Ground-plane correspondence behind the default homography: a trapezoid in
# RoI-local perspective pixels and the IPM rectangle it maps onto.
DEFAULT_IPM_SOURCE: tuple[tuple[float, float], ...] = ((290.0, 40.0), (350.0, 40.0), (416.0, 239.0), (224.0, 239.0))
DEFAULT_IPM_TARGET: tuple[tuple[float, float], ...] = ((240.0, 0.0), (400.0, 0.0), (400.0, 479.0), (240.0, 479.0))


def default_homography() -> list[float]:
    matrix = cv2.getPerspectiveTransform(
        np.asarray(DEFAULT_IPM_SOURCE, dtype=np.float32),
        np.asarray(DEFAULT_IPM_TARGET, dtype=np.float32),
    )
    return [float(v) for v in matrix.ravel()]


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Roi(_Section):
    x: int = Field(default=0, ge=0)
    y: int = Field(default=240, ge=0)
    width: int = Field(default=640, gt=0)
    height: int = Field(default=240, gt=0)


class ImagingConfig(_Section):
    hough_rho: float = 1.0
    hough_theta_deg: float = 1.0
    hough_threshold: int = 20
    hough_min_line_length: int = 20
    hough_max_line_gap: int = 5
    hough_min_votes: int = 10


class FeatureConfig(_Section):
    tau_top: int = 5
    tau_bottom: int = 25
    srf_threshold: float = 30.0
    dog_threshold: float = 20.0
    vad_threshold: float = 20.0
    dog_marking_width: float = 10.0
    # DOG/VAD evidence this close to the edge of the warped RoI is dropped
    border_margin: int = 10


class MarkingsConfig(_Section):
    crosswalk_close: tuple[int, int] = (5, 5)
    crosswalk_erode: tuple[int, int] = (9, 3)
    crosswalk_near_rows: int = 40
    crosswalk_far_rows: int = 400
    crosswalk_lane_margin: int = 16
    crosswalk_max_angle_deviation: float = 45.0
    crosswalk_min_strips: int = 2
    rho_bin: int = 3
    angle_bins: int = 360
    angle_window: int = 5
    sign_close: tuple[int, int] = (3, 15)
    sign_row_gap: int = 2
    sign_min_height: int = 8
    sign_lane_margin: int = 12
    sign_center_band: float = 0.5
    sign_aspect_threshold: float = 4.0
    sign_match_threshold: float = 0.6
    sign_template_size: int = 32
    removal_margin: int = 2
    template_dir: str | None = None


class MeasurementConfig(_Section):
    evidence_radius: float = 5.0
    angle_window: int = 5
    angle_mask: int = 15
    gamma: float = 0.7
    neutral_halfwidth: float = 40.0
    buffer_size: int = 10
    buffer_distance: float = 15.0
    validity_fraction: float = 0.15


class KalmanConfig(_Section):
    position_process_noise: float = 1e-2
    velocity_process_noise: float = 1e-1
    measurement_noise: float = 4.0
    initial_position_variance: float = 4.0
    initial_velocity_variance: float = 1.0
    reset_inflation: float = 100.0
    hysteresis_frames: int = 10
    deviation_reset: float = 2.0


class ParticleConfig(_Section):
    enabled: bool = True
    count: int = Field(default=400, gt=0)
    x_sigma: float = 3.0
    width_sigma: float = 2.0
    init_sigma: float = 10.0
    min_trust_height: int = 8
    inner_band_fraction: float = 0.25
    inner_band_offset: int | None = None  # None: half the marking width plus one
    marking_width: float = 6.0
    trust_strip_fraction: float = 0.25
    trust_min_row_evidence: int = 2


class AttributesConfig(_Section):
    hsv_lower: tuple[float, float, float] = (30.0, 31.0, 31.0)  # degrees, %, %
    hsv_upper: tuple[float, float, float] = (50.0, 78.0, 78.0)
    yellow_fraction: float = 0.5
    dashed_evidence_fraction: float = 0.3
    wbw_single_max: float = 0.2
    wbw_double_min: float = 0.8
    wbw_min_gap: int = 2
    wbw_min_run: int = 1
    band_fraction: float = 0.125
    lmt_buffer_size: int = 30
    adjacency_angle: float = 15.0
    adjacency_gap_max: int = 1
    lane_change_threshold: float = 0.5
    lane_change_jump: float = 0.8
    lane_change_window: int = 5


class PipelineConfig(_Section):
    frame_width: int = 640
    frame_height: int = 480
    roi: Roi = Field(default_factory=Roi)
    homography: list[float] = Field(default_factory=default_homography)
    ipm_width: int = 640
    ipm_height: int = 480
    vehicle_x: float = 320.0
    seed: int = 0
    imaging: ImagingConfig = Field(default_factory=ImagingConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    markings: MarkingsConfig = Field(default_factory=MarkingsConfig)
    measurement: MeasurementConfig = Field(default_factory=MeasurementConfig)
    kalman: KalmanConfig = Field(default_factory=KalmanConfig)
    particles: ParticleConfig = Field(default_factory=ParticleConfig)
    attributes: AttributesConfig = Field(default_factory=AttributesConfig)

    @field_validator("homography")
    @classmethod
    def _nine_reals(cls, v: list[float]) -> list[float]:
        if len(v) != 9:
            raise ValueError("homography must hold 9 row-major reals")
        return v

    @model_validator(mode="after")
    def _check_geometry(self) -> "PipelineConfig":
        if self.roi.x + self.roi.width > self.frame_width or self.roi.y + self.roi.height > self.frame_height:
            raise ValueError("RoI must lie inside the frame")
        if not 0 <= self.vehicle_x < self.ipm_width:
            raise ValueError("vehicle_x must lie inside the IPM image")
        return self

    @property
    def ipm_size(self) -> tuple[int, int]:
        """(width, height), the order OpenCV expects."""
        return (self.ipm_width, self.ipm_height)

    @property
    def validity_threshold(self) -> float:
        m = self.measurement
        return m.validity_fraction * self.ipm_height * m.evidence_radius

    def config_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()[:12]

    @classmethod
    def from_file(cls, path: Path) -> "PipelineConfig":
        try:
            return cls.model_validate_json(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except ValidationError as exc:
            raise ConfigError(f"invalid config {path}: {exc}") from exc

    def to_file(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2))

    def with_env_overrides(self) -> "PipelineConfig":
        """Apply EGOLANE_* overrides; unset or invalid values keep the current setting."""
        load_dotenv()
        enabled_raw = os.getenv("EGOLANE_PARTICLE_FILTER")
        enabled = self.particles.enabled if enabled_raw not in {"0", "1"} else enabled_raw == "1"
        particles = self.particles.model_copy(
            update={
                "count": max(1, _read_env_int("EGOLANE_PARTICLE_COUNT", self.particles.count)),
                "enabled": enabled,
            }
        )
        markings = self.markings.model_copy(
            update={"template_dir": os.getenv("EGOLANE_TEMPLATE_DIR") or self.markings.template_dir}
        )
        return self.model_copy(
            update={
                "seed": _read_env_int("EGOLANE_SEED", self.seed),
                "particles": particles,
                "markings": markings,
            }
        )


def _read_env_int(name: str, default: int) -> int:
    """Read env var as int; return default if unset or invalid."""
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r (not an integer)", name, raw)
        return default
