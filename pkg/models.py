from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LaneMarkingType(StrEnum):
    # W/Y = white/yellow; SS/SD = single solid/dashed; DS = double solid;
    # MS/MD = mixed double, solid/dashed on the ego side
    WSS = "WSS"
    WSD = "WSD"
    YSS = "YSS"
    YSD = "YSD"
    YDS = "YDS"
    YMS = "YMS"
    YMD = "YMD"

    @property
    def is_yellow(self) -> bool:
        return self.value.startswith("Y")

    @property
    def restrictiveness(self) -> int:
        """Tie-break rank: solid beats dashed, then double beats single."""
        return _LMT_RANK[self]


_LMT_RANK: dict[LaneMarkingType, int] = {
    LaneMarkingType.WSD: 1,
    LaneMarkingType.YSD: 2,
    LaneMarkingType.YMD: 3,
    LaneMarkingType.WSS: 4,
    LaneMarkingType.YSS: 5,
    LaneMarkingType.YMS: 6,
    LaneMarkingType.YDS: 7,
}


class SignClass(StrEnum):
    ARROW_1 = "arrow_1"
    ARROW_2 = "arrow_2"
    ARROW_3 = "arrow_3"
    ARROW_4 = "arrow_4"
    ARROW_5 = "arrow_5"
    ARROW_6 = "arrow_6"
    ARROW_7 = "arrow_7"
    ARROW_8 = "arrow_8"
    STOP_LINE = "stop_line"
    UNKNOWN = "unknown"


ARROW_CLASSES: tuple[SignClass, ...] = tuple(SignClass(f"arrow_{k}") for k in range(1, 9))

MeasurementSource = Literal["pair", "single_left", "single_right", "carry_over"]
TrackerStatus = Literal["active", "inactive", "disabled"]
AdjacentDirection = Literal["same", "opposite"]
LaneChange = Literal["to_left", "to_right"]


class Rect(BaseModel):
    x: int = Field(ge=0)
    y: int = Field(ge=0)
    width: int = Field(gt=0)
    height: int = Field(gt=0)

    @property
    def x2(self) -> int:
        return self.x + self.width

    @property
    def y2(self) -> int:
        return self.y + self.height

    @property
    def aspect_ratio(self) -> float:
        return self.width / self.height

    def expanded(self, margin: int, shape: tuple[int, int]) -> "Rect":
        """Grow by `margin` on every side, clipped to a (rows, cols) shape."""
        rows, cols = shape
        x0 = max(0, self.x - margin)
        y0 = max(0, self.y - margin)
        x1 = min(cols, self.x2 + margin)
        y1 = min(rows, self.y2 + margin)
        return Rect(x=x0, y=y0, width=max(1, x1 - x0), height=max(1, y1 - y0))


class RoadSign(BaseModel):
    sign_class: SignClass
    bbox: Rect
    score: float | None = None


class CrosswalkResult(BaseModel):
    detected: bool
    dominant_angle: int | None = None
    region: Rect | None = None
    score: float | None = None

    @model_validator(mode="after")
    def _detection_needs_angle(self) -> "CrosswalkResult":
        if self.detected and self.dominant_angle is None:
            raise ValueError("a detected crosswalk must carry its dominant angle")
        return self


class LaneMeasurement(BaseModel):
    p_b: float
    p_t: float
    width: float
    theta: float
    source: MeasurementSource

    @field_validator("width")
    @classmethod
    def _positive_width(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("lane width must be positive")
        return v


class LaneBase(BaseModel):
    p_b: float
    p_t: float
    width: float
    theta: float


class LaneRecord(BaseModel):
    """Serialized lane estimate: per-row boundaries sampled inside the trust area."""

    rows: list[int]
    left: list[float]
    right: list[float]
    center: list[float]
    trust_height: int
    control_points: list[float]  # x1, x2, x3
    widths: list[float]  # w1, w2


class AdjacentLane(BaseModel):
    present: bool
    direction: AdjacentDirection | None = None


class FrameAnalysis(BaseModel):
    # extra keys would let a FrameError line validate as an empty analysis
    model_config = ConfigDict(extra="forbid")

    frame_index: int
    lane: LaneRecord | None = None
    lane_base: LaneBase | None = None
    tracker_status: TrackerStatus = "disabled"
    lmt_left: LaneMarkingType | None = None
    lmt_right: LaneMarkingType | None = None
    adjacent_left: AdjacentLane | None = None
    adjacent_right: AdjacentLane | None = None
    deviation: float | None = None
    lane_change: LaneChange | None = None
    crosswalk: CrosswalkResult = Field(default_factory=lambda: CrosswalkResult(detected=False))
    road_signs: list[RoadSign] = Field(default_factory=list)
    flags: list[str] = Field(default_factory=list)
    timings_ms: dict[str, float] = Field(default_factory=dict)


class FrameError(BaseModel):
    model_config = ConfigDict(extra="forbid")

    frame_index: int
    error: str


class RunHeader(BaseModel):
    schema_name: Literal["egolane.frame_analysis"] = "egolane.frame_analysis"
    version: int = 1
    config_hash: str
    seed: int
    source: str
    degrade: str | None = None
    frame_indices: list[int] | None = None


# ---------------------------------------------------------------------------
# Synthetic scenes and ground truth
# ---------------------------------------------------------------------------


class LmtSegment(BaseModel):
    start_frame: int = Field(ge=0)
    # one entry per road boundary, left to right; None = unmarked road edge
    boundaries: list[LaneMarkingType | None]


class CrosswalkPlacement(BaseModel):
    distance: float  # along-road px from the vehicle at frame 0
    length: float = 120.0
    strip_width: float = 20.0
    strip_gap: float = 20.0


class SignPlacement(BaseModel):
    sign_class: SignClass
    distance: float
    lane: int  # road lane index, 0 = leftmost
    width: float = 48.0
    length: float = 96.0

    @field_validator("sign_class")
    @classmethod
    def _renderable(cls, v: SignClass) -> SignClass:
        if v == SignClass.UNKNOWN:
            raise ValueError("unknown signs cannot be placed in a scene")
        return v


class OffsetKeyframe(BaseModel):
    frame: int = Field(ge=0)
    offset: float  # vehicle lateral offset from the start-lane center, IPM px, + = right


class NoiseSpec(BaseModel):
    intensity_sigma: float = Field(default=0.0, ge=0.0)
    dash_erosion_prob: float = Field(default=0.0, ge=0.0, le=1.0)


NOISE_LEVELS: dict[str, NoiseSpec] = {
    "none": NoiseSpec(),
    "low": NoiseSpec(intensity_sigma=4.0, dash_erosion_prob=0.05),
    "med": NoiseSpec(intensity_sigma=8.0, dash_erosion_prob=0.15),
}


class SceneSpec(BaseModel):
    name: str = "scene"
    frame_count: int = Field(default=60, gt=0)
    seed: int = 0
    lane_count: int = Field(default=3, gt=0)
    start_lane: int = 1
    lane_width: float = Field(default=160.0, gt=0)
    marking_width: float = 6.0
    double_gap: float = 6.0
    dash_length: float = 40.0
    dash_gap: float = 120.0
    speed: float = Field(default=12.0, ge=0.0)  # IPM px per frame
    radius_m: float | None = None  # signed; + bends right
    px_per_meter: float = 44.4
    lmt_segments: list[LmtSegment]
    transition_window: int = Field(default=3, ge=0)
    crosswalks: list[CrosswalkPlacement] = Field(default_factory=list)
    signs: list[SignPlacement] = Field(default_factory=list)
    offsets: list[OffsetKeyframe] = Field(default_factory=list)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    asphalt: int = 65
    white: int = 153
    yellow_bgr: tuple[int, int, int] = (83, 151, 185)
    fps: float = 29.97

    @model_validator(mode="after")
    def _check_lanes(self) -> "SceneSpec":
        if not 0 <= self.start_lane < self.lane_count:
            raise ValueError("start_lane must index a road lane")
        if not self.lmt_segments:
            raise ValueError("at least one LMT segment is required")
        for segment in self.lmt_segments:
            if len(segment.boundaries) != self.lane_count + 1:
                raise ValueError("each LMT segment needs lane_count + 1 boundaries")
        starts = [s.start_frame for s in self.lmt_segments]
        if starts != sorted(starts) or starts[0] != 0:
            raise ValueError("LMT segments must start at frame 0 and be ordered")
        return self


class GroundTruthFrame(BaseModel):
    frame_index: int
    left: list[float]  # ego-lane left boundary at each evaluation row
    right: list[float]
    center: float  # ego-lane center at the bottom row
    width: float
    lmt_left: list[LaneMarkingType]  # more than one entry around an LMT change
    lmt_right: list[LaneMarkingType]
    crosswalk: bool
    signs: list[SignClass]
    adjacent_left: AdjacentLane
    adjacent_right: AdjacentLane
    deviation: float
    lane_change: LaneChange | None = None


class GroundTruth(BaseModel):
    version: int = 1
    scene: str
    eval_rows: list[int]
    near_rows: int = 3
    frames: list[GroundTruthFrame]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class StageTiming(BaseModel):
    mean_ms: float
    std_ms: float


class MetricsReport(BaseModel):
    frames: int
    near_mae_pct: float | None = None
    near_std_pct: float | None = None
    far_mae_pct: float | None = None
    far_std_pct: float | None = None
    center_mae_pct: float | None = None
    deviation_mae_pct: float | None = None
    coverage: float
    excluded_points: int = 0
    crosswalk_accuracy: float | None = None
    sign_accuracy: float | None = None
    lmt_accuracy: float | None = None
    adjacency_accuracy: float | None = None
    lane_change_precision: float | None = None
    lane_change_recall: float | None = None
    timings: dict[str, StageTiming] = Field(default_factory=dict)
    label: str | None = None


class RunSummary(BaseModel):
    id: str
    frames: int
    errors: int
    config_hash: str | None = None
    has_report: bool = False
