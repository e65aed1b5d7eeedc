"""Ready-made scene specs: the oracle suite behind the acceptance evals and `egolane synth --preset`."""

from __future__ import annotations

from models import (
    NOISE_LEVELS,
    CrosswalkPlacement,
    LaneMarkingType,
    LmtSegment,
    OffsetKeyframe,
    SceneSpec,
    SignClass,
    SignPlacement,
)

LMT = LaneMarkingType


def _boundaries(left: LMT, right: LMT) -> list[LMT | None]:
    # three lanes, vehicle in the middle one; road edges solid white
    return [LMT.WSS, left, right, LMT.WSS]


def straight_scene(
    left: LMT = LMT.WSD,
    right: LMT = LMT.WSD,
    frame_count: int = 60,
    noise: str = "none",
    seed: int = 0,
) -> SceneSpec:
    return SceneSpec(
        name=f"straight-{left}-{right}-{noise}",
        frame_count=frame_count,
        seed=seed,
        lmt_segments=[LmtSegment(start_frame=0, boundaries=_boundaries(left, right))],
        noise=NOISE_LEVELS[noise],
    )


def arc_scene(radius_m: float, frame_count: int = 60, noise: str = "none", seed: int = 0) -> SceneSpec:
    return SceneSpec(
        name=f"arc-{radius_m:g}m-{noise}",
        frame_count=frame_count,
        seed=seed,
        radius_m=radius_m,
        lmt_segments=[LmtSegment(start_frame=0, boundaries=_boundaries(LMT.WSD, LMT.WSS))],
        noise=NOISE_LEVELS[noise],
    )


def lmt_transition_scene(frame_count: int = 120) -> SceneSpec:
    half = frame_count // 2
    return SceneSpec(
        name="lmt-transition",
        frame_count=frame_count,
        lmt_segments=[
            LmtSegment(start_frame=0, boundaries=[None, LMT.YSD, LMT.WSD, LMT.WSS]),
            LmtSegment(start_frame=half, boundaries=[None, LMT.YDS, LMT.WSS, LMT.WSS]),
        ],
    )


def lane_change_scene(changes: int = 2, frames_per_change: int = 90) -> SceneSpec:
    """Vehicle drifts one lane right, then back, `changes` times in total."""
    keys = [OffsetKeyframe(frame=0, offset=0.0)]
    width = 160.0
    target = 0.0
    for k in range(changes):
        start = (k + 1) * frames_per_change - 30
        target = width if target == 0.0 else 0.0
        keys.append(OffsetKeyframe(frame=start, offset=keys[-1].offset))
        keys.append(OffsetKeyframe(frame=start + 30, offset=target))
    return SceneSpec(
        name=f"lane-change-{changes}",
        frame_count=(changes + 1) * frames_per_change,
        lmt_segments=[LmtSegment(start_frame=0, boundaries=_boundaries(LMT.WSD, LMT.WSD))],
        offsets=keys,
    )


def crosswalk_scene(frame_count: int = 60) -> SceneSpec:
    return SceneSpec(
        name="crosswalk",
        frame_count=frame_count,
        lmt_segments=[LmtSegment(start_frame=0, boundaries=_boundaries(LMT.WSS, LMT.WSS))],
        crosswalks=[CrosswalkPlacement(distance=600.0)],
    )


def sign_scene(sign_class: SignClass = SignClass.ARROW_1, frame_count: int = 60) -> SceneSpec:
    length = 16.0 if sign_class == SignClass.STOP_LINE else 96.0
    return SceneSpec(
        name=f"sign-{sign_class}",
        frame_count=frame_count,
        lmt_segments=[LmtSegment(start_frame=0, boundaries=_boundaries(LMT.WSS, LMT.WSS))],
        signs=[SignPlacement(sign_class=sign_class, distance=500.0, lane=1, length=length)],
    )


def oracle_suite(frame_count: int = 300) -> list[SceneSpec]:
    """Straight and arc scenes, dashed and solid, at every noise level."""
    return [
        straight_scene(LMT.WSD, LMT.WSD, frame_count, "none"),
        straight_scene(LMT.WSS, LMT.WSS, frame_count, "none"),
        straight_scene(LMT.WSD, LMT.WSS, frame_count, "low", seed=1),
        straight_scene(LMT.YSD, LMT.WSD, frame_count, "med", seed=2),
        arc_scene(100.0, frame_count, "none"),
        arc_scene(-100.0, frame_count, "low", seed=3),
        arc_scene(300.0, frame_count, "none"),
        arc_scene(-300.0, frame_count, "med", seed=4),
        straight_scene(LMT.YDS, LMT.WSD, frame_count, "low", seed=5),
        arc_scene(300.0, frame_count, "low", seed=6),
    ]


PRESETS = {
    "straight": straight_scene,
    "arc100": lambda: arc_scene(100.0),
    "arc300": lambda: arc_scene(300.0),
    "lmt-transition": lmt_transition_scene,
    "lane-change": lane_change_scene,
    "crosswalk": crosswalk_scene,
    "sign": sign_scene,
}
