from .degrade import SOURCE_FPS, Degradation, degrade_quality, kept_indices
from .frames import RunWriter, list_frames, read_frame, read_run
from .overlay import render_overlay
from .pipeline import LanePipeline, PipelineState, process_frame
from .timing import STAGES, StageTimer

__all__ = [
    "Degradation",
    "LanePipeline",
    "PipelineState",
    "RunWriter",
    "SOURCE_FPS",
    "STAGES",
    "StageTimer",
    "degrade_quality",
    "kept_indices",
    "list_frames",
    "process_frame",
    "read_frame",
    "read_run",
    "render_overlay",
]
