"""
Experiment grid: one rendered scene, many pipeline configurations.

Each configuration is a label plus a config and an optional degradation:
particle counts (PF50 … PF400), the Kalman-only baseline, and the quality
and frame-rate degradations.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from egolane.config import PipelineConfig
from egolane.evaluation.metrics import evaluate
from egolane.markings import load_templates
from egolane.pipeline import Degradation, LanePipeline
from models import FrameAnalysis, GroundTruth, MetricsReport, RunHeader

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Variant:
    label: str
    config: PipelineConfig
    degradation: Degradation | None = None


def build_grid(
    base: PipelineConfig,
    particle_counts: Sequence[int] = (50, 100, 200, 400),
    kalman_only: bool = False,
    qualities: Sequence[float] = (),
    rates: Sequence[float] = (),
) -> list[Variant]:
    grid: list[Variant] = []
    for count in particle_counts:
        particles = base.particles.model_copy(update={"count": count, "enabled": True})
        grid.append(Variant(f"PF{count}", base.model_copy(update={"particles": particles})))
    if kalman_only:
        particles = base.particles.model_copy(update={"enabled": False})
        grid.append(Variant("Kalman", base.model_copy(update={"particles": particles})))
    for quality in qualities:
        grid.append(Variant(f"quality:{quality:g}", base, Degradation(kind="quality", value=quality)))
    for rate in rates:
        grid.append(Variant(f"fps:{rate:g}", base, Degradation(kind="fps", value=rate)))
    return grid


def run_variant(
    variant: Variant,
    frames: Sequence[np.ndarray],
    gt: GroundTruth,
    source_fps: float,
    source: str = "synthetic",
) -> tuple[MetricsReport, list[FrameAnalysis]]:
    config = variant.config
    templates = load_templates(None, config.markings.sign_template_size)
    pipeline = LanePipeline(config, templates)
    indices = variant.degradation.frame_indices(len(frames), source_fps) if variant.degradation else None
    selected = [frames[i] for i in indices] if indices is not None else list(frames)
    transform = variant.degradation.apply if variant.degradation else None
    analyses = [a for a in pipeline.run(selected, transform) if isinstance(a, FrameAnalysis)]
    header = RunHeader(
        config_hash=config.config_hash(),
        seed=config.seed,
        source=source,
        degrade=str(variant.degradation) if variant.degradation else None,
        frame_indices=indices,
    )
    report = evaluate(header, analyses, gt, label=variant.label)
    return report, analyses


def run_grid(
    grid: Sequence[Variant],
    frames: Sequence[np.ndarray],
    gt: GroundTruth,
    source_fps: float,
) -> list[MetricsReport]:
    reports: list[MetricsReport] = []
    for variant in grid:
        logger.info("Running %s on %d frames", variant.label, len(frames))
        report, _ = run_variant(variant, frames, gt, source_fps)
        reports.append(report)
    return reports
