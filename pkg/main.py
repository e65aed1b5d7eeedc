"""
Ego-lane analysis command line.

Usage:
    uv run egolane run --frames DIR [--config cfg.json] [--out run.jsonl] [--overlay DIR]
                    [--gt gt.json] [--degrade quality:50|fps:15] [--seed N]
                    [--no-particle-filter] [--omit-timings]
    uv run egolane eval --pred run.jsonl --gt gt.json [--report report.json] [--csv errors.csv]
    uv run egolane synth (--spec scene.json | --preset NAME) --out DIR [--gt gt.json]
    uv run egolane experiment (--spec scene.json | --preset NAME) [--particles 50,100,200,400]
                    [--no-pf] [--quality 75,50,25] [--fps 20,15,10] [--out DIR]
    uv run egolane templates --out DIR
    uv run egolane serve [--runs DIR] [--port 8000]

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import cv2
from dotenv import load_dotenv

from egolane.config import PipelineConfig
from egolane.errors import EgoLaneError, FrameReadError
from egolane.evaluation import align_predictions, build_grid, evaluate, run_grid, write_error_csv
from egolane.markings import write_templates
from egolane.paths import REPORT_SUFFIX, RUN_SUFFIX, runs_dir
from egolane.pipeline import (
    SOURCE_FPS,
    Degradation,
    LanePipeline,
    RunWriter,
    list_frames,
    read_frame,
    read_run,
    render_overlay,
)
from egolane.synth import PRESETS, SceneRenderer, load_ground_truth, load_scene, write_scene
from models import FrameAnalysis, MetricsReport, RunHeader, SceneSpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    config = config.with_env_overrides()
    updates: dict = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "no_particle_filter", False):
        updates["particles"] = config.particles.model_copy(update={"enabled": False})
    return config.model_copy(update=updates) if updates else config


def _load_scene(args: argparse.Namespace) -> SceneSpec:
    if args.spec:
        return load_scene(args.spec)
    return PRESETS[args.preset]()


def _write_report(report: MetricsReport, path: Path) -> None:
    path.write_text(report.model_dump_json(indent=2))
    logger.info("Wrote report %s", path)


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    degradation = Degradation.parse(args.degrade) if args.degrade else None
    paths = list_frames(args.frames)
    if not paths:
        raise FileNotFoundError(f"no frames found in {args.frames}")
    indices = degradation.frame_indices(len(paths), args.source_fps) if degradation else None
    selected = [paths[i] for i in indices] if indices is not None else paths
    transform = degradation.apply if degradation else None

    out = Path(args.out) if args.out else runs_dir() / f"{Path(args.frames).stem}{RUN_SUFFIX}"
    out.parent.mkdir(parents=True, exist_ok=True)
    overlay_dir = Path(args.overlay) if args.overlay else None
    if overlay_dir is not None:
        overlay_dir.mkdir(parents=True, exist_ok=True)

    pipeline = LanePipeline(config)
    header = RunHeader(
        config_hash=config.config_hash(),
        seed=config.seed,
        source=str(args.frames),
        degrade=str(degradation) if degradation else None,
        frame_indices=indices,
    )
    logger.info("Processing %d frames from %s", len(selected), args.frames)
    analyses: list[FrameAnalysis] = []
    errors = 0
    start = time.perf_counter()
    with out.open("w") as handle:
        writer = RunWriter(handle, header, omit_timings=args.omit_timings)
        for record in pipeline.run(selected, transform):
            writer.write(record)
            if not isinstance(record, FrameAnalysis):
                errors += 1
                continue
            analyses.append(record)
            if overlay_dir is not None:
                frame = read_frame(selected[record.frame_index])
                frame = transform(frame) if transform else frame
                image = render_overlay(frame, record, config, pipeline.homography)
                cv2.imwrite(str(overlay_dir / f"{record.frame_index:06d}.png"), image)
    elapsed = time.perf_counter() - start
    fps = len(selected) / elapsed if elapsed > 0 else float("inf")
    logger.info("Wrote %s: %d frames, %d errors, %.1f FPS", out, len(analyses), errors, fps)

    if args.gt:
        gt = load_ground_truth(args.gt)
        report = evaluate(header, analyses, gt, label=out.stem)
        _write_report(report, Path(args.report) if args.report else out.with_name(out.stem + REPORT_SUFFIX))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    header, analyses, _ = read_run(args.pred)
    gt = load_ground_truth(args.gt)
    report = evaluate(header, analyses, gt, label=args.label or Path(args.pred).stem)
    pred_path = Path(args.pred)
    _write_report(report, Path(args.report) if args.report else pred_path.with_name(pred_path.stem + REPORT_SUFFIX))
    if args.csv:
        rows = write_error_csv(align_predictions(analyses, header.frame_indices), gt, args.csv)
        logger.info("Wrote %d error rows to %s", rows, args.csv)
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    config = _load_config(args)
    spec = _load_scene(args)
    write_scene(spec, config, Path(args.out), Path(args.gt) if args.gt else None)
    return EXIT_OK


def _parse_list(text: str | None) -> list[float]:
    if not text:
        return []
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValueError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def cmd_experiment(args: argparse.Namespace) -> int:
    config = _load_config(args)
    spec = _load_scene(args)
    renderer = SceneRenderer(spec, config)
    frames = list(renderer.frames())
    gt = renderer.ground_truth()
    grid = build_grid(
        config,
        particle_counts=[int(n) for n in _parse_list(args.particles)],
        kalman_only=args.no_pf,
        qualities=_parse_list(args.quality),
        rates=_parse_list(args.fps),
    )
    reports = run_grid(grid, frames, gt, spec.fps)
    out_dir = Path(args.out) if args.out else runs_dir() / f"experiment-{spec.name}"
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"{'config':<14} {'near %':>8} {'far %':>8} {'coverage':>9} {'total ms':>10}")
    for report in reports:
        _write_report(report, out_dir / f"{report.label.replace(':', '-')}{REPORT_SUFFIX}")
        total = report.timings.get("total")
        print(
            f"{report.label:<14} {_fmt(report.near_mae_pct):>8} {_fmt(report.far_mae_pct):>8} "
            f"{report.coverage:>9.2f} {_fmt(total.mean_ms if total else None):>10}"
        )
    return EXIT_OK


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def cmd_templates(args: argparse.Namespace) -> int:
    written = write_templates(Path(args.out))
    logger.info("Wrote %d templates to %s", len(written), args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    if args.runs:
        os.environ["EGOLANE_RUNS_DIR"] = str(args.runs)
    uvicorn.run("egolane.api.api:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egolane", description="Ego-lane analysis on road image sequences.")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default: EGOLANE_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="analyse a frame sequence into a JSONL run file")
    run.add_argument("--frames", type=Path, required=True, help="directory of numbered images or an image-list file")
    run.add_argument("--config", type=Path, help="pipeline config JSON (default: built-in calibration)")
    run.add_argument("--out", type=Path, help="run file (default: <runs dir>/<frames name>.jsonl)")
    run.add_argument("--overlay", type=Path, help="write annotated frames to this directory")
    run.add_argument("--gt", type=Path, help="ground truth JSON; computes a metrics report")
    run.add_argument("--report", type=Path, help="report path (default: next to the run file)")
    run.add_argument("--degrade", help="quality:<pct> or fps:<rate>")
    run.add_argument("--source-fps", type=float, default=SOURCE_FPS)
    run.add_argument("--seed", type=int)
    run.add_argument("--no-particle-filter", action="store_true", help="Kalman-only lane estimate")
    run.add_argument("--omit-timings", action="store_true", help="write zero timings (byte-reproducible output)")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="score a run file against ground truth")
    ev.add_argument("--pred", type=Path, required=True)
    ev.add_argument("--gt", type=Path, required=True)
    ev.add_argument("--report", type=Path)
    ev.add_argument("--csv", type=Path, help="per-frame, per-row boundary errors")
    ev.add_argument("--label")
    ev.set_defaults(func=cmd_eval)

    for name, func, text in (
        ("synth", cmd_synth, "render a synthetic scene with ground truth"),
        ("experiment", cmd_experiment, "run a configuration grid on one synthetic scene"),
    ):
        p = sub.add_parser(name, help=text)
        scene = p.add_mutually_exclusive_group(required=True)
        scene.add_argument("--spec", type=Path, help="scene spec JSON")
        scene.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--config", type=Path)
        p.add_argument("--out", type=Path, required=name == "synth")
        p.set_defaults(func=func)
        if name == "synth":
            p.add_argument("--gt", type=Path, help="ground truth path (default: <out>/gt.json)")
        else:
            p.add_argument("--particles", default="50,100,200,400")
            p.add_argument("--no-pf", action="store_true", help="add the Kalman-only configuration")
            p.add_argument("--quality", help="comma-separated quality percentages")
            p.add_argument("--fps", help="comma-separated frame rates")

    templates = sub.add_parser("templates", help="export the generated arrow templates")
    templates.add_argument("--out", type=Path, required=True)
    templates.set_defaults(func=cmd_templates)

    serve = sub.add_parser("serve", help="serve run files over HTTP")
    serve.add_argument("--runs", type=Path)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    level = (args.log_level or os.getenv("EGOLANE_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (EgoLaneError, ValueError) as exc:
        if isinstance(exc, FrameReadError):
            logger.error("%s", exc)
            return EXIT_IO
        logger.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
