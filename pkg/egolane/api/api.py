"""
Read-only results API over a runs directory.

A run is `<id>.jsonl` written by `egolane run`; its metrics report, when one was
computed, sits next to it as `<id>.report.json`.
"""

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query

from egolane.paths import REPORT_SUFFIX, RUN_SUFFIX, runs_dir
from egolane.pipeline import read_run
from models import FrameAnalysis, FrameError, MetricsReport, RunSummary

app = FastAPI(title="Ego-Lane Analysis Results API")


def _run_path(run_id: str) -> Path:
    path = runs_dir() / f"{run_id}{RUN_SUFFIX}"
    if "/" in run_id or not path.exists():
        raise HTTPException(status_code=404, detail=f"Run '{run_id}' not found")
    return path


def _report_path(run_id: str) -> Path:
    return runs_dir() / f"{run_id}{REPORT_SUFFIX}"


@app.get("/runs", response_model=list[RunSummary])
def list_runs() -> list[RunSummary]:
    directory = runs_dir()
    if not directory.exists():
        return []
    summaries: list[RunSummary] = []
    for path in sorted(directory.glob(f"*{RUN_SUFFIX}")):
        run_id = path.name.removesuffix(RUN_SUFFIX)
        header, analyses, errors = read_run(path)
        summaries.append(
            RunSummary(
                id=run_id,
                frames=len(analyses),
                errors=len(errors),
                config_hash=header.config_hash,
                has_report=_report_path(run_id).exists(),
            )
        )
    return summaries


@app.get("/runs/{run_id}/frames", response_model=list[FrameAnalysis | FrameError])
def list_frames(
    run_id: str,
    offset: int = Query(default=0, ge=0),
    limit: int = Query(default=100, ge=1, le=1000),
) -> list[FrameAnalysis | FrameError]:
    _, analyses, errors = read_run(_run_path(run_id))
    records = sorted([*analyses, *errors], key=lambda r: r.frame_index)
    return records[offset:offset + limit]


@app.get("/runs/{run_id}/frames/{index}", response_model=FrameAnalysis | FrameError)
def get_frame(run_id: str, index: int) -> FrameAnalysis | FrameError:
    _, analyses, errors = read_run(_run_path(run_id))
    for record in [*analyses, *errors]:
        if record.frame_index == index:
            return record
    raise HTTPException(status_code=404, detail=f"Frame {index} not found in run '{run_id}'")


@app.get("/runs/{run_id}/report", response_model=MetricsReport)
def get_report(run_id: str) -> MetricsReport:
    _run_path(run_id)
    path = _report_path(run_id)
    if not path.exists():
        raise HTTPException(status_code=404, detail=f"Run '{run_id}' has no report")
    return MetricsReport.model_validate_json(path.read_text())
