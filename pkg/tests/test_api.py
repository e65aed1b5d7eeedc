"""Results API over a temporary runs directory."""

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from egolane.api.api import app
from egolane.pipeline import RunWriter
from models import FrameAnalysis, FrameError, MetricsReport, RunHeader, RunSummary


@pytest.fixture
def runs(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    monkeypatch.setenv("EGOLANE_RUNS_DIR", str(tmp_path))
    header = RunHeader(config_hash="abc123", seed=0, source="frames")
    records = [
        FrameAnalysis(frame_index=0),
        FrameError(frame_index=1, error="cannot decode frame"),
        *[FrameAnalysis(frame_index=i) for i in range(2, 5)],
    ]
    with (tmp_path / "straight.jsonl").open("w") as handle:
        RunWriter(handle, header).write_all(records)
    (tmp_path / "straight.report.json").write_text(MetricsReport(frames=4, coverage=1.0).model_dump_json())
    with (tmp_path / "bare.jsonl").open("w") as handle:
        RunWriter(handle, header).write_all([FrameAnalysis(frame_index=0)])
    return tmp_path


def test_list_runs(runs: Path) -> None:
    with TestClient(app) as client:
        response = client.get("/runs")
    assert response.status_code == 200
    summaries = [RunSummary.model_validate(item) for item in response.json()]
    assert [s.id for s in summaries] == ["bare", "straight"]
    straight = summaries[1]
    assert (straight.frames, straight.errors, straight.has_report) == (4, 1, True)
    assert straight.config_hash == "abc123"
    assert not summaries[0].has_report


def test_empty_runs_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("EGOLANE_RUNS_DIR", str(tmp_path / "missing"))
    with TestClient(app) as client:
        assert client.get("/runs").json() == []


def test_frames_are_paginated_in_order(runs: Path) -> None:
    with TestClient(app) as client:
        first = client.get("/runs/straight/frames", params={"limit": 2})
        rest = client.get("/runs/straight/frames", params={"offset": 2})
    assert [r["frame_index"] for r in first.json()] == [0, 1]
    assert first.json()[1]["error"] == "cannot decode frame"
    assert [r["frame_index"] for r in rest.json()] == [2, 3, 4]


def test_bad_pagination(runs: Path) -> None:
    with TestClient(app) as client:
        assert client.get("/runs/straight/frames", params={"limit": 0}).status_code == 422
        assert client.get("/runs/straight/frames", params={"offset": -1}).status_code == 422


def test_single_frame(runs: Path) -> None:
    with TestClient(app) as client:
        found = client.get("/runs/straight/frames/3")
        missing = client.get("/runs/straight/frames/99")
    assert found.status_code == 200
    assert FrameAnalysis.model_validate(found.json()).frame_index == 3
    assert missing.status_code == 404


def test_report(runs: Path) -> None:
    with TestClient(app) as client:
        report = client.get("/runs/straight/report")
        absent = client.get("/runs/bare/report")
    assert report.status_code == 200
    assert MetricsReport.model_validate(report.json()).frames == 4
    assert absent.status_code == 404


def test_unknown_run(runs: Path) -> None:
    with TestClient(app) as client:
        assert client.get("/runs/nope/frames").status_code == 404
        assert client.get("/runs/nope/report").status_code == 404
