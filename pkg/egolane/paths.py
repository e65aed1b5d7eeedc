"""
Filesystem locations used by the CLI and the results API.

- DATA_DIR: repository data directory
- RUNS_DIR: default directory holding run JSONL files and metrics reports
- TEMPLATE_FILENAMES: file names of an arrow template set, in class order
"""

import os
from pathlib import Path

DATA_DIR: Path = Path(__file__).resolve().parent.parent / "data"
RUNS_DIR: Path = DATA_DIR / "runs"

TEMPLATE_FILENAMES: list[str] = [f"arrow_{k}.png" for k in range(1, 9)]

RUN_SUFFIX = ".jsonl"
REPORT_SUFFIX = ".report.json"


def runs_dir() -> Path:
    """RUNS_DIR, unless EGOLANE_RUNS_DIR points elsewhere."""
    override = os.getenv("EGOLANE_RUNS_DIR")
    return Path(override) if override else RUNS_DIR
