"""
Eval-suite conftest: accumulate per-stage timings across every analysed frame
and print a timing summary at session teardown.

How it works:
- `LanePipeline.process` already returns each frame's `timings_ms`.
- We wrap it so every analysis is also pushed into a session-level list.
- At teardown, the accumulator prints mean ± std per stage in pipeline order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import pandas as pd
import pytest

from egolane.pipeline import STAGES, LanePipeline
from models import FrameAnalysis


@dataclass
class _TimingAccumulator:
    records: list[dict[str, float]] = field(default_factory=list)

    def push(self, analysis: FrameAnalysis) -> None:
        if analysis.timings_ms:
            self.records.append(dict(analysis.timings_ms))

    def frame_count(self) -> int:
        return len(self.records)

    def print_summary(self) -> None:
        if not self.records:
            print("\n[evals] No frames analysed.")
            return

        table = pd.DataFrame(self.records)
        print("\n" + "=" * 52)
        print(f"{'[evals] stage timings over ' + str(len(table)) + ' frames':^52}")
        print("=" * 52)
        print(f"{'Stage':<28} {'Mean ms':>10} {'Std ms':>10}")
        print("-" * 52)
        for name in [*STAGES, "total"]:
            if name not in table:
                continue
            column = table[name]
            print(f"{name:<28} {column.mean():>10.3f} {column.std(ddof=0):>10.3f}")
        print("=" * 52)
        total = table["total"].mean() if "total" in table else 0.0
        if total > 0:
            print(f"[evals] {1000.0 / total:.1f} FPS")


@pytest.fixture(scope="session")
def timing_accumulator() -> _TimingAccumulator:
    return _TimingAccumulator()


@pytest.fixture(scope="session", autouse=True)
def _patch_process(timing_accumulator: _TimingAccumulator):
    """
    Wrap LanePipeline.process so timings are captured in the accumulator
    in addition to being returned as normal.
    """
    original = LanePipeline.process

    def patched(self: LanePipeline, frame) -> FrameAnalysis:
        analysis = original(self, frame)
        timing_accumulator.push(analysis)
        return analysis

    LanePipeline.process = patched
    yield
    LanePipeline.process = original
    timing_accumulator.print_summary()
