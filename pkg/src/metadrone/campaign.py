"""Repeated execution of one metamorphic group, with per-run trace files."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .harness import (MetamorphicGroup, MetamorphicRelation, TestInput, TestOutput, Tolerances, Verdict,
                      execute_group, simulate)
from .simulator import TraceRow

TRACE_HEADER = ("sim_time", "drone_id", "x", "y", "z", "vx", "vy", "phase", "avoidance_active",
                "cumulative_distance", "maneuver_count")

SEED_POLICIES = ("fixed", "incrementing")

EXIT_SATISFIED, EXIT_VIOLATED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


@dataclass
class RepeatResult:
    repeat: int
    seed: int
    group: MetamorphicGroup
    trace_files: List[Path] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return self.group.verdict


@dataclass
class CampaignReport:
    scenario_id: str
    relation: MetamorphicRelation
    seed_policy: str
    tolerances: Tolerances
    repeats: List[RepeatResult] = field(default_factory=list)

    def verdict_counts(self) -> Dict[str, int]:
        c = Counter(r.verdict.value for r in self.repeats)
        return {v.value: c.get(v.value, 0) for v in Verdict}

    @property
    def exit_status(self) -> int:
        verdicts = {r.verdict for r in self.repeats}
        if Verdict.INCONCLUSIVE in verdicts:
            return EXIT_INCONCLUSIVE
        if Verdict.VIOLATED in verdicts:
            return EXIT_VIOLATED
        return EXIT_SATISFIED

    def manoeuvre_histogram(self) -> Dict[str, Dict[int, int]]:
        """Avoidance-count frequencies per (run, drone) across repeats."""
        hist: Dict[str, Counter] = {}
        for r in self.repeats:
            for i, out in enumerate(r.group.outputs):
                for d, tel in out.telemetry.items():
                    hist.setdefault(f"run{i}:{d}", Counter())[tel.avoidance_count] += 1
        return {k: dict(sorted(v.items())) for k, v in hist.items()}

    def durations(self) -> Dict[str, List[float]]:
        out: Dict[str, List[float]] = {}
        for r in self.repeats:
            for i, o in enumerate(r.group.outputs):
                for d, tel in o.telemetry.items():
                    out.setdefault(f"run{i}:{d}", []).append(tel.elapsed_time)
        return out


def format_trace(rows: Sequence[TraceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in rows:
        w.writerow((f"{r.sim_time:.3f}", r.drone_id, f"{r.x:.6f}", f"{r.y:.6f}", f"{r.z:.6f}",
                    f"{r.vx:.6f}", f"{r.vy:.6f}", r.phase, int(r.avoidance_active),
                    f"{r.cumulative_distance:.6f}", r.maneuver_count))
    return buf.getvalue()


def write_trace(rows: Sequence[TraceRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_trace(rows))
    return path


def read_trace(path: Path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def trace_filename(scenario_id: str, relation_id: str, repeat: int, run: int) -> str:
    safe = scenario_id.replace("/", "_")
    return f"{safe}__{relation_id}__rep{repeat:03d}__run{run}.csv"


def seed_for(base_seed: int, repeat_index: int, policy: str) -> int:
    if policy == "fixed":
        return base_seed
    if policy == "incrementing":
        return base_seed + repeat_index
    raise ValueError(f"seed policy must be one of {SEED_POLICIES}, got {policy!r}")


def run_campaign(
    source: TestInput,
    relation: MetamorphicRelation,
    repeats: int = 1,
    seed_policy: str = "fixed",
    trace_dir: Optional[Path] = None,
    tolerances: Optional[Tolerances] = None,
    runner: Callable[[TestInput], TestOutput] = simulate,
    progress: Optional[Callable[[RepeatResult], None]] = None,
) -> CampaignReport:
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    seed_for(source.seed, 0, seed_policy)
    tol = tolerances or relation.tolerances
    report = CampaignReport(source.scenario_id, relation, seed_policy, tol)
    for k in range(repeats):
        seed = seed_for(source.seed, k, seed_policy)
        group = execute_group(relation, source.with_seed(seed), runner, tol)
        result = RepeatResult(k + 1, seed, group)
        if trace_dir is not None:
            for j, out in enumerate(group.outputs):
                name = trace_filename(source.scenario_id, relation.id, k + 1, j)
                result.trace_files.append(write_trace(out.trace, Path(trace_dir) / name))
        report.repeats.append(result)
        if progress:
            progress(result)
    return report
