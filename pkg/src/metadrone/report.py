"""Console and machine-readable campaign reports."""

from __future__ import annotations

import json
from typing import List

from .campaign import CampaignReport, RepeatResult
from .harness import MetamorphicGroup, Verdict
from .simulator import LegTelemetry, Telemetry

_LABEL = 31
_VALUE = 11
_COUNT = 7


def metric_line(label: str, value: float, unit: str) -> str:
    return f"{label:<{_LABEL}}{value:>{_VALUE}.3f} {unit}"


def count_line(label: str, value: int) -> str:
    return f"{label:<{_LABEL}}{value:>{_COUNT}d}"


def waypoint_block(number: int, leg: LegTelemetry) -> List[str]:
    return [
        f"Waypoint {number} has been reached!",
        metric_line("Shortest path to Waypoint:", leg.shortest_path, "m"),
        metric_line("Distance travelled:", leg.distance_travelled, "m"),
        metric_line("Elapsed wall clock time:", leg.elapsed_time, "s"),
        count_line("Number of avoidance manoeuvres:", leg.avoidance_count),
    ]


def _unreached_block(number: int, tel: Telemetry, outcome: str) -> List[str]:
    return [
        f"Waypoint {number} was not reached! ({outcome})",
        metric_line("Distance travelled:", tel.distance_travelled, "m"),
        metric_line("Elapsed wall clock time:", tel.elapsed_time, "s"),
        count_line("Number of avoidance manoeuvres:", tel.avoidance_count),
    ]


def verdict_lines(group: MetamorphicGroup, label: str) -> List[str]:
    if group.verdict is Verdict.SATISFIED:
        return [f"{label}: True"]
    if group.verdict is Verdict.VIOLATED:
        lines = [f"{label}: False"]
        lines += [f"    failing: {c.name} ({c.detail})" for c in group.failing]
        return lines
    return [f"{label}: Inconclusive", f"    reason: {group.reason}"]


def group_lines(group: MetamorphicGroup, label: str) -> List[str]:
    lines: List[str] = []
    number = 0
    for i, (inp, out) in enumerate(zip(group.inputs, group.outputs)):
        kind = "source" if i == 0 else "follow-up"
        for plan in inp.plans:
            tel = out.telemetry[plan.drone_id]
            lines.append(f"Run {i + 1} ({kind} {inp.scenario_id}), drone {plan.drone_id}: {out.outcome.value}")
            for leg in tel.legs:
                number += 1
                lines += waypoint_block(number, leg)
            for _ in range(len(tel.legs), len(plan.waypoints)):
                number += 1
                lines += _unreached_block(number, tel, out.outcome.value)
    lines.append("---------- MR Validation ----------")
    lines += verdict_lines(group, label)
    return lines


def _console(report: CampaignReport) -> str:
    rel = report.relation
    n = len(report.repeats)
    tol = report.tolerances
    lines = [
        f"Scenario: {report.scenario_id}",
        f"Relation: {rel.id} ({rel.description})" if rel.description else f"Relation: {rel.id}",
        f"Repeats: {n}, seed policy: {report.seed_policy}, "
        f"tolerances: delta_d={tol.delta_d:g} m, delta_t={tol.delta_t:g} s",
    ]
    for r in report.repeats:
        lines.append(f"========== Repeat {r.repeat} of {n} (seed {r.seed}) ==========")
        lines += group_lines(r.group, rel.label)
    counts = report.verdict_counts()
    lines.append("========== Summary ==========")
    lines.append("  ".join(f"{k}: {v}" for k, v in counts.items()))
    for key, hist in report.manoeuvre_histogram().items():
        cells = ", ".join(f"{ac} (x{freq})" for ac, freq in hist.items())
        lines.append(f"Avoidance manoeuvre counts {key}: {cells}")
    return "\n".join(lines) + "\n"


def _r(v: float) -> float:
    return round(float(v), 6)


def _telemetry_record(tel: Telemetry) -> dict:
    return {
        "distance_travelled": _r(tel.distance_travelled),
        "elapsed_time": _r(tel.elapsed_time),
        "avoidance_count": tel.avoidance_count,
        "takeoff_time": _r(tel.takeoff_time),
        "landing_time": _r(tel.landing_time),
        "legs": [
            {"waypoint": [_r(c) for c in leg.waypoint], "shortest_path": _r(leg.shortest_path),
             "distance_travelled": _r(leg.distance_travelled), "elapsed_time": _r(leg.elapsed_time),
             "avoidance_count": leg.avoidance_count}
            for leg in tel.legs
        ],
    }


def group_record(r: RepeatResult) -> dict:
    g = r.group
    return {
        "repeat": r.repeat,
        "seed": r.seed,
        "relation_id": g.relation_id,
        "scenario_ids": [x.scenario_id for x in g.inputs],
        "runs": [
            {"scenario_id": x.scenario_id, "outcome": o.outcome.value, "message": o.message,
             "telemetry": {d: _telemetry_record(t) for d, t in o.telemetry.items()}}
            for x, o in zip(g.inputs, g.outputs)
        ],
        "clauses": [{"name": c.name, "holds": c.holds, "detail": c.detail} for c in g.clauses],
        "verdict": g.verdict.value,
        "reason": g.reason,
        "trace_files": [p.name for p in r.trace_files],
    }


def _machine(report: CampaignReport) -> str:
    doc = {
        "scenario_id": report.scenario_id,
        "relation_id": report.relation.id,
        "seed_policy": report.seed_policy,
        "tolerances": {"delta_d": report.tolerances.delta_d, "delta_t": report.tolerances.delta_t},
        "repeat_count": len(report.repeats),
        "verdict_counts": report.verdict_counts(),
        "exit_status": report.exit_status,
        "manoeuvre_histogram": {k: {str(a): f for a, f in h.items()}
                                for k, h in report.manoeuvre_histogram().items()},
        "groups": [group_record(r) for r in report.repeats],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_report(report: CampaignReport, format: str = "console") -> str:
    if format == "console":
        return _console(report)
    if format == "machine":
        return _machine(report)
    raise ValueError(f"report format must be 'console' or 'machine', got {format!r}")
