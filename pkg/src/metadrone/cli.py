"""Command line entry point: ``metadrone run | list-relations | validate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .campaign import EXIT_USAGE, SEED_POLICIES, run_campaign
from .harness import REGISTRY, Tolerances
from .report import emit_report
from .scenario import ScenarioError, bundled_scenarios, load_scenario, resolve_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metadrone", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a metamorphic test campaign")
    run.add_argument("--scenario", required=True,
                     help="scenario file, or the name of a bundled scenario")
    run.add_argument("--relation", help="relation id (default: the scenario's selection)")
    run.add_argument("--repeats", type=int, default=1)
    run.add_argument("--seed", type=int, help="base seed (default: the scenario's seed)")
    run.add_argument("--seed-policy", choices=SEED_POLICIES, default="fixed")
    run.add_argument("--trace-dir", type=Path, help="write one CSV trace per run here")
    run.add_argument("--report", choices=("console", "machine"), default="console")
    run.add_argument("--delta-d", type=float, help="override the distance tolerance, metres")
    run.add_argument("--delta-t", type=float, help="override the time tolerance, seconds")
    run.add_argument("--figures", action="store_true",
                     help="also render PNG figures into --trace-dir")

    sub.add_parser("list-relations", help="list registered relations")
    sub.add_parser("list-scenarios", help="list bundled scenarios")

    val = sub.add_parser("validate", help="parse and validate a scenario without running it")
    val.add_argument("--scenario", required=True)
    return parser


def _run(args) -> int:
    scenario = load_scenario(resolve_scenario(args.scenario))
    test = scenario.test_input
    if args.seed is not None:
        test = test.with_seed(args.seed)
    relation = REGISTRY.get(args.relation or scenario.relation.id)
    tol = scenario.relation.tolerances
    tol = Tolerances(tol.delta_d if args.delta_d is None else args.delta_d,
                     tol.delta_t if args.delta_t is None else args.delta_t)
    if args.repeats < 1:
        raise ValueError("--repeats must be >= 1")
    if args.figures and args.trace_dir is None:
        raise ValueError("--figures needs --trace-dir")
    report = run_campaign(test, relation, args.repeats, args.seed_policy, args.trace_dir, tol)
    sys.stdout.write(emit_report(report, args.report))
    if args.figures:
        from .plotting import render_campaign_figures

        for p in render_campaign_figures(report, args.trace_dir):
            print(f"figure: {p}", file=sys.stderr)
    return report.exit_status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        if args.command == "list-relations":
            for rel in REGISTRY:
                print(f"{rel.id}\t{rel.description}")
            return 0
        if args.command == "list-scenarios":
            print("\n".join(bundled_scenarios()))
            return 0
        if args.command == "validate":
            scenario = load_scenario(resolve_scenario(args.scenario))
            t = scenario.test_input
            print(f"{t.scenario_id}: ok ({len(t.plans)} drone(s), {len(t.world.obstacles)} obstacle(s), "
                  f"relation {scenario.relation.id})")
            return 0
        return _run(args)
    except (ScenarioError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
