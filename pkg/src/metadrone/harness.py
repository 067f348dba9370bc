"""
Metamorphic relations, follow-up derivation and group execution.

A relation owns a deterministic follow-up transform and a predicate made of
named clauses. Predicates only read stored outputs, so a finished group can
be re-judged under other tolerances without flying it again.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .avoidance import AvoidanceConfig
from .geometry import WorldModel
from .lidar import LidarConfig
from .simulator import MissionPlan, RunOutcome, SimClock, Telemetry, TraceRow, run_mission


@dataclass(frozen=True)
class TestInput:
    scenario_id: str
    world: WorldModel
    plans: Tuple[MissionPlan, ...]
    avoidance: AvoidanceConfig = AvoidanceConfig()
    lidar: LidarConfig = LidarConfig()
    clock: SimClock = SimClock()
    seed: int = 0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "plans", tuple(self.plans))
        if not self.plans:
            raise ValueError("a test input needs at least one mission plan")
        if not self.avoidance.d0 > self.lidar.min_range:
            raise ValueError(
                f"d0 ({self.avoidance.d0}) must exceed the lidar min_range ({self.lidar.min_range})")

    def with_seed(self, seed: int) -> "TestInput":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class TestOutput:
    telemetry: Dict[str, Telemetry]
    outcome: RunOutcome
    message: str = ""
    trace: Tuple[TraceRow, ...] = field(default=(), compare=False, repr=False)

    __test__ = False


@dataclass(frozen=True)
class Tolerances:
    delta_d: float = 1.0
    delta_t: float = 10.0

    def __post_init__(self):
        if self.delta_d < 0 or self.delta_t < 0:
            raise ValueError("tolerances must be >= 0")


class Verdict(str, enum.Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


class Inconclusive(Exception):
    """The relation cannot judge outputs of runs that did not complete."""


class DuplicateRelationError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    name: str
    holds: bool
    detail: str = ""


Predicate = Callable[[Sequence[TestInput], Sequence[TestOutput], Tolerances], List[Clause]]


@dataclass(frozen=True)
class MetamorphicRelation:
    id: str
    derive_followups: Callable[[TestInput], List[TestInput]]
    predicate: Predicate
    tolerances: Tolerances = Tolerances()
    description: str = ""

    @property
    def label(self) -> str:
        """Console name: ``R1`` prints as ``MR 1``."""
        m = re.fullmatch(r"R(\d+)", self.id)
        return f"MR {m.group(1)}" if m else f"MR {self.id}"


@dataclass(frozen=True)
class MetamorphicGroup:
    relation_id: str
    inputs: Tuple[TestInput, ...]
    outputs: Tuple[TestOutput, ...]
    verdict: Verdict
    clauses: Tuple[Clause, ...] = ()
    reason: str = ""

    @property
    def failing(self) -> Tuple[Clause, ...]:
        return tuple(c for c in self.clauses if not c.holds)


# -- follow-up derivation ---------------------------------------------------

def derive_followup_reverse_path(source: TestInput) -> TestInput:
    """Fly every single-leg plan the other way round (A -> B becomes B -> A)."""
    plans = []
    for p in source.plans:
        if len(p.waypoints) != 1:
            raise ValueError(f"drone {p.drone_id!r}: reverse-path needs exactly one leg, "
                             f"plan has {len(p.waypoints)} waypoints")
        plans.append(replace(p, start_pad=p.waypoints[0], waypoints=(p.start_pad,)))
    return replace(source, scenario_id=_followup_id(source.scenario_id, "reverse"), plans=tuple(plans))


def _followup_id(sid: str, tag: str) -> str:
    suffix = "/" + tag
    return sid[: -len(suffix)] if sid.endswith(suffix) else sid + suffix


# -- clause combinators -----------------------------------------------------

def _drone_ids(outputs: Sequence[TestOutput]) -> List[str]:
    return list(outputs[0].telemetry)


def _run_name(i: int) -> str:
    return "source" if i == 0 else f"follow-up {i}"


def at_least(metric: str, bound: float):
    """Every run, every drone: ``metric >= bound``."""
    def clauses(inputs, outputs, tol):
        out = []
        for i, o in enumerate(outputs):
            for d, tel in o.telemetry.items():
                v = getattr(tel, metric)
                out.append(Clause(f"{metric}>={bound:g}", v >= bound, f"{_run_name(i)} {d}: {v:g}"))
        return out
    return clauses


def equal_to(metric: str, value: float):
    """Every run, every drone: ``metric == value``."""
    def clauses(inputs, outputs, tol):
        out = []
        for i, o in enumerate(outputs):
            for d, tel in o.telemetry.items():
                v = getattr(tel, metric)
                out.append(Clause(f"{metric}=={value:g}", v == value, f"{_run_name(i)} {d}: {v:g}"))
        return out
    return clauses


def within(metric: str, tolerance: str):
    """Per drone, each follow-up vs the source: ``|a - b| <= tol.<tolerance>``."""
    def clauses(inputs, outputs, tol):
        limit = getattr(tol, tolerance)
        out = []
        for i in range(1, len(outputs)):
            for d in _drone_ids(outputs):
                a = getattr(outputs[0].telemetry[d], metric)
                b = getattr(outputs[i].telemetry[d], metric)
                diff = abs(a - b)
                out.append(Clause(f"|d {metric}|<={tolerance}", diff <= limit,
                                  f"{d} {_run_name(i)}: |{a:.3f} - {b:.3f}| = {diff:.3f} (limit {limit:g})"))
        return out
    return clauses


def same(metric: str):
    """Per drone, each follow-up equals the source exactly."""
    def clauses(inputs, outputs, tol):
        out = []
        for i in range(1, len(outputs)):
            for d in _drone_ids(outputs):
                a = getattr(outputs[0].telemetry[d], metric)
                b = getattr(outputs[i].telemetry[d], metric)
                out.append(Clause(f"{metric} equal", a == b, f"{d} {_run_name(i)}: {a:g} vs {b:g}"))
        return out
    return clauses


def conjunction(*parts) -> Predicate:
    def predicate(inputs, outputs, tol):
        result = []
        for part in parts:
            result.extend(part(inputs, outputs, tol))
        return result
    return predicate


def judge(relation: MetamorphicRelation, inputs, outputs, tol: Optional[Tolerances] = None):
    """Evaluate a relation over stored outputs; returns ``(verdict, clauses, reason)``."""
    tol = tol or relation.tolerances
    bad = [(i, o) for i, o in enumerate(outputs) if o.outcome is not RunOutcome.COMPLETED]
    if bad:
        reason = "; ".join(f"{_run_name(i)} {o.outcome.value}: {o.message}" for i, o in bad)
        return Verdict.INCONCLUSIVE, (), reason
    clauses = tuple(relation.predicate(inputs, outputs, tol))
    ok = all(c.holds for c in clauses)
    return (Verdict.SATISFIED if ok else Verdict.VIOLATED), clauses, ""


# -- the two relations ------------------------------------------------------

def relation_R1(inputs: Sequence[TestInput], outputs: Sequence[TestOutput]) -> bool:
    """Both directions must perform at least one avoidance manoeuvre."""
    verdict, _, reason = judge(R1, inputs, outputs)
    if verdict is Verdict.INCONCLUSIVE:
        raise Inconclusive(reason)
    return verdict is Verdict.SATISFIED


def relation_R2(inputs: Sequence[TestInput], outputs: Sequence[TestOutput],
                tol: Tolerances = Tolerances()) -> bool:
    """Per drone: no avoidance at all, distance and time agree within tolerance."""
    verdict, _, reason = judge(R2, inputs, outputs, tol)
    if verdict is Verdict.INCONCLUSIVE:
        raise Inconclusive(reason)
    return verdict is Verdict.SATISFIED


def _reverse(source: TestInput) -> List[TestInput]:
    return [derive_followup_reverse_path(source)]


R1 = MetamorphicRelation(
    "R1", _reverse, conjunction(at_least("avoidance_count", 1)),
    description="obstacles, one drone, A->B vs B->A: avoidance fires in both directions")

R2 = MetamorphicRelation(
    "R2", _reverse,
    conjunction(equal_to("avoidance_count", 0),
                within("distance_travelled", "delta_d"),
                within("elapsed_time", "delta_t")),
    description="no obstacles, two drones on separate paths reversed: no avoidance, same d and t")

# deliberately weak: the two directions need not take the same path
R1_EQ = MetamorphicRelation(
    "R1-eq", _reverse, conjunction(same("avoidance_count")),
    description="R1 alteration demanding equal manoeuvre counts in both directions")


# -- execution --------------------------------------------------------------

def simulate(test: TestInput) -> TestOutput:
    res = run_mission(test.plans, test.world, test.avoidance, test.lidar, test.clock, test.seed)
    return TestOutput(res.telemetry, res.outcome, res.message, tuple(res.trace))


def execute_group(
    relation: MetamorphicRelation,
    source: TestInput,
    runner: Callable[[TestInput], TestOutput] = simulate,
    tolerances: Optional[Tolerances] = None,
) -> MetamorphicGroup:
    inputs = [source] + list(relation.derive_followups(source))
    outputs = [runner(x) for x in inputs]
    verdict, clauses, reason = judge(relation, inputs, outputs, tolerances)
    return MetamorphicGroup(relation.id, tuple(inputs), tuple(outputs), verdict, clauses, reason)


def rejudge(group: MetamorphicGroup, relation: MetamorphicRelation,
            tolerances: Optional[Tolerances] = None) -> MetamorphicGroup:
    verdict, clauses, reason = judge(relation, group.inputs, group.outputs, tolerances)
    return replace(group, verdict=verdict, clauses=clauses, reason=reason)


class RelationRegistry:
    def __init__(self, relations: Sequence[MetamorphicRelation] = ()):
        self._relations: Dict[str, MetamorphicRelation] = {}
        for r in relations:
            self.register(r)

    def register(self, relation: MetamorphicRelation) -> MetamorphicRelation:
        if relation.id in self._relations:
            raise DuplicateRelationError(f"relation {relation.id!r} is already registered")
        self._relations[relation.id] = relation
        return relation

    def get(self, relation_id: str) -> MetamorphicRelation:
        try:
            return self._relations[relation_id]
        except KeyError:
            raise KeyError(f"unknown relation {relation_id!r}; known: {', '.join(self.ids())}") from None

    def ids(self) -> List[str]:
        return list(self._relations)

    def __contains__(self, relation_id: str) -> bool:
        return relation_id in self._relations

    def __iter__(self):
        return iter(self._relations.values())


def default_registry() -> RelationRegistry:
    return RelationRegistry([R1, R2, R1_EQ])


REGISTRY = default_registry()


def register_relation(relation: MetamorphicRelation, registry: RelationRegistry = REGISTRY):
    return registry.register(relation)
