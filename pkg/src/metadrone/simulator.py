"""
Discrete-time kinematic mission execution for one or more drones.

Each tick every drone senses a snapshot of the previous tick (static world
plus the other drones), computes a potential-field command and integrates
it with an explicit Euler step. Telemetry is sampled on a fixed period and
at phase events (takeoff complete, waypoint reached, landed).
"""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .avoidance import AvoidanceConfig, VelocityCommand, command
from .geometry import Point, Pose, WorldModel, shortest_path_length
from .lidar import DRONE_HALF_HEIGHT, LidarConfig, scan

# upper bound on the seeded command perturbation, m/s
SYMMETRY_JITTER = 1e-3


class Phase(str, enum.Enum):
    GROUNDED = "Grounded"
    TAKING_OFF = "TakingOff"
    ENROUTE = "Enroute"
    LANDING = "Landing"
    LANDED = "Landed"


class RunOutcome(str, enum.Enum):
    COMPLETED = "Completed"
    TIMEOUT = "Timeout"
    COLLISION_FAULT = "CollisionFault"


@dataclass(frozen=True)
class MissionPlan:
    drone_id: str
    start_pad: Point
    waypoints: Tuple[Point, ...]
    takeoff_altitude: float = 2.0
    waypoint_tolerance: float = 0.5
    body_radius: float = 0.5
    delay_at_waypoint: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "start_pad", (float(self.start_pad[0]), float(self.start_pad[1])))
        object.__setattr__(self, "waypoints", tuple((float(w[0]), float(w[1])) for w in self.waypoints))
        if not self.waypoints:
            raise ValueError(f"drone {self.drone_id!r}: waypoints must be non-empty")
        if not self.takeoff_altitude > 0:
            raise ValueError(f"drone {self.drone_id!r}: takeoff_altitude must be > 0")
        if not self.waypoint_tolerance > 0:
            raise ValueError(f"drone {self.drone_id!r}: waypoint_tolerance must be > 0")
        if not self.body_radius > 0:
            raise ValueError(f"drone {self.drone_id!r}: body_radius must be > 0")
        if self.delay_at_waypoint < 0:
            raise ValueError(f"drone {self.drone_id!r}: delay_at_waypoint must be >= 0")


@dataclass(frozen=True)
class SimClock:
    dt: float = 0.1
    telemetry_sample_period: float = 1.0
    max_sim_time: float = 3600.0
    sim_time: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.telemetry_sample_period < self.dt:
            raise ValueError("telemetry_sample_period must be >= dt")
        ratio = self.telemetry_sample_period / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError("telemetry_sample_period must be a whole number of ticks")
        if not self.max_sim_time > 0:
            raise ValueError("max_sim_time must be > 0")

    @property
    def tick(self) -> int:
        return int(round(self.sim_time / self.dt))

    @property
    def ticks_per_sample(self) -> int:
        return int(round(self.telemetry_sample_period / self.dt))

    def advanced(self) -> "SimClock":
        # time from the tick counter, so it never accumulates rounding drift
        return replace(self, sim_time=(self.tick + 1) * self.dt)


@dataclass(frozen=True)
class DroneState:
    drone_id: str
    pose: Pose
    phase: Phase = Phase.GROUNDED
    waypoint_index: int = 0
    body_radius: float = 0.5
    hold_elapsed: Optional[float] = None

    @classmethod
    def initial(cls, plan: MissionPlan) -> "DroneState":
        x, y = plan.start_pad
        return cls(plan.drone_id, Pose(x, y, 0.0, 0.0), body_radius=plan.body_radius)


@dataclass(frozen=True)
class TickRecord:
    sim_time: float
    drone_id: str
    x: float
    y: float
    z: float
    vx: float
    vy: float
    phase: Phase
    waypoint_index: int
    avoidance_active: bool
    event: Optional[str] = None


@dataclass(frozen=True)
class TraceRow:
    """One telemetry sample; column order matches the trace file header."""

    sim_time: float
    drone_id: str
    x: float
    y: float
    z: float
    vx: float
    vy: float
    phase: str
    avoidance_active: bool
    cumulative_distance: float
    maneuver_count: int


@dataclass(frozen=True)
class LegTelemetry:
    index: int
    waypoint: Point
    shortest_path: float
    distance_travelled: float
    elapsed_time: float
    avoidance_count: int


@dataclass(frozen=True)
class Telemetry:
    drone_id: str
    distance_travelled: float
    elapsed_time: float
    avoidance_count: int
    legs: Tuple[LegTelemetry, ...] = ()
    takeoff_time: float = 0.0
    landing_time: float = 0.0

    @property
    def shortest_path(self) -> Tuple[float, ...]:
        return tuple(leg.shortest_path for leg in self.legs)


class CollisionFault(Exception):
    """Two drones touched, or a drone entered an obstacle it should have seen."""

    def __init__(self, message: str, states=None, records=None, clock=None):
        super().__init__(message)
        self.states = states
        self.records = records
        self.clock = clock


@dataclass
class MissionResult:
    outcome: RunOutcome
    telemetry: Dict[str, Telemetry]
    trace: List[TraceRow]
    message: str = ""


def count_avoidance_manoeuvres(samples: Sequence[bool]) -> int:
    """Rising edges of the sampled avoidance flag."""
    count, prev = 0, False
    for s in samples:
        s = bool(s)
        if s and not prev:
            count += 1
        prev = s
    return count


def accumulate_distance(positions: Sequence[Sequence[float]]) -> float:
    p = np.asarray(positions, dtype=float)
    if len(p) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(p, axis=0), axis=1)))


def _drone_rng(seed: int, drone_id: str, tick: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(drone_id.encode()), tick])


def _perturb(cmd: VelocityCommand, rng: np.random.Generator) -> Tuple[float, float]:
    speed = cmd.speed
    if speed > 0.0:
        phi = rng.uniform(-1.0, 1.0) * min(SYMMETRY_JITTER / speed, 1.0)
        c, s = math.cos(phi), math.sin(phi)
        return (c * cmd.vx - s * cmd.vy, s * cmd.vx + c * cmd.vy)
    beta = rng.uniform(0.0, 2.0 * math.pi)
    m = SYMMETRY_JITTER * rng.uniform(0.0, 1.0)
    return (m * math.cos(beta), m * math.sin(beta))


def _heading(vx: float, vy: float, psi: float) -> float:
    if vx * vx + vy * vy < 1e-18:
        return psi
    return math.degrees(math.atan2(vy, vx))


def _advance_waypoint(state: DroneState, plan: MissionPlan) -> DroneState:
    nxt = state.waypoint_index + 1
    if nxt < len(plan.waypoints):
        return replace(state, waypoint_index=nxt, hold_elapsed=None)
    return replace(state, phase=Phase.LANDING, hold_elapsed=None)


def _step_one(
    state: DroneState,
    plan: MissionPlan,
    others: List[Tuple[Pose, float]],
    world: WorldModel,
    avoid: AvoidanceConfig,
    lidar: LidarConfig,
    clock: SimClock,
    seed: int,
) -> Tuple[DroneState, TickRecord]:
    dt = clock.dt
    t = clock.sim_time + dt
    p = state.pose
    vx = vy = 0.0
    active = False
    event = None

    if state.phase is Phase.GROUNDED:
        state = replace(state, phase=Phase.TAKING_OFF)

    phase = state.phase
    if phase is Phase.LANDED:
        pass
    elif phase in (Phase.TAKING_OFF, Phase.LANDING):
        # vertical phases: only repel, and only clear of the ground
        cmd = None
        if p.z >= 0.5 * plan.takeoff_altitude:
            cmd = command(p, None, scan(p, world, others, lidar), avoid)
            active = cmd.avoidance_active
        if active:
            vx, vy = _perturb(cmd, _drone_rng(seed, state.drone_id, clock.tick))
            p = Pose(p.x + vx * dt, p.y + vy * dt, p.z, _heading(vx, vy, p.psi))
        elif phase is Phase.TAKING_OFF:
            z = min(plan.takeoff_altitude, p.z + avoid.cruise_speed * dt)
            p = replace(p, z=z)
            if z >= plan.takeoff_altitude:
                state = replace(state, phase=Phase.ENROUTE, waypoint_index=0)
                event = "takeoff_complete"
        else:
            z = max(0.0, p.z - avoid.cruise_speed * dt)
            p = replace(p, z=z)
            if z <= 0.0:
                state = replace(state, phase=Phase.LANDED)
                event = "landed"
    else:  # enroute
        wp = plan.waypoints[state.waypoint_index]
        if state.hold_elapsed is not None:
            held = state.hold_elapsed + dt
            if held >= plan.delay_at_waypoint - 1e-9:
                event = f"waypoint_{state.waypoint_index}"
                state = _advance_waypoint(state, plan)
            else:
                state = replace(state, hold_elapsed=held)
        else:
            cmd = command(p, wp, scan(p, world, others, lidar), avoid)
            active = cmd.avoidance_active
            vx, vy = cmd.vx, cmd.vy
            if active:
                vx, vy = _perturb(cmd, _drone_rng(seed, state.drone_id, clock.tick))
            p = Pose(p.x + vx * dt, p.y + vy * dt, p.z, _heading(vx, vy, p.psi))
            if shortest_path_length(p.xy, wp) < plan.waypoint_tolerance:
                if plan.delay_at_waypoint > 0:
                    state = replace(state, hold_elapsed=0.0)
                else:
                    event = f"waypoint_{state.waypoint_index}"
                    state = _advance_waypoint(state, plan)

    new_state = replace(state, pose=p)
    rec = TickRecord(t, state.drone_id, p.x, p.y, p.z, vx, vy, new_state.phase,
                     new_state.waypoint_index, active, event)
    return new_state, rec


def check_collisions(states: Sequence[DroneState], world: WorldModel) -> Optional[str]:
    for s in states:
        p = s.pose
        for o in world.visible_at(p.z):
            if o.footprint.contains(p.x, p.y):
                return f"drone {s.drone_id} entered obstacle {o.id} at ({p.x:.3f}, {p.y:.3f})"
    for i in range(len(states)):
        a = states[i]
        for b in states[i + 1:]:
            if abs(a.pose.z - b.pose.z) >= 2 * DRONE_HALF_HEIGHT:
                continue
            sep = math.hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y)
            if sep < a.body_radius + b.body_radius:
                return f"drones {a.drone_id} and {b.drone_id} collided (separation {sep:.3f} m)"
    return None


def step(
    states: Sequence[DroneState],
    plans: Sequence[MissionPlan],
    world: WorldModel,
    avoid: AvoidanceConfig,
    lidar: LidarConfig,
    clock: SimClock,
    seed: int,
) -> Tuple[List[DroneState], List[TickRecord], SimClock]:
    """Advance every drone by one tick.

    Raises ``CollisionFault`` (carrying the post-tick states) when avoidance
    failed this tick.
    """
    if [s.drone_id for s in states] != [p.drone_id for p in plans]:
        raise ValueError("states and plans must be aligned by drone_id")
    snapshot = [(s.pose, s.body_radius) for s in states]
    new_states, records = [], []
    for i, (state, plan) in enumerate(zip(states, plans)):
        others = [snapshot[j] for j in range(len(states)) if j != i]
        ns, rec = _step_one(state, plan, others, world, avoid, lidar, clock, seed)
        new_states.append(ns)
        records.append(rec)
    new_clock = clock.advanced()
    msg = check_collisions(new_states, world)
    if msg:
        raise CollisionFault(msg, new_states, records, new_clock)
    return new_states, records, new_clock


@dataclass
class _Sampler:
    """Per-drone telemetry bookkeeping."""

    plan: MissionPlan
    rows: List[TraceRow] = field(default_factory=list)
    positions: List[Tuple[float, float, float]] = field(default_factory=list)
    flags: List[bool] = field(default_factory=list)
    distance: float = 0.0
    manoeuvres: int = 0
    legs: List[LegTelemetry] = field(default_factory=list)
    leg_start: Optional[Tuple[float, float, int, Point]] = None
    takeoff_time: float = 0.0
    landing_start: Optional[float] = None
    landed_at: Optional[float] = None

    def sample(self, r: TickRecord) -> None:
        pos = (r.x, r.y, r.z)
        if self.positions:
            px, py, pz = self.positions[-1]
            self.distance += math.sqrt((r.x - px) ** 2 + (r.y - py) ** 2 + (r.z - pz) ** 2)
        if r.avoidance_active and not (self.flags and self.flags[-1]):
            self.manoeuvres += 1
        self.positions.append(pos)
        self.flags.append(r.avoidance_active)
        self.rows.append(TraceRow(r.sim_time, r.drone_id, r.x, r.y, r.z, r.vx, r.vy, r.phase.value,
                                  r.avoidance_active, self.distance, self.manoeuvres))
        self._on_event(r)

    def _on_event(self, r: TickRecord) -> None:
        if r.event is None:
            return
        here = (r.x, r.y)
        if r.event == "takeoff_complete":
            self.takeoff_time = r.sim_time
            self.leg_start = (r.sim_time, self.distance, self.manoeuvres, here)
        elif r.event.startswith("waypoint_"):
            i = int(r.event.split("_")[1])
            t0, d0, m0, start = self.leg_start
            wp = self.plan.waypoints[i]
            self.legs.append(LegTelemetry(i, wp, shortest_path_length(start, wp), self.distance - d0,
                                          r.sim_time - t0, self.manoeuvres - m0))
            self.leg_start = (r.sim_time, self.distance, self.manoeuvres, here)
            if r.phase is Phase.LANDING:
                self.landing_start = r.sim_time
        elif r.event == "landed":
            self.landed_at = r.sim_time

    def telemetry(self, end_time: float) -> Telemetry:
        elapsed = self.landed_at if self.landed_at is not None else end_time
        landing = 0.0
        if self.landing_start is not None:
            landing = elapsed - self.landing_start
        return Telemetry(self.plan.drone_id, self.distance, elapsed, self.manoeuvres,
                         tuple(self.legs), self.takeoff_time, landing)


def run_mission(
    plans: Sequence[MissionPlan],
    world: WorldModel,
    avoid: AvoidanceConfig,
    lidar: LidarConfig,
    clock: SimClock,
    seed: int,
) -> MissionResult:
    """Fly every plan until all drones have landed or the clock runs out."""
    ids = [p.drone_id for p in plans]
    if len(set(ids)) != len(ids):
        raise ValueError("drone ids must be unique")
    states = [DroneState.initial(p) for p in plans]
    samplers = {p.drone_id: _Sampler(p) for p in plans}
    for s in states:
        p = s.pose
        samplers[s.drone_id].sample(TickRecord(clock.sim_time, s.drone_id, p.x, p.y, p.z, 0.0, 0.0,
                                               s.phase, 0, False))
    tps = clock.ticks_per_sample
    outcome, message = RunOutcome.COMPLETED, ""

    while True:
        if all(s.phase is Phase.LANDED for s in states):
            break
        if clock.sim_time >= clock.max_sim_time - 1e-9:
            outcome, message = RunOutcome.TIMEOUT, f"max_sim_time {clock.max_sim_time:g} s reached"
            break
        try:
            states, records, clock = step(states, plans, world, avoid, lidar, clock, seed)
        except CollisionFault as fault:
            states, records, clock = fault.states, fault.records, fault.clock
            for r in records:
                samplers[r.drone_id].sample(r)
            outcome, message = RunOutcome.COLLISION_FAULT, str(fault)
            break
        periodic = clock.tick % tps == 0
        for r in records:
            smp = samplers[r.drone_id]
            if smp.landed_at is not None:
                continue
            if periodic or r.event is not None:
                smp.sample(r)

    if outcome is not RunOutcome.COMPLETED:
        # close every open series with the final pose
        for s, smp in zip(states, samplers.values()):
            last = smp.rows[-1]
            if smp.landed_at is None and last.sim_time < clock.sim_time:
                p = s.pose
                smp.sample(TickRecord(clock.sim_time, s.drone_id, p.x, p.y, p.z, 0.0, 0.0, s.phase,
                                      s.waypoint_index, False))

    trace = sorted((row for smp in samplers.values() for row in smp.rows),
                   key=lambda r: (r.sim_time, ids.index(r.drone_id)))
    telemetry = {i: samplers[i].telemetry(clock.sim_time) for i in ids}
    return MissionResult(outcome, telemetry, trace, message)
