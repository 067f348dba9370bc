"""
Scenario files: JSON documents describing world, drones, parameters,
relation selection and seed.

Parsing is strict. Unknown keys are errors, because a misspelt parameter
quietly falling back to its default would corrupt every relation verdict.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Union

from .avoidance import AvoidanceConfig
from .geometry import Circle, ConvexPolygon, Obstacle, Pad, WorldModel
from .harness import TestInput, Tolerances
from .lidar import LidarConfig
from .simulator import MissionPlan, SimClock

PARAMETER_DEFAULTS: Dict[str, Any] = {
    "cruise_speed": 1.0,
    "d0": 10.0,
    "k_obst": 1.0,
    "lidar_min_range": 0.35,
    "lidar_max_range": 30.0,
    "lidar_ray_count": 360,
    "takeoff_altitude": 2.0,
    "waypoint_tolerance": 0.5,
    "dt": 0.1,
    "telemetry_sample_period": 1.0,
    "max_sim_time": 3600.0,
    "suspend_pursuit_during_avoidance": True,
    "delay_at_waypoint": 0.0,
}

_TOP_KEYS = {"scenario_id", "description", "seed", "world", "drones", "parameters", "relation"}
_WORLD_KEYS = {"bounds", "pads", "obstacles"}
_PAD_KEYS = {"position", "color"}
_OBSTACLE_KEYS = {"id", "circle", "polygon", "height"}
_CIRCLE_KEYS = {"center", "radius"}
_DRONE_KEYS = {"id", "start_pad", "waypoints", "body_radius", "delay_at_waypoint"}
_RELATION_KEYS = {"id", "delta_d", "delta_t"}


class ScenarioError(ValueError):
    """Scenario file could not be parsed or failed validation."""


@dataclass(frozen=True)
class RelationSelection:
    id: str = "R1"
    tolerances: Tolerances = Tolerances()


@dataclass(frozen=True)
class Scenario:
    test_input: TestInput
    relation: RelationSelection
    description: str = ""


def _check_keys(d: Any, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: expected an object, got {type(d).__name__}")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(repr(k) for k in unknown)}")


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return d[key]


def _point(v, where: str):
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ScenarioError(f"{where}: expected [x, y], got {v!r}")
    return (float(v[0]), float(v[1]))


def _number(v, where: str, integer: bool = False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ScenarioError(f"{where}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _build(where: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_world(d: dict) -> WorldModel:
    _check_keys(d, _WORLD_KEYS, "world")
    pads = {}
    for name, spec in d.get("pads", {}).items():
        where = f"world.pads.{name}"
        _check_keys(spec, _PAD_KEYS, where)
        pads[name] = _build(where, Pad, name, _point(_require(spec, "position", where), where + ".position"),
                            spec.get("color", "green"))
    obstacles = []
    for i, spec in enumerate(d.get("obstacles", [])):
        where = f"world.obstacles[{i}]"
        _check_keys(spec, _OBSTACLE_KEYS, where)
        oid = str(_require(spec, "id", where))
        where = f"world.obstacles[{oid}]"
        if ("circle" in spec) == ("polygon" in spec):
            raise ScenarioError(f"{where}: define exactly one of 'circle' or 'polygon'")
        if "circle" in spec:
            c = spec["circle"]
            _check_keys(c, _CIRCLE_KEYS, where + ".circle")
            fp = _build(where, Circle, _point(_require(c, "center", where), where + ".center"),
                        _number(_require(c, "radius", where), where + ".radius"))
        else:
            verts = tuple(_point(v, f"{where}.polygon[{j}]") for j, v in enumerate(spec["polygon"]))
            fp = _build(where, ConvexPolygon, verts)
        h = _require(spec, "height", where)
        if not isinstance(h, list) or len(h) != 2:
            raise ScenarioError(f"{where}.height: expected [z_min, z_max]")
        obstacles.append(_build(where, Obstacle, oid, fp, _number(h[0], where + ".height"),
                                _number(h[1], where + ".height")))
    bounds = _require(d, "bounds", "world")
    if not isinstance(bounds, list) or len(bounds) != 4:
        raise ScenarioError("world.bounds: expected [xmin, ymin, xmax, ymax]")
    bounds = tuple(_number(b, "world.bounds") for b in bounds)
    return _build("world", WorldModel, tuple(obstacles), pads, bounds)


def _target(v, world: WorldModel, where: str):
    if isinstance(v, str):
        if v not in world.pads:
            raise ScenarioError(f"{where}: unknown pad {v!r}")
        return world.pads[v].position
    return _point(v, where)


def _parse_parameters(d: dict) -> Dict[str, Any]:
    _check_keys(d, set(PARAMETER_DEFAULTS), "parameters")
    params = dict(PARAMETER_DEFAULTS)
    for k, v in d.items():
        where = f"parameters.{k}"
        if k == "suspend_pursuit_during_avoidance":
            if not isinstance(v, bool):
                raise ScenarioError(f"{where}: expected true or false, got {v!r}")
            params[k] = v
        else:
            params[k] = _number(v, where, integer=(k == "lidar_ray_count"))
    return params


def parse_scenario(doc: dict) -> Scenario:
    _check_keys(doc, _TOP_KEYS, "scenario")
    sid = str(_require(doc, "scenario_id", "scenario"))
    world = _parse_world(_require(doc, "world", "scenario"))
    params = _parse_parameters(doc.get("parameters", {}))

    drones = _require(doc, "drones", "scenario")
    if not isinstance(drones, list) or not drones:
        raise ScenarioError("drones: expected a non-empty list")
    plans: List[MissionPlan] = []
    for i, spec in enumerate(drones):
        where = f"drones[{i}]"
        _check_keys(spec, _DRONE_KEYS, where)
        did = str(_require(spec, "id", where))
        where = f"drones[{did}]"
        start = _target(_require(spec, "start_pad", where), world, where + ".start_pad")
        wps = _require(spec, "waypoints", where)
        if not isinstance(wps, list):
            raise ScenarioError(f"{where}.waypoints: expected a list")
        waypoints = tuple(_target(w, world, f"{where}.waypoints[{j}]") for j, w in enumerate(wps))
        plans.append(_build(
            where, MissionPlan, did, start, waypoints,
            takeoff_altitude=params["takeoff_altitude"],
            waypoint_tolerance=params["waypoint_tolerance"],
            body_radius=_number(spec.get("body_radius", 0.5), where + ".body_radius"),
            delay_at_waypoint=_number(spec.get("delay_at_waypoint", params["delay_at_waypoint"]),
                                      where + ".delay_at_waypoint"),
        ))
    ids = [p.drone_id for p in plans]
    if len(set(ids)) != len(ids):
        raise ScenarioError("drones: ids must be unique")

    avoidance = _build("parameters", AvoidanceConfig, params["k_obst"], params["d0"], params["cruise_speed"],
                       params["suspend_pursuit_during_avoidance"])
    lidar = _build("parameters", LidarConfig, params["lidar_ray_count"], params["lidar_min_range"],
                   params["lidar_max_range"])
    clock = _build("parameters", SimClock, params["dt"], params["telemetry_sample_period"],
                   params["max_sim_time"])
    seed = _number(doc.get("seed", 0), "seed", integer=True)
    test = _build("parameters", TestInput, sid, world, tuple(plans), avoidance, lidar, clock, seed)

    rel = doc.get("relation", {})
    _check_keys(rel, _RELATION_KEYS, "relation")
    tol = _build("relation", Tolerances, _number(rel.get("delta_d", 1.0), "relation.delta_d"),
                 _number(rel.get("delta_t", 10.0), "relation.delta_t"))
    selection = RelationSelection(str(rel.get("id", "R1")), tol)
    return Scenario(test, selection, str(doc.get("description", "")))


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_scenario(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def scenario_to_dict(scenario: Scenario) -> dict:
    t = scenario.test_input
    w = t.world
    obstacles = []
    for o in w.obstacles:
        entry = {"id": o.id}
        entry.update(o.footprint.to_dict())
        entry["height"] = [o.z_min, o.z_max]
        obstacles.append(entry)
    first = t.plans[0]
    params = {
        "cruise_speed": t.avoidance.cruise_speed,
        "d0": t.avoidance.d0,
        "k_obst": t.avoidance.k_obst,
        "lidar_min_range": t.lidar.min_range,
        "lidar_max_range": t.lidar.max_range,
        "lidar_ray_count": t.lidar.ray_count,
        "takeoff_altitude": first.takeoff_altitude,
        "waypoint_tolerance": first.waypoint_tolerance,
        "dt": t.clock.dt,
        "telemetry_sample_period": t.clock.telemetry_sample_period,
        "max_sim_time": t.clock.max_sim_time,
        "suspend_pursuit_during_avoidance": t.avoidance.suspend_pursuit_during_avoidance,
    }
    doc = {
        "scenario_id": t.scenario_id,
        "seed": t.seed,
        "world": {
            "bounds": list(w.bounds),
            "pads": {k: {"position": list(p.position), "color": p.color} for k, p in w.pads.items()},
            "obstacles": obstacles,
        },
        "drones": [
            {"id": p.drone_id, "start_pad": list(p.start_pad), "waypoints": [list(x) for x in p.waypoints],
             "body_radius": p.body_radius, "delay_at_waypoint": p.delay_at_waypoint}
            for p in t.plans
        ],
        "parameters": params,
        "relation": {"id": scenario.relation.id, "delta_d": scenario.relation.tolerances.delta_d,
                     "delta_t": scenario.relation.tolerances.delta_t},
    }
    if scenario.description:
        doc["description"] = scenario.description
    return doc


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    for p in scenario.test_input.plans[1:]:
        first = scenario.test_input.plans[0]
        if (p.takeoff_altitude, p.waypoint_tolerance) != (first.takeoff_altitude, first.waypoint_tolerance):
            raise ScenarioError("takeoff_altitude and waypoint_tolerance must be shared by all drones")
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def bundled_scenarios() -> List[str]:
    root = resources.files("metadrone") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_path(name: str) -> Path:
    """Path to a scenario shipped with the package, by stem (e.g. ``r1_obstacle_course``)."""
    p = Path(str(resources.files("metadrone") / "scenarios" / f"{name}.json"))
    if not p.exists():
        raise ScenarioError(f"no bundled scenario {name!r}; available: {', '.join(bundled_scenarios())}")
    return p


def resolve_scenario(ref: str) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    p = Path(ref)
    if p.exists() or ref.endswith(".json") or "/" in ref:
        return p
    return bundled_path(ref)
