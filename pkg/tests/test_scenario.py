import copy
import json

import pytest

from metadrone.scenario import (PARAMETER_DEFAULTS, ScenarioError, bundled_path, bundled_scenarios,
                                load_scenario, parse_scenario, save_scenario)

MINIMAL = {
    "scenario_id": "mini",
    "seed": 4,
    "world": {
        "bounds": [-10, -10, 110, 10],
        "pads": {"A": {"position": [0, 0], "color": "green"}, "B": {"position": [100, 0], "color": "red"}},
        "obstacles": [{"id": "box", "polygon": [[48, -3], [52, -3], [52, 3], [48, 3]], "height": [0, 5]}],
    },
    "drones": [{"id": "d1", "start_pad": "A", "waypoints": ["B"]}],
    "relation": {"id": "R1"},
}


def _doc(**edits):
    d = copy.deepcopy(MINIMAL)
    for path, value in edits.items():
        node = d
        keys = path.split("__")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return d


def test_bundled_r1_scenario_loads():
    sc = load_scenario(bundled_path("r1_obstacle_course"))
    t = sc.test_input
    assert len(t.plans) == 1
    plan = t.plans[0]
    assert plan.start_pad == (0.0, 0.0) and plan.waypoints == ((100.0, 0.0),)
    assert len(t.world.obstacles) >= 1
    assert t.avoidance.d0 == 10.0 and t.avoidance.cruise_speed == 1.0
    assert sc.relation.id == "R1"


def test_every_bundled_scenario_parses():
    names = bundled_scenarios()
    assert {"r1_obstacle_course", "r2_parallel", "head_on", "low_wall_visible"} <= set(names)
    for n in names:
        assert load_scenario(bundled_path(n)).test_input.scenario_id == n


def test_defaults_applied():
    t = parse_scenario(MINIMAL).test_input
    assert t.lidar.ray_count == PARAMETER_DEFAULTS["lidar_ray_count"]
    assert t.plans[0].waypoint_tolerance == 0.5 and t.plans[0].takeoff_altitude == 2.0
    assert t.clock.dt == 0.1 and t.seed == 4


def test_threshold_not_above_min_range_is_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario(_doc(parameters={"d0": 0.35}))


def test_unknown_key_is_named():
    with pytest.raises(ScenarioError, match="velocty"):
        parse_scenario(_doc(parameters={"velocty": 2.0}))
    with pytest.raises(ScenarioError, match="colour"):
        parse_scenario(_doc(world__pads__A={"position": [0, 0], "colour": "green"}))


def test_missing_pad_reference():
    with pytest.raises(ScenarioError, match="C"):
        parse_scenario(_doc(drones=[{"id": "d1", "start_pad": "A", "waypoints": ["C"]}]))


def test_bad_values():
    for bad in ({"cruise_speed": -1}, {"lidar_ray_count": 2.5}, {"dt": "fast"},
                {"suspend_pursuit_during_avoidance": 1}):
        with pytest.raises(ScenarioError):
            parse_scenario(_doc(parameters=bad))
    with pytest.raises(ScenarioError):
        parse_scenario(_doc(world__obstacles=[{"id": "x", "polygon": [[0, 0], [0, 1], [1, 1]], "height": [0, 2]}]))


def test_json_syntax_error_has_location(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{\n  "scenario_id": "x",\n  oops\n}')
    with pytest.raises(ScenarioError, match=r"broken\.json:3:"):
        load_scenario(p)


def test_round_trip(tmp_path):
    for name in ("r1_obstacle_course", "r2_parallel", "low_wall_hidden"):
        a = load_scenario(bundled_path(name))
        p = tmp_path / f"{name}.json"
        save_scenario(a, p)
        b = load_scenario(p)
        assert b.test_input == a.test_input
        assert b.relation == a.relation
        json.loads(p.read_text())
