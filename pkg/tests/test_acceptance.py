"""End-to-end acceptance checks, one test (or small group) per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from conftest import bundled, random_world
from oracles import march
from metadrone.avoidance import AvoidanceConfig, repulsive_force, repulsive_potential
from metadrone.campaign import run_campaign
from metadrone.geometry import Ray, ray_cast
from metadrone.harness import R1, R2, REGISTRY, Verdict, simulate
from metadrone.lidar import LidarScan, ray_directions
from metadrone.report import emit_report
from metadrone.simulator import RunOutcome

REPEATS = 15


def criterion(cid, title):
    return pytest.mark.criterion(cid, title)


@pytest.fixture(scope="module")
def r1_campaign():
    t0 = time.perf_counter()
    report = run_campaign(bundled("r1_obstacle_course").test_input, R1, REPEATS, "incrementing")
    return report, time.perf_counter() - t0


@criterion(1, "repulsive potential exact on a grid, continuous at d0, strictly decreasing below d0")
def test_potential_exactness():
    t0 = time.perf_counter()
    worst = 0.0
    for k in (0.01, 0.5, 1.0, 3.0, 25.0):
        for d0 in (0.5, 2.0, 10.0, 12.0, 30.0):
            for d in np.linspace(0.36, 40.0, 400):
                d = float(d)
                want = 0.5 * k * (1 / d - 1 / d0) ** 2 if d < d0 else 0.0
                got = repulsive_potential(d, k, d0)
                if want == 0.0:
                    assert got == 0.0
                else:
                    worst = max(worst, abs(got - want) / want)
            assert repulsive_potential(d0, k, d0) == 0.0
            ds = np.linspace(0.35, d0, 300, endpoint=False)
            u = np.array([repulsive_potential(float(x), k, d0) for x in ds])
            assert np.all(np.diff(u) < 0)
    assert worst <= 1e-12
    assert time.perf_counter() - t0 < 1.0


def _summed_potential(p, pts, k, d0):
    d = np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1])
    d = d[d < d0]
    return float(np.sum(0.5 * k * (1.0 / d - 1.0 / d0) ** 2))


@criterion(2, "repulsive force equals central-difference gradient over 1000 random scans")
def test_gradient_check():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20)
    dirs = ray_directions(360)
    h = 1e-4
    worst = 0.0
    for _ in range(1000):
        k, d0 = float(rng.uniform(0.1, 5)), float(rng.uniform(1, 15))
        r = np.where(rng.random(360) < 0.25, rng.uniform(0.35, d0, 360), 30.0)
        r[int(rng.integers(360))] = float(rng.uniform(0.35, d0))
        pts = dirs * r[:, None]
        gx = (_summed_potential((h, 0), pts, k, d0) - _summed_potential((-h, 0), pts, k, d0)) / (2 * h)
        gy = (_summed_potential((0, h), pts, k, d0) - _summed_potential((0, -h), pts, k, d0)) / (2 * h)
        f = repulsive_force(LidarScan(r), AvoidanceConfig(k_obst=k, d0=d0))
        worst = max(worst, math.hypot(f.fx + gx, f.fy + gy) / math.hypot(gx, gy))
    assert worst <= 1e-4
    assert time.perf_counter() - t0 < 10.0


@criterion(3, "analytic ray cast within 2 mm of a 1 mm marching oracle over 1000 random worlds")
def test_ray_cast_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        world, shapes = random_world(rng)
        z = float(rng.uniform(0, 6))
        origin = tuple(rng.uniform(-30, 30, 2))
        angle = float(rng.uniform(0, 2 * math.pi))
        got = ray_cast(Ray.from_angle(origin, angle), world, z, 30.0)
        want = march(origin, angle, [s for s, z0, z1 in shapes if z0 <= z <= z1], 30.0)
        worst = max(worst, abs(got - want))
    assert worst <= 2e-3
    assert time.perf_counter() - t0 < 30.0


@criterion(4, "R1 obstacle course: both directions complete and avoid, detour, Satisfied x15")
def test_r1_scenario(r1_campaign):
    report, elapsed = r1_campaign
    assert len(report.repeats) == REPEATS
    for r in report.repeats:
        assert r.verdict is Verdict.SATISFIED, r.group.reason
        for out in r.group.outputs:
            assert out.outcome is RunOutcome.COMPLETED
            tel = out.telemetry["d1"]
            assert tel.avoidance_count >= 1
            for leg in tel.legs:
                assert leg.distance_travelled > leg.shortest_path
    assert elapsed < 60.0


@criterion(5, "R2 parallel drones at d0 = 10 and 12: no avoidance, |dd| <= 1 m, |dt| <= 10 s, Satisfied x15")
@pytest.mark.parametrize("name", ["r2_parallel", "r2_parallel_d12"])
def test_r2_scenario(name):
    t0 = time.perf_counter()
    sc = bundled(name)
    report = run_campaign(sc.test_input, R2, REPEATS, "incrementing", tolerances=sc.relation.tolerances)
    assert sc.relation.tolerances.delta_d == 1.0 and sc.relation.tolerances.delta_t == 10.0
    for r in report.repeats:
        assert r.verdict is Verdict.SATISFIED
        src, fup = r.group.outputs
        for d in ("d1", "d2"):
            a, b = src.telemetry[d], fup.telemetry[d]
            assert a.avoidance_count == b.avoidance_count == 0
            assert abs(a.distance_travelled - b.distance_travelled) <= 1.0
            assert abs(a.elapsed_time - b.elapsed_time) <= 10.0
    assert time.perf_counter() - t0 < 60.0


@criterion("6a", "fault injection k_obst = 0: campaign exit status nonzero on every repeat")
def test_disabled_avoidance_is_caught():
    report = run_campaign(bundled("r1_no_avoidance").test_input, R1, REPEATS, "incrementing")
    assert report.exit_status != 0
    for r in report.repeats:
        assert r.verdict is not Verdict.SATISFIED


@criterion("6b", "suspension off degrades the R1 mission: longer time or distance than suspension on")
def test_suspension_off_degrades():
    on = bundled("r1_obstacle_course").test_input
    off = bundled("r1_no_suspension").test_input
    assert off.avoidance.suspend_pursuit_during_avoidance is False
    assert on.world == off.world and on.plans == off.plans
    for seed in range(1, REPEATS + 1):
        a = simulate(on.with_seed(seed)).telemetry["d1"]
        b = simulate(off.with_seed(seed)).telemetry["d1"]
        assert b.elapsed_time > a.elapsed_time or b.distance_travelled > a.distance_travelled, (
            f"seed {seed}: suspension off {b.distance_travelled:.3f} m / {b.elapsed_time:.1f} s, "
            f"on {a.distance_travelled:.3f} m / {a.elapsed_time:.1f} s")


@criterion(7, "zigzag: a direction records more avoidance manoeuvres than there are obstacles")
def test_zigzag(r1_campaign):
    report, _ = r1_campaign
    n_obstacles = len(bundled("r1_obstacle_course").test_input.world.obstacles)
    for r in report.repeats:
        assert max(o.telemetry["d1"].avoidance_count for o in r.group.outputs) > n_obstacles


@criterion(8, "head-on drones over 25 seeds: no collision, per-run durations within 10 s")
def test_head_on_safety():
    src = bundled("head_on").test_input
    for seed in range(1, 26):
        out = simulate(src.with_seed(seed))
        assert out.outcome is not RunOutcome.COLLISION_FAULT, out.message
        t1, t2 = (out.telemetry[d].elapsed_time for d in ("d1", "d2"))
        assert abs(t1 - t2) <= 10.0


@criterion(9, "height blindness: wall in sensing plane forces a detour >= 1.5x, wall below it <= 1.05x")
def test_height_blindness():
    seen = simulate(bundled("low_wall_visible").test_input)
    hidden = simulate(bundled("low_wall_hidden").test_input)
    assert seen.outcome is RunOutcome.COMPLETED and hidden.outcome is RunOutcome.COMPLETED
    leg_seen = seen.telemetry["d1"].legs[0]
    leg_hidden = hidden.telemetry["d1"].legs[0]
    assert leg_seen.distance_travelled / leg_seen.shortest_path >= 1.5
    assert leg_hidden.distance_travelled / leg_hidden.shortest_path <= 1.05
    assert hidden.telemetry["d1"].avoidance_count == 0


def _campaign_bytes(name, trace_dir):
    sc = bundled(name)
    rel = REGISTRY.get(sc.relation.id)
    report = run_campaign(sc.test_input, rel, 1, "fixed", trace_dir, sc.relation.tolerances)
    files = {p.name: p.read_bytes() for p in sorted(trace_dir.iterdir())}
    return emit_report(report, "console"), emit_report(report, "machine"), files


@criterion(10, "determinism: fixed seed, run twice, byte-identical traces and reports")
@pytest.mark.parametrize("name", ["r1_obstacle_course", "r1_no_suspension", "r2_parallel", "head_on",
                                  "low_wall_hidden"])
def test_determinism(name, tmp_path):
    a = _campaign_bytes(name, tmp_path / "a")
    b = _campaign_bytes(name, tmp_path / "b")
    assert a == b
    assert len(a[2]) == 2


@criterion(11, "console report of a completed R1 group matches the golden file")
def test_report_golden(golden_dir):
    report = run_campaign(bundled("r1_obstacle_course").test_input, R1, 1)
    text = emit_report(report, "console")
    assert text == (golden_dir / "r1_console.txt").read_text()
    assert "---------- MR Validation ----------\nMR 1: True\n" in text
