import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import random_world
from metadrone.geometry import Circle, Obstacle, Pose, Ray, WorldModel, ray_cast
from metadrone.lidar import LidarConfig, LidarScan, nearest_reading, ray_directions, scan


def test_free_space_reads_max_range():
    s = scan(Pose(0, 0, 2), WorldModel())
    assert s.ranges.shape == (360,)
    assert np.all(s.ranges == 30.0)


def test_obstacle_dead_ahead():
    w = WorldModel((Obstacle("c", Circle((10, 0), 2), 0, 5),))
    s = scan(Pose(0, 0, 2), w)
    assert s.ranges[0] == pytest.approx(8.0)
    assert s.ranges[180] == 30.0


def test_other_drone_seen_as_cylinder():
    s = scan(Pose(0, 0, 2), WorldModel(), [(Pose(25, 0, 2), 0.5)])
    assert s.ranges[0] == pytest.approx(24.5)
    cluster = np.flatnonzero(s.ranges < 30)
    assert set(cluster) <= {359, 0, 1}


def test_other_drone_out_of_plane_is_invisible():
    s = scan(Pose(0, 0, 2), WorldModel(), [(Pose(10, 0, 2.6), 0.5)])
    assert np.all(s.ranges == 30.0)
    s = scan(Pose(0, 0, 2), WorldModel(), [(Pose(10, 0, 2.5), 0.5)])
    assert s.ranges[0] == pytest.approx(9.5)


def test_readings_clamped_to_min_range():
    w = WorldModel((Obstacle("c", Circle((0.5, 0), 0.3), 0, 5),))
    s = scan(Pose(0, 0, 2), w)
    assert s.ranges.min() == 0.35


def test_ray_zero_points_along_x_and_turns_counter_clockwise():
    d = ray_directions(360)
    assert d[0] == pytest.approx([1, 0])
    assert d[90] == pytest.approx([0, 1], abs=1e-12)
    assert not d.flags.writeable


def test_nearest_reading_ties_and_minimum():
    assert nearest_reading(LidarScan(np.full(360, 30.0))) == (30.0, 0)
    r = np.full(360, 30.0)
    r[1] = 5.0
    assert nearest_reading(LidarScan(r)) == (5.0, 1)
    r = np.full(360, 30.0)
    r[3] = r[7] = 4.0
    assert nearest_reading(LidarScan(r)) == (4.0, 3)


def test_config_validation():
    with pytest.raises(ValueError):
        LidarConfig(ray_count=4)
    with pytest.raises(ValueError):
        LidarConfig(min_range=5, max_range=3)
    assert LidarConfig().spacing == pytest.approx(2 * math.pi / 360)


def test_scan_equals_per_ray_cast_clamped():
    rng = np.random.default_rng(11)
    cfg = LidarConfig(ray_count=72)
    for _ in range(40):
        world, _ = random_world(rng)
        p = Pose(*rng.uniform(-30, 30, 2), float(rng.uniform(0, 5)))
        s = scan(p, world, config=cfg)
        for i in range(cfg.ray_count):
            ray = Ray.from_angle((p.x, p.y), i * cfg.spacing)
            want = min(max(ray_cast(ray, world, p.z, cfg.max_range), cfg.min_range), cfg.max_range)
            assert s.ranges[i] == pytest.approx(want, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(-15, 15), st.floats(-15, 15), st.floats(0.3, 4), st.integers(1, 359))
def test_rotating_world_by_one_spacing_shifts_readings(cx, cy, r, k):
    assume(math.hypot(cx, cy) > r + 0.5)
    # skip rims that a ray grazes, where hit/miss flips under rounding
    t = np.arange(360) * (2 * math.pi / 360)
    perp = np.abs(cx * np.sin(t) - cy * np.cos(t))
    assume(np.min(np.abs(perp - r)) > 1e-6)
    cfg = LidarConfig()
    w = WorldModel((Obstacle("c", Circle((cx, cy), r), 0, 5),))
    a = scan(Pose(0, 0, 1), w, config=cfg).ranges
    b = scan(Pose(0, 0, 1), w.rotated(k * cfg.spacing), config=cfg).ranges
    assert np.allclose(np.roll(a, k), b, atol=1e-6)
