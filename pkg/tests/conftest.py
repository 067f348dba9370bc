import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from metadrone.geometry import Circle, ConvexPolygon, Obstacle, WorldModel  # noqa: E402
from metadrone.scenario import load_scenario, resolve_scenario  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


def regular_polygon(center, radius, n, phase=0.0):
    return ConvexPolygon(tuple(
        (center[0] + radius * math.cos(phase + 2 * math.pi * i / n),
         center[1] + radius * math.sin(phase + 2 * math.pi * i / n))
        for i in range(n)))


def random_convex(rng: np.random.Generator, center, radius):
    """Irregular convex polygon: sorted angles on a rotated ellipse."""
    n = int(rng.integers(3, 9))
    t = np.sort(rng.uniform(0, 2 * math.pi, n))
    while np.min(np.diff(np.append(t, t[0] + 2 * math.pi))) < 0.2:
        t = np.sort(rng.uniform(0, 2 * math.pi, n))
    a, b = radius, radius * float(rng.uniform(0.3, 1.0))
    rot = float(rng.uniform(0, math.pi))
    x, y = a * np.cos(t), b * np.sin(t)
    xs = center[0] + x * math.cos(rot) - y * math.sin(rot)
    ys = center[1] + x * math.sin(rot) + y * math.cos(rot)
    return ConvexPolygon(tuple(zip(xs.tolist(), ys.tolist())))


def random_world(rng: np.random.Generator, n_obstacles=None):
    """Random circles and convex polygons with mixed height intervals.

    Returns the world and a plain description of each shape for the oracles.
    """
    obstacles, shapes = [], []
    for i in range(n_obstacles if n_obstacles is not None else int(rng.integers(1, 5))):
        c = tuple(rng.uniform(-25, 25, size=2))
        r = float(rng.uniform(0.5, 6))
        z0 = float(rng.choice([0.0, 0.0, 1.0, 3.0]))
        z1 = z0 + float(rng.uniform(0.5, 6))
        if rng.random() < 0.5:
            fp = Circle(c, r)
            shape = ("circle", c, r)
        else:
            fp = random_convex(rng, c, r)
            shape = ("polygon", fp.vertices)
        obstacles.append(Obstacle(f"o{i}", fp, z0, z1))
        shapes.append((shape, z0, z1))
    return WorldModel(tuple(obstacles)), shapes


def bundled(name):
    return load_scenario(resolve_scenario(name))


@pytest.fixture
def golden_dir():
    return GOLDEN


# -- acceptance summary -------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion checked by this test")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    cid, title = marker
    failed = report.failed
    prev = _CRITERIA.get(cid, (title, True))
    if report.when == "call" or failed:
        _CRITERIA[cid] = (title, prev[1] and not failed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (str(m.args[0]), m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")

    def key(cid):
        return (int("".join(ch for ch in cid if ch.isdigit())), cid)

    for cid in sorted(_CRITERIA, key=key):
        title, ok = _CRITERIA[cid]
        terminalreporter.write_line(f"criterion {cid:<3} {'PASS' if ok else 'FAIL'}  {title}")
