"""
Static world description and exact geometric queries.

Obstacles are vertical prisms: a 2D footprint (circle or convex polygon)
extruded over a height interval. All queries work in the horizontal plane
and only see obstacles whose height interval contains the query altitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

Point = Tuple[float, float]

_EPS = 1e-12


def _as_point(p: Sequence[float]) -> Point:
    return (float(p[0]), float(p[1]))


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True)
class Pose:
    """Drone position and heading ``[x, y, z, psi]``; psi in degrees."""

    x: float
    y: float
    z: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"altitude must be >= 0, got {self.z}")
        object.__setattr__(self, "psi", float(self.psi) % 360.0)

    @property
    def xy(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class Ray:
    origin: Point
    direction: Point

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_point(self.origin))
        object.__setattr__(self, "direction", _as_point(self.direction))
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"ray direction must be a unit vector, norm is {norm}")

    @classmethod
    def from_angle(cls, origin: Sequence[float], angle: float) -> "Ray":
        return cls(_as_point(origin), (math.cos(angle), math.sin(angle)))


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not self.radius > 0:
            raise ValueError(f"circle radius must be > 0, got {self.radius}")

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.center[0], y - self.center[1]) <= self.radius

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        d = pts - np.asarray(self.center)
        return np.einsum("ij,ij->i", d, d) <= self.radius * self.radius

    def boundary_distance(self, x: float, y: float) -> float:
        return max(0.0, math.hypot(x - self.center[0], y - self.center[1]) - self.radius)

    def cast(self, origin: Point, dirs: np.ndarray) -> np.ndarray:
        """Distance along each unit direction to the circle, ``inf`` on a miss."""
        fx = origin[0] - self.center[0]
        fy = origin[1] - self.center[1]
        c = fx * fx + fy * fy - self.radius * self.radius
        if c <= 0.0:
            return np.zeros(len(dirs))
        b = dirs[:, 0] * fx + dirs[:, 1] * fy
        disc = b * b - c
        out = np.full(len(dirs), np.inf)
        hit = (disc >= 0.0) & (b < 0.0)
        # origin is outside, so both roots share a sign; the near one is the entry
        out[hit] = -b[hit] - np.sqrt(disc[hit])
        return out

    def bbox(self) -> Tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def translated(self, dx: float, dy: float) -> "Circle":
        return Circle((self.center[0] + dx, self.center[1] + dy), self.radius)

    def rotated(self, angle: float, about: Point = (0.0, 0.0)) -> "Circle":
        return Circle(_rotate_point(self.center, angle, about), self.radius)

    def to_dict(self) -> dict:
        return {"circle": {"center": list(self.center), "radius": self.radius}}


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices."""

    vertices: Tuple[Point, ...]

    def __post_init__(self):
        verts = tuple(_as_point(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {n}")
        if self.area <= _EPS:
            raise ValueError("polygon must be counter-clockwise with positive area")
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            if _cross(bx - ax, by - ay, cx - bx, cy - by) < -1e-12:
                raise ValueError("polygon is not convex")

    @property
    def area(self) -> float:
        v = self.vertices
        s = 0.0
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    @cached_property
    def _arrays(self):
        p = np.asarray(self.vertices, dtype=float)
        q = np.roll(p, -1, axis=0)
        return p, q - p

    def contains(self, x: float, y: float) -> bool:
        p, e = self._arrays
        return bool(np.all(_cross(e[:, 0], e[:, 1], x - p[:, 0], y - p[:, 1]) >= 0.0))

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        p, e = self._arrays
        rx = pts[:, 0:1] - p[None, :, 0]
        ry = pts[:, 1:2] - p[None, :, 1]
        return np.all(e[None, :, 0] * ry - e[None, :, 1] * rx >= 0.0, axis=1)

    def boundary_distance(self, x: float, y: float) -> float:
        if self.contains(x, y):
            return 0.0
        p, e = self._arrays
        wx = x - p[:, 0]
        wy = y - p[:, 1]
        ee = e[:, 0] ** 2 + e[:, 1] ** 2
        s = np.clip((wx * e[:, 0] + wy * e[:, 1]) / ee, 0.0, 1.0)
        dx = wx - s * e[:, 0]
        dy = wy - s * e[:, 1]
        return float(np.sqrt(np.min(dx * dx + dy * dy)))

    def cast(self, origin: Point, dirs: np.ndarray) -> np.ndarray:
        """Distance along each unit direction to the polygon, ``inf`` on a miss."""
        if self.contains(*origin):
            return np.zeros(len(dirs))
        p, e = self._arrays
        wx = p[:, 0] - origin[0]
        wy = p[:, 1] - origin[1]
        dx = dirs[:, 0:1]
        dy = dirs[:, 1:2]
        denom = dx * e[None, :, 1] - dy * e[None, :, 0]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = (wx[None, :] * e[None, :, 1] - wy[None, :] * e[None, :, 0]) / denom
            s = (wx[None, :] * dy - wy[None, :] * dx) / denom
        ok = (np.abs(denom) > _EPS) & (t >= 0.0) & (s >= -1e-12) & (s <= 1.0 + 1e-12)
        t = np.where(ok, t, np.inf)
        return t.min(axis=1)

    @cached_property
    def _bbox(self) -> Tuple[float, float, float, float]:
        p, _ = self._arrays
        return (float(p[:, 0].min()), float(p[:, 1].min()), float(p[:, 0].max()), float(p[:, 1].max()))

    def bbox(self) -> Tuple[float, float, float, float]:
        return self._bbox

    def translated(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def rotated(self, angle: float, about: Point = (0.0, 0.0)) -> "ConvexPolygon":
        return ConvexPolygon(tuple(_rotate_point(v, angle, about) for v in self.vertices))

    def to_dict(self) -> dict:
        return {"polygon": [list(v) for v in self.vertices]}


Footprint = Union[Circle, ConvexPolygon]


def _rotate_point(p: Point, angle: float, about: Point) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    dx, dy = p[0] - about[0], p[1] - about[1]
    return (about[0] + c * dx - s * dy, about[1] + s * dx + c * dy)


@dataclass(frozen=True)
class Obstacle:
    id: str
    footprint: Footprint
    z_min: float
    z_max: float

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise ValueError(f"obstacle {self.id!r}: z_min must be < z_max")

    def spans(self, altitude: float) -> bool:
        return self.z_min <= altitude <= self.z_max

    def translated(self, dx: float, dy: float) -> "Obstacle":
        return Obstacle(self.id, self.footprint.translated(dx, dy), self.z_min, self.z_max)

    def rotated(self, angle: float, about: Point = (0.0, 0.0)) -> "Obstacle":
        return Obstacle(self.id, self.footprint.rotated(angle, about), self.z_min, self.z_max)


@dataclass(frozen=True)
class Pad:
    """Landing platform; green pads are start points, red pads destinations."""

    name: str
    position: Point
    color: str = "green"

    def __post_init__(self):
        object.__setattr__(self, "position", _as_point(self.position))
        if self.color not in ("green", "red"):
            raise ValueError(f"pad {self.name!r}: color must be 'green' or 'red'")


@dataclass(frozen=True)
class WorldModel:
    obstacles: Tuple[Obstacle, ...] = ()
    pads: Dict[str, Pad] = field(default_factory=dict)
    bounds: Tuple[float, float, float, float] = (-1e6, -1e6, 1e6, 1e6)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ValueError("bounds must satisfy xmin < xmax and ymin < ymax")
        ids = [o.id for o in self.obstacles]
        if len(set(ids)) != len(ids):
            raise ValueError("obstacle ids must be unique")
        for o in self.obstacles:
            bx0, by0, bx1, by1 = o.footprint.bbox()
            if bx0 < xmin or by0 < ymin or bx1 > xmax or by1 > ymax:
                raise ValueError(f"obstacle {o.id!r} lies outside the world bounds")
        for pad in self.pads.values():
            if not self.in_bounds(*pad.position):
                raise ValueError(f"pad {pad.name!r} lies outside the world bounds")

    def in_bounds(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= x <= xmax and ymin <= y <= ymax

    def visible_at(self, altitude: float) -> Iterable[Obstacle]:
        return (o for o in self.obstacles if o.spans(altitude))

    def pad(self, name: str) -> Pad:
        return self.pads[name]

    def translated(self, dx: float, dy: float) -> "WorldModel":
        xmin, ymin, xmax, ymax = self.bounds
        return WorldModel(
            tuple(o.translated(dx, dy) for o in self.obstacles),
            {k: Pad(p.name, (p.position[0] + dx, p.position[1] + dy), p.color) for k, p in self.pads.items()},
            (xmin + dx, ymin + dy, xmax + dx, ymax + dy),
        )

    def rotated(self, angle: float, about: Point = (0.0, 0.0)) -> "WorldModel":
        # bounds are dropped to a generous box; a rotated rectangle is not axis-aligned
        obstacles = tuple(o.rotated(angle, about) for o in self.obstacles)
        pads = {k: Pad(p.name, _rotate_point(p.position, angle, about), p.color) for k, p in self.pads.items()}
        return WorldModel(obstacles, pads)


def cast_footprints(origin: Point, dirs: np.ndarray, obstacles: Iterable[Obstacle]) -> np.ndarray:
    """Nearest hit distance per direction over ``obstacles`` (``inf`` if none)."""
    out = np.full(len(dirs), np.inf)
    for o in obstacles:
        np.minimum(out, o.footprint.cast(origin, dirs), out=out)
    return out


def ray_cast(ray: Ray, world: WorldModel, altitude: float, max_range: float) -> float:
    """Range to the nearest obstacle spanning ``altitude``, clamped to ``max_range``."""
    if not max_range > 0:
        raise ValueError("max_range must be > 0")
    dirs = np.asarray([ray.direction], dtype=float)
    d = cast_footprints(ray.origin, dirs, world.visible_at(altitude))[0]
    return float(min(d, max_range))


def min_obstacle_distance(p: Pose, obstacle: Obstacle) -> float:
    """Horizontal distance from ``p`` to the obstacle's footprint.

    Zero on or inside the footprint. Returns ``math.inf`` when the obstacle does
    not span ``p.z``; the sensor cannot see it, which is different from there
    being no obstacle at all.
    """
    if not obstacle.spans(p.z):
        return math.inf
    return obstacle.footprint.boundary_distance(p.x, p.y)


def shortest_path_length(a: Sequence[float], b: Sequence[float]) -> float:
    """Straight-line distance between two targets, ignoring obstacles."""
    return math.hypot(b[0] - a[0], b[1] - a[1])


def footprint_from_dict(d: dict) -> Footprint:
    if "circle" in d:
        c = d["circle"]
        return Circle(tuple(c["center"]), float(c["radius"]))
    if "polygon" in d:
        return ConvexPolygon(tuple(tuple(v) for v in d["polygon"]))
    raise ValueError("footprint must define 'circle' or 'polygon'")


def nearest_obstacle(p: Pose, world: WorldModel) -> Tuple[Optional[Obstacle], float]:
    best, best_d = None, math.inf
    for o in world.obstacles:
        d = min_obstacle_distance(p, o)
        if d < best_d:
            best, best_d = o, d
    return best, best_d
