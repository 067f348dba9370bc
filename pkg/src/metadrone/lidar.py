"""Planar 360-degree lidar model.

Rays are fixed in the world frame: ray 0 points along +x and the rest follow
counter-clockwise at uniform spacing. Other drones appear as short vertical
cylinders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from .geometry import Circle, Pose, WorldModel, cast_footprints

DRONE_HALF_HEIGHT = 0.5


@dataclass(frozen=True)
class LidarConfig:
    ray_count: int = 360
    min_range: float = 0.35
    max_range: float = 30.0

    def __post_init__(self):
        if int(self.ray_count) != self.ray_count or self.ray_count < 8:
            raise ValueError(f"ray_count must be an integer >= 8, got {self.ray_count}")
        if not self.min_range > 0:
            raise ValueError(f"min_range must be > 0, got {self.min_range}")
        if not self.max_range > self.min_range:
            raise ValueError("max_range must exceed min_range")

    @property
    def spacing(self) -> float:
        """Angular spacing between adjacent rays, radians."""
        return 2.0 * math.pi / self.ray_count


@lru_cache(maxsize=16)
def _directions(ray_count: int) -> np.ndarray:
    a = np.arange(ray_count) * (2.0 * math.pi / ray_count)
    d = np.column_stack((np.cos(a), np.sin(a)))
    d.setflags(write=False)
    return d


def ray_directions(ray_count: int) -> np.ndarray:
    """Unit direction vectors, shape ``(ray_count, 2)``. Read-only and shared."""
    return _directions(int(ray_count))


@dataclass(frozen=True, eq=False)
class LidarScan:
    ranges: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ranges, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "ranges", r)

    def __len__(self) -> int:
        return len(self.ranges)

    def __eq__(self, other) -> bool:
        return isinstance(other, LidarScan) and np.array_equal(self.ranges, other.ranges)

    @property
    def directions(self) -> np.ndarray:
        return ray_directions(len(self.ranges))


def scan(
    p: Pose,
    world: WorldModel,
    other_drones: Sequence[Tuple[Pose, float]] = (),
    config: LidarConfig = LidarConfig(),
) -> LidarScan:
    """Cast the full ray fan from ``p``.

    ``other_drones`` holds ``(pose, body_radius)`` for every drone except the
    sensing one.
    """
    dirs = ray_directions(config.ray_count)
    origin = (p.x, p.y)
    reach = config.max_range
    d = cast_footprints(origin, dirs, (o for o in world.visible_at(p.z)
                                       if _bbox_gap(o.footprint.bbox(), origin) < reach))
    for pose, radius in other_drones:
        if abs(pose.z - p.z) <= DRONE_HALF_HEIGHT:
            np.minimum(d, Circle((pose.x, pose.y), radius).cast(origin, dirs), out=d)
    np.clip(d, config.min_range, config.max_range, out=d)
    return LidarScan(d)


def _bbox_gap(bbox, origin) -> float:
    x0, y0, x1, y1 = bbox
    dx = max(x0 - origin[0], 0.0, origin[0] - x1)
    dy = max(y0 - origin[1], 0.0, origin[1] - y1)
    return math.hypot(dx, dy)


def nearest_reading(s: LidarScan) -> Tuple[float, int]:
    """Smallest reading and its ray index; ties go to the lowest index."""
    i = int(np.argmin(s.ranges))
    return float(s.ranges[i]), i
