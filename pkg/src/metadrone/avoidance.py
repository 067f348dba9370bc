"""
Potential field obstacle avoidance.

Every lidar return closer than the influence threshold ``d0`` is treated as a
point obstacle with repulsive potential

    U(d) = 0.5 * k * (1/d - 1/d0)**2     for d < d0, else 0

and pushes the drone with the negative gradient of that potential. The
goal attracts with a unit vector. The resulting steering direction is flown
at cruise speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Pose
from .lidar import LidarScan

STEER_EPS = 1e-9


@dataclass(frozen=True)
class AvoidanceConfig:
    k_obst: float = 1.0
    d0: float = 10.0
    cruise_speed: float = 1.0
    suspend_pursuit_during_avoidance: bool = True

    def __post_init__(self):
        # k_obst = 0 is accepted on purpose: it is the disabled-avoidance fault
        if self.k_obst < 0:
            raise ValueError(f"k_obst must be >= 0, got {self.k_obst}")
        if not self.d0 > 0:
            raise ValueError(f"d0 must be > 0, got {self.d0}")
        if not self.cruise_speed > 0:
            raise ValueError(f"cruise_speed must be > 0, got {self.cruise_speed}")


@dataclass(frozen=True)
class ForceVector:
    fx: float
    fy: float

    def __add__(self, other: "ForceVector") -> "ForceVector":
        return ForceVector(self.fx + other.fx, self.fy + other.fy)

    @property
    def norm(self) -> float:
        return math.hypot(self.fx, self.fy)


@dataclass(frozen=True)
class VelocityCommand:
    vx: float
    vy: float
    avoidance_active: bool

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def repulsive_potential(d: float, k: float, d0: float) -> float:
    if d <= 0:
        raise ValueError(f"obstacle distance must be positive, got {d}")
    if d >= d0:
        return 0.0
    return 0.5 * k * (1.0 / d - 1.0 / d0) ** 2


def repulsive_magnitudes(ranges: np.ndarray, k: float, d0: float) -> np.ndarray:
    """Per-ray |dU/dd|, zero outside the influence region."""
    r = np.asarray(ranges, dtype=float)
    inside = r < d0
    out = np.zeros_like(r)
    ri = r[inside]
    out[inside] = k * (1.0 / ri - 1.0 / d0) / (ri * ri)
    return out


def repulsive_force(s: LidarScan, config: AvoidanceConfig) -> ForceVector:
    mag = repulsive_magnitudes(s.ranges, config.k_obst, config.d0)
    if not mag.any():
        return ForceVector(0.0, 0.0)
    dirs = s.directions
    return ForceVector(-float(mag @ dirs[:, 0]), -float(mag @ dirs[:, 1]))


def attractive_force(p: Pose, waypoint: Sequence[float]) -> ForceVector:
    dx = waypoint[0] - p.x
    dy = waypoint[1] - p.y
    n = math.hypot(dx, dy)
    if n < 1e-9:
        return ForceVector(0.0, 0.0)
    return ForceVector(dx / n, dy / n)


def is_avoiding(s: LidarScan, config: AvoidanceConfig) -> bool:
    return bool(np.any(s.ranges < config.d0))


def command(p: Pose, waypoint, s: LidarScan, config: AvoidanceConfig) -> VelocityCommand:
    """Velocity command for one control tick.

    ``waypoint=None`` means there is nothing to pursue (vertical phases) and
    only repulsion steers.
    """
    active = is_avoiding(s, config)
    rep = repulsive_force(s, config)
    if waypoint is None or (active and config.suspend_pursuit_during_avoidance):
        steer = rep
    else:
        steer = attractive_force(p, waypoint) + rep
    n = steer.norm
    if n < STEER_EPS:
        return VelocityCommand(0.0, 0.0, active)
    v = config.cruise_speed / n
    return VelocityCommand(steer.fx * v, steer.fy * v, active)
