"""Metamorphic testing of a simulated potential-field drone."""

from .avoidance import AvoidanceConfig, VelocityCommand, command, repulsive_force, repulsive_potential
from .campaign import CampaignReport, run_campaign
from .geometry import Circle, ConvexPolygon, Obstacle, Pad, Pose, Ray, WorldModel, ray_cast
from .harness import (REGISTRY, MetamorphicGroup, MetamorphicRelation, TestInput, TestOutput, Tolerances,
                      Verdict, derive_followup_reverse_path, execute_group, register_relation,
                      relation_R1, relation_R2)
from .lidar import LidarConfig, LidarScan, scan
from .scenario import Scenario, ScenarioError, load_scenario
from .simulator import MissionPlan, RunOutcome, SimClock, Telemetry, run_mission

__all__ = [
    "AvoidanceConfig", "VelocityCommand", "command", "repulsive_force", "repulsive_potential",
    "CampaignReport", "run_campaign",
    "Circle", "ConvexPolygon", "Obstacle", "Pad", "Pose", "Ray", "WorldModel", "ray_cast",
    "REGISTRY", "MetamorphicGroup", "MetamorphicRelation", "TestInput", "TestOutput", "Tolerances",
    "Verdict", "derive_followup_reverse_path", "execute_group", "register_relation",
    "relation_R1", "relation_R2",
    "LidarConfig", "LidarScan", "scan",
    "Scenario", "ScenarioError", "load_scenario",
    "MissionPlan", "RunOutcome", "SimClock", "Telemetry", "run_mission",
]
