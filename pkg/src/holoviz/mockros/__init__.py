"""Desk-scale test harness: a mock rosbridge server plus scripted robot
scenarios (navigation, occluded motion intent, object handover)."""

from .scenarios import (
    HandoverScenario,
    NavScenario,
    OccludedIntentScenario,
    RobotState,
    ScenarioParams,
    build_scenario,
    nav_step,
)
from .server import MockRosServer

__all__ = [
    "MockRosServer",
    "ScenarioParams",
    "RobotState",
    "nav_step",
    "NavScenario",
    "OccludedIntentScenario",
    "HandoverScenario",
    "build_scenario",
]
