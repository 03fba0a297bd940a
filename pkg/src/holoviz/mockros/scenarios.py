"""Scripted robot behaviours behind the mock server.

Three scenarios:
- ``nav``: a point robot drives to goals received on the goal topic,
  broadcasting its transform, a motion-intent arrow and a floor grid.
- ``occluded_intent``: same robot patrols configured waypoints on its own,
  exercising the intent visuals continuously.
- ``handover``: idle until "start" arrives on the command topic, then
  streams an object wireframe plus a grasp pose at a fixed rate.

The robot is a point with a speed and yaw-rate cap; real planning is out of
scope, only the topic contract matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

from ..bridge.messages import (
    MARKER_ARRAY,
    POSE_STAMPED,
    STRING,
    CommandString,
    Marker,
    MarkerAction,
    MarkerArray,
    MarkerType,
    PoseStamped,
    RGBA,
    TFMessage,
    decode_msg,
)
from ..geom import Transform, Vec3, quat_from_yaw, yaw_of
from ..txgraph import Stamp, StampedTransform

Publish = Callable[[str, str, object], None]

ARRIVAL_EPS = 0.02

CYAN = RGBA(0.1, 0.9, 0.9, 1.0)
GRID_GRAY = RGBA(0.55, 0.55, 0.55, 0.7)
WIRE_ORANGE = RGBA(1.0, 0.6, 0.1, 1.0)


@dataclass(frozen=True, slots=True)
class RobotState:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def nav_step(state: RobotState, goal: tuple[float, float, float], speed: float,
             yaw_rate: float, dt: float) -> RobotState:
    """One kinematic step toward (x, y, yaw): capped speed and turn rate.

    Distance to the goal never increases; at the goal the state is returned
    unchanged.
    """
    gx, gy, gyaw = goal
    dx, dy = gx - state.x, gy - state.y
    dist = math.hypot(dx, dy)
    if dist < 1e-12:
        if abs(_wrap(gyaw - state.yaw)) < 1e-12:
            return state
        x, y = state.x, state.y
        desired = gyaw
    else:
        step = min(speed * dt, dist)
        x = state.x + dx / dist * step
        y = state.y + dy / dist * step
        desired = math.atan2(dy, dx) if dist - step > ARRIVAL_EPS else gyaw
    err = _wrap(desired - state.yaw)
    turn = max(-yaw_rate * dt, min(yaw_rate * dt, err))
    return RobotState(x=x, y=y, yaw=_wrap(state.yaw + turn))


@dataclass
class ScenarioParams:
    speed: float = 0.5            # m/s
    tf_rate: float = 30.0         # Hz, also the scenario step rate
    yaw_rate: float = 2.0         # rad/s
    handover_rate: float = 10.0   # Hz
    waypoints: list[tuple[float, float, float]] = field(default_factory=list)
    grid_extent: float = 5.0      # grid spans [-extent, extent]
    grid_step: float = 1.0
    tf_topic: str = "/tf"
    viz_topic: str = "/viz_markers"
    goal_topic: str = "/move_base_simple/goal"
    pose_topic: str = "/robot_pose"
    command_topic: str = "/handover/command"
    grasp_topic: str = "/grasp_pose"

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("speed must be positive")
        if self.tf_rate <= 0 or self.handover_rate <= 0:
            raise ValueError("rates must be positive")


class Scenario:
    name = "scenario"

    def __init__(self, params: ScenarioParams):
        self.params = params

    def listened_topics(self) -> dict[str, str]:
        """topic -> message type the scenario consumes from clients."""
        return {}

    def on_message(self, topic: str, payload: dict) -> None:
        pass

    def step(self, now: float, dt: float, publish: Publish) -> None:
        pass

    def state_dict(self) -> dict:
        return {"name": self.name}


def _grid_markers(params: ScenarioParams, stamp: Stamp) -> list[Marker]:
    """Floor grid as two LINE_LIST markers (x-parallel and y-parallel runs)."""
    extent, step = params.grid_extent, params.grid_step
    ticks = []
    v = -extent
    while v <= extent + 1e-9:
        ticks.append(round(v, 9))
        v += step
    x_points: list[Vec3] = []
    y_points: list[Vec3] = []
    for t in ticks:
        x_points += [Vec3(-extent, t, 0.0), Vec3(extent, t, 0.0)]
        y_points += [Vec3(t, -extent, 0.0), Vec3(t, extent, 0.0)]
    common = dict(
        marker_type=MarkerType.LINE_LIST,
        action=MarkerAction.ADD,
        frame_id="map",
        stamp=stamp,
        pose=Transform.identity(),
        scale=Vec3(0.02, 0.02, 0.02),
        color=GRID_GRAY,
    )
    return [
        Marker(ns="grid", id=0, points=tuple(x_points), **common),
        Marker(ns="grid", id=1, points=tuple(y_points), **common),
    ]


class NavScenario(Scenario):
    name = "nav"

    def __init__(self, params: ScenarioParams):
        super().__init__(params)
        self.state = RobotState()
        self.goal: tuple[float, float, float] | None = None

    def listened_topics(self) -> dict[str, str]:
        return {self.params.goal_topic: POSE_STAMPED}

    def on_message(self, topic: str, payload: dict) -> None:
        if topic == self.params.goal_topic:
            goal = decode_msg(POSE_STAMPED, payload)
            self.goal = (goal.pose.translation.x, goal.pose.translation.y,
                         yaw_of(goal.pose.rotation))

    def distance_to_goal(self) -> float | None:
        if self.goal is None:
            return None
        return math.hypot(self.goal[0] - self.state.x, self.goal[1] - self.state.y)

    def step(self, now: float, dt: float, publish: Publish) -> None:
        p = self.params
        stamp = Stamp.from_seconds(now)
        arrived = False
        if self.goal is not None:
            self.state = nav_step(self.state, self.goal, p.speed, p.yaw_rate, dt)
            if self.distance_to_goal() <= ARRIVAL_EPS:
                arrived = True
        publish(p.tf_topic, "tf2_msgs/TFMessage", TFMessage(transforms=(
            StampedTransform(parent="map", child="base_link", stamp=stamp,
                             transform=Transform(Vec3(self.state.x, self.state.y, 0.0),
                                                 quat_from_yaw(self.state.yaw))),
        )))
        publish(p.pose_topic, POSE_STAMPED, PoseStamped(
            frame_id="map", stamp=stamp,
            pose=Transform(Vec3(self.state.x, self.state.y, 0.0), quat_from_yaw(self.state.yaw)),
        ))
        markers = _grid_markers(p, stamp)
        if self.goal is not None and not arrived:
            markers.append(Marker(
                ns="intent", id=0, marker_type=MarkerType.ARROW, action=MarkerAction.ADD,
                frame_id="map", stamp=stamp, pose=Transform.identity(),
                scale=Vec3(0.05, 0.1, 0.1), color=CYAN,
                points=(Vec3(self.state.x, self.state.y, 0.0),
                        Vec3(self.goal[0], self.goal[1], 0.0)),
            ))
        else:
            markers.append(Marker(
                ns="intent", id=0, marker_type=MarkerType.ARROW, action=MarkerAction.DELETE,
                frame_id="map", stamp=stamp, pose=Transform.identity(),
                scale=Vec3(1, 1, 1), color=CYAN,
            ))
        publish(p.viz_topic, MARKER_ARRAY, MarkerArray(markers=tuple(markers)))
        if arrived:
            self.goal = None

    def state_dict(self) -> dict:
        return {
            "name": self.name,
            "robot": {"x": self.state.x, "y": self.state.y, "yaw": self.state.yaw},
            "goal": None if self.goal is None else
                    {"x": self.goal[0], "y": self.goal[1], "yaw": self.goal[2]},
        }


class OccludedIntentScenario(NavScenario):
    name = "occluded_intent"

    def __init__(self, params: ScenarioParams):
        super().__init__(params)
        if not params.waypoints:
            params.waypoints = [(10.0, 0.0, 0.0), (-10.0, 0.0, math.pi)]
        self._next_waypoint = 0

    def step(self, now: float, dt: float, publish: Publish) -> None:
        if self.goal is None:
            self.goal = tuple(self.params.waypoints[self._next_waypoint])
            self._next_waypoint = (self._next_waypoint + 1) % len(self.params.waypoints)
        super().step(now, dt, publish)


def _box_edges(center: Vec3, half: float) -> list[tuple[Vec3, Vec3]]:
    corners = [
        Vec3(center.x + sx * half, center.y + sy * half, center.z + sz * half)
        for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)
    ]
    pairs = [(0, 1), (1, 3), (3, 2), (2, 0), (4, 5), (5, 7), (7, 6), (6, 4),
             (0, 4), (1, 5), (2, 6), (3, 7)]
    return [(corners[a], corners[b]) for a, b in pairs]


class HandoverScenario(Scenario):
    name = "handover"

    ARM_FRAME = "arm_base"

    def __init__(self, params: ScenarioParams):
        super().__init__(params)
        self.active = False
        self._last_pub = -math.inf
        self.object_center = Vec3(0.55, 0.0, 0.25)
        self.object_half = 0.08

    @property
    def wireframe_marker_count(self) -> int:
        return 12  # one LINE marker per box edge

    def listened_topics(self) -> dict[str, str]:
        return {self.params.command_topic: STRING}

    def on_message(self, topic: str, payload: dict) -> None:
        if topic != self.params.command_topic:
            return
        cmd = decode_msg(STRING, payload)
        if cmd.data == "start" and not self.active:
            self.active = True  # repeated "start" during execution is ignored

    def step(self, now: float, dt: float, publish: Publish) -> None:
        p = self.params
        stamp = Stamp.from_seconds(now)
        publish(p.tf_topic, "tf2_msgs/TFMessage", TFMessage(transforms=(
            StampedTransform(parent="map", child=self.ARM_FRAME, stamp=stamp,
                             transform=Transform(Vec3(1.2, 0.4, 0.0), quat_from_yaw(math.pi))),
        )))
        if not self.active:
            return
        if now - self._last_pub < 1.0 / p.handover_rate:
            return
        self._last_pub = now
        markers = [
            Marker(ns="wire", id=k, marker_type=MarkerType.LINE_LIST, action=MarkerAction.ADD,
                   frame_id=self.ARM_FRAME, stamp=stamp, pose=Transform.identity(),
                   scale=Vec3(0.008, 0.008, 0.008), color=WIRE_ORANGE, points=(a, b))
            for k, (a, b) in enumerate(_box_edges(self.object_center, self.object_half))
        ]
        publish(p.viz_topic, MARKER_ARRAY, MarkerArray(markers=tuple(markers)))
        grasp = Transform(
            Vec3(self.object_center.x, self.object_center.y,
                 self.object_center.z + self.object_half + 0.12),
            quat_from_yaw(0.0),
        )
        publish(p.grasp_topic, POSE_STAMPED,
                PoseStamped(frame_id=self.ARM_FRAME, stamp=stamp, pose=grasp))

    def state_dict(self) -> dict:
        return {"name": self.name, "active": self.active}


SCENARIOS = {
    "nav": NavScenario,
    "occluded_intent": OccludedIntentScenario,
    "handover": HandoverScenario,
}


def build_scenario(name: str, params: ScenarioParams | None = None) -> Scenario:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r} (have: {', '.join(SCENARIOS)})")
    return SCENARIOS[name](params or ScenarioParams())
