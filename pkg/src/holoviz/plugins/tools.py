"""The two built-in tool plugins."""

from __future__ import annotations

from ..bridge.messages import POSE_STAMPED, STRING, CommandString, PoseStamped, RGBA
from ..errors import DegenerateDirection
from ..geom import Transform, Vec3, apply, ray_ground_intersect, yaw_quat
from ..scene import SceneNode
from ..txgraph import Stamp
from .base import (
    COMMAND,
    MENU,
    RAY_MOVE,
    TAP,
    InputEvent,
    Plugin,
    PluginDescriptor,
    TickContext,
    arrow_node,
    string_map,
)

PREVIEW_COLOR = RGBA(0.2, 0.85, 0.3, 0.6)

IDLE = "idle"
ORIENTING = "orienting"


class Arrow2dTool(Plugin):
    """Two taps place a ground-plane goal: the first fixes the arrow tail,
    ray moves swing the tip, the second tap freezes and publishes the pose.

    Publishes a PoseStamped in the world frame with z = 0 and zero
    roll/pitch, then returns to idle.
    """

    KIND = "tool"
    TYPE_NAME = "Arrow2dTool"
    MESSAGE_TYPE = None
    SETTINGS = {}

    def __init__(self, descriptor: PluginDescriptor):
        super().__init__(descriptor)
        self.phase = IDLE
        self.tail: Vec3 | None = None
        self.tip: Vec3 | None = None

    def reset(self) -> None:
        self.phase = IDLE
        self.tail = None
        self.tip = None

    def menu_action(self, action: str, value, ctx: TickContext) -> None:
        if action == "reset":
            self.reset()
        else:
            super().menu_action(action, value, ctx)

    def handle_input(self, ev: InputEvent, ctx: TickContext) -> None:
        if ev.variant == TAP:
            hit = ray_ground_intersect(ev.ray_origin, ev.ray_direction)
            if hit is None:
                return  # tap into the sky: ignored
            if self.phase == IDLE:
                self.tail = hit
                self.tip = hit
                self.phase = ORIENTING
            else:
                self.tip = hit
                try:
                    heading = yaw_quat(self.tail, self.tip)
                except DegenerateDirection:
                    return  # tail ~ tip: stay in orienting
                goal = PoseStamped(
                    frame_id=ctx.fixed_frame,
                    stamp=Stamp.from_seconds(max(ctx.now, 0.0)),
                    pose=Transform(Vec3(self.tail.x, self.tail.y, 0.0), heading),
                )
                ctx.publish(self.descriptor.topic, POSE_STAMPED, goal)
                self.reset()
        elif ev.variant == RAY_MOVE and self.phase == ORIENTING:
            hit = ray_ground_intersect(ev.ray_origin, ev.ray_direction)
            if hit is not None:
                self.tip = hit

    def render(self, ctx: TickContext) -> dict[str, SceneNode]:
        if self.phase != ORIENTING or self.tail is None or self.tip is None:
            return {}
        if self.tail.distance(self.tip) < 1e-6:
            return {}
        return {"preview": arrow_node("preview", self.tail, self.tip, 0.03, PREVIEW_COLOR)}

    def rebase(self, correction: Transform) -> None:
        if self.tail is not None:
            self.tail = apply(correction, self.tail)
        if self.tip is not None:
            self.tip = apply(correction, self.tip)


class CommandTool(Plugin):
    """Maps spoken/typed keywords to command codes on a topic.

    Keywords come from the ``keywords`` setting; anything unmapped is
    ignored silently.
    """

    KIND = "tool"
    TYPE_NAME = "CommandTool"
    MESSAGE_TYPE = None
    SETTINGS = {
        "keywords": ({}, string_map),
    }

    def handle_input(self, ev: InputEvent, ctx: TickContext) -> None:
        if ev.variant != COMMAND:
            return
        code = self.settings["keywords"].get(ev.command)
        if code:
            ctx.publish(self.descriptor.topic, STRING, CommandString(code))
