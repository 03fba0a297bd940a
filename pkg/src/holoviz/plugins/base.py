"""Plugin contracts: descriptors, input events, tick context, base class."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from ..assets import AssetRegistry
from ..errors import InvalidSetting
from ..geom import Transform, UnitQuat, Vec3
from ..scene import SceneNode
from ..txgraph import TransformTree

RAY_MOVE = "ray_move"
TAP = "tap"
COMMAND = "command"
MENU = "menu"

_VARIANTS = (RAY_MOVE, TAP, COMMAND, MENU)


@dataclass(frozen=True, slots=True)
class InputEvent:
    variant: str
    ray_origin: Vec3 | None = None
    ray_direction: Vec3 | None = None
    command: str = ""
    menu_plugin: str = ""
    menu_action: str = ""
    menu_value: Any = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown input variant {self.variant!r}")
        if self.variant in (RAY_MOVE, TAP):
            if self.ray_origin is None or self.ray_direction is None:
                raise ValueError(f"{self.variant} needs a ray")
            if self.ray_direction.norm() < 1e-12:
                raise ValueError("ray direction must be nonzero")


def input_event_from_wire(d: Mapping) -> InputEvent:
    """Parse the session-protocol input payload."""
    variant = d.get("variant")
    ray = d.get("ray") or {}
    origin = Vec3(*ray["origin"]) if "origin" in ray else None
    direction = Vec3(*ray["direction"]) if "direction" in ray else None
    menu = d.get("menu") or {}
    try:
        return InputEvent(
            variant=variant,
            ray_origin=origin,
            ray_direction=direction,
            command=str(d.get("command", "")),
            menu_plugin=str(menu.get("plugin_id", "")),
            menu_action=str(menu.get("action", "")),
            menu_value=menu.get("value"),
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad input event: {exc}") from exc


@dataclass
class PluginDescriptor:
    id: str
    kind: str  # "display" | "tool"
    plugin_type: str
    topic: str = ""
    enabled: bool = True
    settings: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "plugin_type": self.plugin_type,
            "topic": self.topic,
            "enabled": self.enabled,
            "settings": dict(self.settings),
        }


@dataclass
class TickContext:
    """What a plugin may touch during one tick or input event."""

    now: float
    tree: TransformTree
    fixed_frame: str
    assets: AssetRegistry
    publish: Callable[[str, str, Any], None]
    status: Callable[[str, str], None]

    def world_from(self, frame: str) -> Transform:
        """Pose of ``frame`` in the fixed (world) frame at the latest time."""
        if frame == self.fixed_frame:
            return Transform.identity()
        return self.tree.lookup(self.fixed_frame, frame)


# Settings schema entry: (default value, validator). Validators raise
# InvalidSetting; registration rejects unknown keys.
Schema = dict[str, tuple[Any, Callable[[Any], Any]]]


def positive_float(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise InvalidSetting(f"expected a positive number, got {v!r}")
    return float(v)


def boolean(v) -> bool:
    if not isinstance(v, bool):
        raise InvalidSetting(f"expected a boolean, got {v!r}")
    return v


def string(v) -> str:
    if not isinstance(v, str):
        raise InvalidSetting(f"expected a string, got {v!r}")
    return v


def opacity(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v <= 1:
        raise InvalidSetting(f"opacity must be in (0, 1], got {v!r}")
    return float(v)


def string_map(v) -> dict:
    if not isinstance(v, dict) or not all(
        isinstance(k, str) and isinstance(val, str) for k, val in v.items()
    ):
        raise InvalidSetting(f"expected a string-to-string map, got {v!r}")
    return dict(v)


def bool_map(v) -> dict:
    if not isinstance(v, dict) or not all(
        isinstance(k, str) and isinstance(val, bool) for k, val in v.items()
    ):
        raise InvalidSetting(f"expected a string-to-bool map, got {v!r}")
    return dict(v)


class Plugin:
    KIND = "display"
    TYPE_NAME = "Plugin"
    MESSAGE_TYPE: str | None = None  # subscribed wire type, if any
    SETTINGS: Schema = {}

    def __init__(self, descriptor: PluginDescriptor):
        self.descriptor = descriptor
        self.settings = self.validate_settings(descriptor.settings)

    @classmethod
    def validate_settings(cls, raw: Mapping) -> dict:
        out = {key: default for key, (default, _) in cls.SETTINGS.items()}
        for key, value in raw.items():
            if key not in cls.SETTINGS:
                raise InvalidSetting(f"{cls.TYPE_NAME} has no setting {key!r}")
            out[key] = cls.SETTINGS[key][1](value)
        return out

    @classmethod
    def validate_environment(cls, settings: Mapping, assets: AssetRegistry) -> None:
        """Hook for checks that need engine resources (e.g. mesh names)."""

    # -- data path ---------------------------------------------------------

    def on_message(self, msg) -> None:
        """Bridge dispatcher deposits a decoded message (displays only)."""

    def clear_data(self) -> None:
        """Drop buffered topic data (called when the topic changes)."""

    # -- tick path ---------------------------------------------------------

    def render(self, ctx: TickContext) -> dict[str, SceneNode]:
        """Desired nodes keyed by a plugin-local suffix."""
        return {}

    def handle_input(self, ev: InputEvent, ctx: TickContext) -> None:
        """Tools react to input events (drained at tick start)."""

    def menu_action(self, action: str, value, ctx: TickContext) -> None:
        raise InvalidSetting(f"{self.TYPE_NAME} has no menu action {action!r}")

    def set_visibility(self, element: str, flag: bool) -> None:
        raise InvalidSetting(f"{self.TYPE_NAME} has no visibility element {element!r}")

    def rebase(self, correction: Transform) -> None:
        """Re-express any world-frame state after a world alignment."""


def segment_node(node_id: str, start: Vec3, end: Vec3, thickness: float, color,
                 visible: bool = True) -> SceneNode:
    """Segment from start to end; zero length degrades to identity heading."""
    from ..geom import quat_align_x
    from ..scene import Primitive

    direction = end.sub(start)
    length = direction.norm()
    rot = UnitQuat.identity() if length < 1e-9 else quat_align_x(direction)
    return SceneNode(
        node_id=node_id,
        primitive=Primitive.SEGMENT,
        pose_world=Transform(start, rot),
        scale=Vec3(length, thickness, thickness),
        color=color,
        visible=visible,
    )


def arrow_node(node_id: str, start: Vec3, end: Vec3, thickness: float, color,
               visible: bool = True) -> SceneNode:
    from ..geom import quat_align_x
    from ..scene import Primitive

    direction = end.sub(start)
    length = direction.norm()
    rot = UnitQuat.identity() if length < 1e-9 else quat_align_x(direction)
    return SceneNode(
        node_id=node_id,
        primitive=Primitive.ARROW,
        pose_world=Transform(start, rot),
        scale=Vec3(length, thickness, thickness),
        color=color,
        visible=visible,
    )
