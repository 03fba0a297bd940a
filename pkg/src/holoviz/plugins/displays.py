"""The three built-in display plugins."""

from __future__ import annotations

import math
from collections import deque

from ..bridge.messages import (
    MARKER_ARRAY,
    POSE_STAMPED,
    Marker,
    MarkerAction,
    MarkerArray,
    MarkerType,
    PoseStamped,
    RGBA,
)
from ..errors import InvalidSetting, TxGraphError
from ..geom import Transform, UnitQuat, Vec3, apply, compose
from ..scene import Primitive, SceneNode
from .base import (
    Plugin,
    PluginDescriptor,
    TickContext,
    arrow_node,
    bool_map,
    boolean,
    opacity,
    positive_float,
    segment_node,
    string,
)

RED = RGBA(0.9, 0.1, 0.1, 1.0)
GREEN = RGBA(0.1, 0.8, 0.1, 1.0)
BLUE = RGBA(0.15, 0.3, 0.95, 1.0)
WHITE = RGBA(1.0, 1.0, 1.0, 1.0)
LINK_GRAY = RGBA(0.75, 0.75, 0.75, 0.8)

# Rotations taking the +x axis onto each triad axis.
_AXIS_ROT = {
    "x": UnitQuat.identity(),
    "y": UnitQuat(0.0, 0.0, math.sin(math.pi / 4), math.cos(math.pi / 4)),
    "z": UnitQuat(0.0, -math.sin(math.pi / 4), 0.0, math.cos(math.pi / 4)),
}
_AXIS_COLOR = {"x": RED, "y": GREEN, "z": BLUE}


class _DisplayPlugin(Plugin):
    KIND = "display"

    def __init__(self, descriptor: PluginDescriptor):
        super().__init__(descriptor)
        self.visible = True

    def set_visibility(self, element: str, flag: bool) -> None:
        if element == "all":
            self.visible = flag
        else:
            raise InvalidSetting(f"{self.TYPE_NAME} has no visibility element {element!r}")


class TfDisplay(_DisplayPlugin):
    """Axis triad per frame, optional name label and arrow to the parent."""

    TYPE_NAME = "TfDisplay"
    MESSAGE_TYPE = None  # reads the transform tree directly
    SETTINGS = {
        "axis_length": (0.15, positive_float),
        "line_thickness": (0.01, positive_float),
        "show_labels": (True, boolean),
        "show_arrows": (True, boolean),
        "frame_visibility": ({}, bool_map),
    }

    def __init__(self, descriptor: PluginDescriptor):
        super().__init__(descriptor)
        self.show_labels: bool = self.settings["show_labels"]
        self.show_arrows: bool = self.settings["show_arrows"]
        self.frame_visibility: dict[str, bool] = dict(self.settings["frame_visibility"])

    def set_visibility(self, element: str, flag: bool) -> None:
        if element == "labels":
            self.show_labels = flag
        elif element == "arrows":
            self.show_arrows = flag
        elif element.startswith("frame/"):
            self.frame_visibility[element[len("frame/"):]] = flag
        else:
            super().set_visibility(element, flag)

    def render(self, ctx: TickContext) -> dict[str, SceneNode]:
        length = self.settings["axis_length"]
        thick = self.settings["line_thickness"]
        out: dict[str, SceneNode] = {}
        poses: dict[str, Transform] = {}
        infos = ctx.tree.frames()
        for info in infos:
            try:
                poses[info.frame] = ctx.world_from(info.frame)
            except TxGraphError:
                continue  # unreachable from the fixed frame right now
        for info in infos:
            frame = info.frame
            if frame not in poses or not self.frame_visibility.get(frame, True):
                continue
            pose = poses[frame]
            for axis in ("x", "y", "z"):
                out[f"{frame}/a{axis}"] = SceneNode(
                    node_id=f"{frame}/a{axis}",
                    primitive=Primitive.SEGMENT,
                    pose_world=Transform(pose.translation, pose.rotation.mul(_AXIS_ROT[axis])),
                    scale=Vec3(length, thick, thick),
                    color=_AXIS_COLOR[axis],
                )
            if self.show_labels:
                out[f"{frame}/label"] = SceneNode(
                    node_id=f"{frame}/label",
                    primitive=Primitive.LABEL,
                    pose_world=Transform(
                        pose.translation.add(Vec3(0, 0, length * 1.2)), UnitQuat.identity()
                    ),
                    scale=Vec3(0, 0, 0.06),
                    color=WHITE,
                    text=frame,
                )
            if self.show_arrows and info.parent is not None and info.parent in poses:
                out[f"{frame}/link"] = arrow_node(
                    f"{frame}/link",
                    pose.translation,
                    poses[info.parent].translation,
                    thick,
                    LINK_GRAY,
                )
        return out


class MarkerArrayDisplay(_DisplayPlugin):
    """Renders marker collections with ADD/DELETE/DELETEALL and lifetimes."""

    TYPE_NAME = "MarkerArrayDisplay"
    MESSAGE_TYPE = MARKER_ARRAY
    SETTINGS = {}

    def __init__(self, descriptor: PluginDescriptor):
        super().__init__(descriptor)
        self._mailbox: deque[MarkerArray] = deque()
        self._live: dict[tuple[str, int], tuple[Marker, float | None]] = {}
        self._warned_mesh: set[tuple[str, int]] = set()

    def on_message(self, msg: MarkerArray) -> None:
        self._mailbox.append(msg)

    def clear_data(self) -> None:
        self._mailbox.clear()
        self._live.clear()

    def _ingest(self, now: float) -> None:
        while self._mailbox:
            for marker in self._mailbox.popleft().markers:
                if marker.action == MarkerAction.DELETEALL:
                    self._live.clear()
                elif marker.action == MarkerAction.DELETE:
                    self._live.pop(marker.key(), None)
                else:
                    life = marker.lifetime.seconds()
                    expiry = now + life if life > 0 else None
                    self._live[marker.key()] = (marker, expiry)

    def render(self, ctx: TickContext) -> dict[str, SceneNode]:
        self._ingest(ctx.now)
        expired = [k for k, (_, expiry) in self._live.items() if expiry is not None and ctx.now >= expiry]
        for k in expired:
            self._live.pop(k)
        out: dict[str, SceneNode] = {}
        for (ns, mid), (marker, _) in self._live.items():
            try:
                world = ctx.world_from(marker.frame_id)
            except TxGraphError:
                continue  # keep the marker; frame may connect later
            self._emit(out, f"{ns}/{mid}", marker, compose(world, marker.pose), ctx)
        return out

    def _emit(self, out: dict[str, SceneNode], key: str, m: Marker, pose: Transform,
              ctx: TickContext) -> None:
        color = m.color
        if m.marker_type == MarkerType.ARROW:
            if len(m.points) >= 2:
                start = apply(pose, m.points[0])
                end = apply(pose, m.points[1])
                if start.distance(end) < 1e-9:
                    return
                out[key] = arrow_node(key, start, end, max(m.scale.x, 1e-3), color)
            else:
                out[key] = SceneNode(key, Primitive.ARROW, pose, m.scale, color)
        elif m.marker_type == MarkerType.CUBE:
            out[key] = SceneNode(key, Primitive.CUBE, pose, m.scale, color)
        elif m.marker_type == MarkerType.SPHERE:
            out[key] = SceneNode(key, Primitive.SPHERE, pose, m.scale, color)
        elif m.marker_type == MarkerType.CYLINDER:
            out[key] = SceneNode(key, Primitive.CYLINDER, pose, m.scale, color)
        elif m.marker_type == MarkerType.TEXT:
            out[key] = SceneNode(key, Primitive.LABEL, pose, Vec3(0, 0, m.scale.z), color, text=m.text)
        elif m.marker_type in (MarkerType.LINE_STRIP, MarkerType.LINE_LIST):
            pts = [apply(pose, p) for p in m.points]
            if m.marker_type == MarkerType.LINE_STRIP:
                pairs = list(zip(pts, pts[1:]))
            else:
                pairs = [(pts[i], pts[i + 1]) for i in range(0, len(pts) - 1, 2)]
            for i, (a, b) in enumerate(pairs):
                out[f"{key}/{i}"] = segment_node(f"{key}/{i}", a, b, max(m.scale.x, 1e-3), color)
        elif m.marker_type == MarkerType.MESH_RESOURCE:
            if (m.ns, m.id) not in self._warned_mesh:
                self._warned_mesh.add((m.ns, m.id))
                ctx.status("warning", f"mesh-resource markers are not supported ({m.ns}/{m.id})")

    def live_keys(self) -> set[tuple[str, int]]:
        return set(self._live)


class StampedPoseDisplay(_DisplayPlugin):
    """Arrow (or configured mesh) at the latest received pose."""

    TYPE_NAME = "StampedPoseDisplay"
    MESSAGE_TYPE = POSE_STAMPED
    SETTINGS = {
        "mesh": ("", string),
        "opacity": (1.0, opacity),
        "arrow_length": (0.6, positive_float),
    }

    @classmethod
    def validate_environment(cls, settings, assets) -> None:
        mesh = settings.get("mesh", "")
        if mesh and not assets.has(mesh):
            raise InvalidSetting(
                f"mesh {mesh!r} is not preloaded (available: {', '.join(assets.names())})"
            )

    def __init__(self, descriptor: PluginDescriptor):
        super().__init__(descriptor)
        self._latest: PoseStamped | None = None

    def on_message(self, msg: PoseStamped) -> None:
        self._latest = msg

    def clear_data(self) -> None:
        self._latest = None

    def render(self, ctx: TickContext) -> dict[str, SceneNode]:
        if self._latest is None:
            return {}
        try:
            world = ctx.world_from(self._latest.frame_id)
        except TxGraphError:
            return {}
        pose = compose(world, self._latest.pose)
        alpha = self.settings["opacity"]
        mesh = self.settings["mesh"]
        if mesh:
            asset = ctx.assets.get(mesh)
            node = SceneNode("pose", Primitive.MESH, pose, asset.footprint,
                             RGBA(1.0, 1.0, 1.0, alpha), text=mesh)
        else:
            length = self.settings["arrow_length"]
            node = SceneNode("pose", Primitive.ARROW, pose,
                             Vec3(length, length * 0.08, length * 0.08),
                             RGBA(0.9, 0.15, 0.15, alpha))
        return {"pose": node}
