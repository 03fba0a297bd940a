"""Scene-graph state shared between the engine and UI sessions.

The engine owns one authoritative ``Scene``; every tick it commits the full
desired node map and obtains a ``SceneDiff`` (upserts + deletes) tagged with
a gapless epoch. Clients fold diffs with ``apply_diff`` and can verify their
copy against the ``scene_hash`` embedded in each diff.

Hashing uses FNV-1a 64 over a canonical string with IEEE-754 bit-exact float
encoding, so a JavaScript client can reproduce it without float-formatting
pitfalls.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .bridge.messages import RGBA
from .errors import EpochGap
from .geom import Transform, UnitQuat, Vec3, compose


class Primitive(str, Enum):
    SEGMENT = "segment"    # starts at pose origin, extends scale.x along local +x
    CUBE = "cube"
    SPHERE = "sphere"
    CYLINDER = "cylinder"
    ARROW = "arrow"        # tail at pose origin, tip at +x * scale.x
    LABEL = "label"        # billboard text; scale.z is the text height
    MESH = "mesh"          # preloaded asset named by ``text``


@dataclass(frozen=True, slots=True)
class SceneNode:
    node_id: str
    primitive: Primitive
    pose_world: Transform
    scale: Vec3
    color: RGBA
    text: str = ""
    visible: bool = True


@dataclass(frozen=True, slots=True)
class SceneDiff:
    epoch: int
    upserts: tuple[SceneNode, ...] = ()
    deletes: tuple[str, ...] = ()
    snapshot: bool = False
    scene_hash: str = ""

    def __post_init__(self):
        ids = [n.node_id for n in self.upserts] + list(self.deletes)
        if len(ids) != len(set(ids)):
            raise ValueError("a node_id may appear at most once per diff")

    def is_empty(self) -> bool:
        return not self.upserts and not self.deletes


@dataclass(slots=True)
class SceneSnapshot:
    epoch: int = 0
    nodes: dict[str, SceneNode] = field(default_factory=dict)


def apply_diff(snapshot: SceneSnapshot, diff: SceneDiff) -> SceneSnapshot:
    """Fold one diff into a snapshot (functional; input untouched).

    Raises EpochGap when the diff does not directly follow the snapshot;
    snapshot-diffs reset the state instead.
    """
    if diff.snapshot:
        nodes: dict[str, SceneNode] = {}
    else:
        if diff.epoch != snapshot.epoch + 1:
            raise EpochGap(f"snapshot at epoch {snapshot.epoch}, diff is {diff.epoch}")
        nodes = dict(snapshot.nodes)
    for node in diff.upserts:
        nodes[node.node_id] = node
    for node_id in diff.deletes:
        nodes.pop(node_id, None)
    return SceneSnapshot(epoch=diff.epoch, nodes=nodes)


def _bits(v: float) -> str:
    return struct.pack(">d", float(v)).hex()


def _node_line(n: SceneNode) -> str:
    t = n.pose_world.translation
    q = n.pose_world.rotation
    parts = [
        n.node_id,
        n.primitive.value,
        _bits(t.x), _bits(t.y), _bits(t.z),
        _bits(q.x), _bits(q.y), _bits(q.z), _bits(q.w),
        _bits(n.scale.x), _bits(n.scale.y), _bits(n.scale.z),
        _bits(n.color.r), _bits(n.color.g), _bits(n.color.b), _bits(n.color.a),
        n.text,
        "1" if n.visible else "0",
    ]
    return "|".join(parts)


def fnv1a64(data: bytes) -> str:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def scene_hash(nodes: Mapping[str, SceneNode]) -> str:
    canonical = "\n".join(_node_line(nodes[k]) for k in sorted(nodes))
    return fnv1a64(canonical.encode("utf-8"))


class Scene:
    """Authoritative engine-side scene. Thread-safe."""

    def __init__(self):
        self._lock = threading.RLock()
        self._nodes: dict[str, SceneNode] = {}
        self._epoch = 0

    @property
    def epoch(self) -> int:
        with self._lock:
            return self._epoch

    def nodes(self) -> dict[str, SceneNode]:
        with self._lock:
            return dict(self._nodes)

    def commit(self, desired: Mapping[str, SceneNode]) -> SceneDiff:
        """Advance one epoch towards ``desired``; returns the delta."""
        with self._lock:
            upserts = tuple(
                node for node_id, node in desired.items()
                if self._nodes.get(node_id) != node
            )
            deletes = tuple(node_id for node_id in self._nodes if node_id not in desired)
            self._nodes = dict(desired)
            self._epoch += 1
            return SceneDiff(
                epoch=self._epoch,
                upserts=upserts,
                deletes=deletes,
                scene_hash=scene_hash(self._nodes),
            )

    def snapshot_diff(self) -> SceneDiff:
        """Full state as a resync diff at the current epoch."""
        with self._lock:
            return SceneDiff(
                epoch=self._epoch,
                upserts=tuple(self._nodes.values()),
                snapshot=True,
                scene_hash=scene_hash(self._nodes),
            )

    def snapshot(self) -> SceneSnapshot:
        with self._lock:
            return SceneSnapshot(epoch=self._epoch, nodes=dict(self._nodes))

    def rebase(self, correction: Transform) -> None:
        """Re-root every node: pose <- correction * pose (rigid)."""
        with self._lock:
            self._nodes = {
                node_id: replace(node, pose_world=compose(correction, node.pose_world))
                for node_id, node in self._nodes.items()
            }


# -- wire form (session protocol JSON) -------------------------------------

def node_to_wire(n: SceneNode) -> dict:
    return {
        "id": n.node_id,
        "primitive": n.primitive.value,
        "pose": {
            "t": [n.pose_world.translation.x, n.pose_world.translation.y, n.pose_world.translation.z],
            "q": [n.pose_world.rotation.x, n.pose_world.rotation.y,
                  n.pose_world.rotation.z, n.pose_world.rotation.w],
        },
        "scale": [n.scale.x, n.scale.y, n.scale.z],
        "color": [n.color.r, n.color.g, n.color.b, n.color.a],
        "text": n.text,
        "visible": n.visible,
    }


def node_from_wire(d: Mapping) -> SceneNode:
    pose = d["pose"]
    return SceneNode(
        node_id=d["id"],
        primitive=Primitive(d["primitive"]),
        pose_world=Transform(Vec3(*pose["t"]), UnitQuat(*pose["q"])),
        scale=Vec3(*d["scale"]),
        color=RGBA(*d["color"]),
        text=d.get("text", ""),
        visible=d.get("visible", True),
    )


def diff_to_wire(diff: SceneDiff) -> dict:
    return {
        "epoch": diff.epoch,
        "snapshot": diff.snapshot,
        "upserts": [node_to_wire(n) for n in diff.upserts],
        "deletes": list(diff.deletes),
        "scene_hash": diff.scene_hash,
    }


def diff_from_wire(d: Mapping) -> SceneDiff:
    return SceneDiff(
        epoch=d["epoch"],
        upserts=tuple(node_from_wire(n) for n in d.get("upserts", ())),
        deletes=tuple(d.get("deletes", ())),
        snapshot=d.get("snapshot", False),
        scene_hash=d.get("scene_hash", ""),
    )
