"""Codecs for the ROS message types the engine consumes and produces.

Field names and nesting match the ROS definitions (rosbridge JSON form), so
the client interoperates with a stock rosbridge server:

- tf2_msgs/TFMessage
- visualization_msgs/MarkerArray
- geometry_msgs/PoseStamped
- std_msgs/String

Decoding is tolerant of extra fields and leading-slash frame ids (stripped);
encoding is canonical (fixed field order, floats emitted as floats) so that
encodings are byte-stable. Quaternions are renormalized on decode when the
norm is within 1e-3 of one and rejected beyond that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Callable, Mapping

from ..errors import DecodeError, EncodeError
from ..geom import Transform, UnitQuat, Vec3
from ..txgraph import Stamp, StampedTransform, validate_frame

TF_MESSAGE = "tf2_msgs/TFMessage"
MARKER_ARRAY = "visualization_msgs/MarkerArray"
POSE_STAMPED = "geometry_msgs/PoseStamped"
STRING = "std_msgs/String"

QUAT_NORM_TOLERANCE = 1e-3


class MarkerType(IntEnum):
    ARROW = 0
    CUBE = 1
    SPHERE = 2
    CYLINDER = 3
    LINE_STRIP = 4
    LINE_LIST = 5
    TEXT = 9  # TEXT_VIEW_FACING
    MESH_RESOURCE = 10


class MarkerAction(IntEnum):
    ADD = 0
    DELETE = 2
    DELETEALL = 3


@dataclass(frozen=True, slots=True)
class RGBA:
    r: float
    g: float
    b: float
    a: float

    def __post_init__(self):
        for name in ("r", "g", "b", "a"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"color component {name}={v} outside [0,1]")


@dataclass(frozen=True, slots=True)
class TFMessage:
    transforms: tuple[StampedTransform, ...] = ()


@dataclass(frozen=True, slots=True)
class Marker:
    ns: str
    id: int
    marker_type: MarkerType
    action: MarkerAction
    frame_id: str
    stamp: Stamp
    pose: Transform
    scale: Vec3
    color: RGBA
    points: tuple[Vec3, ...] = ()
    text: str = ""
    lifetime: Stamp = Stamp(0, 0)  # duration; zero means forever

    def __post_init__(self):
        validate_frame(self.frame_id)
        if self.marker_type == MarkerType.LINE_LIST and len(self.points) % 2 != 0:
            raise ValueError(f"LINE_LIST needs an even point count, got {len(self.points)}")
        if self.action == MarkerAction.ADD:
            if min(self.scale.x, self.scale.y, self.scale.z) <= 0:
                raise ValueError(f"marker scale must be positive for ADD, got {self.scale}")

    def key(self) -> tuple[str, int]:
        return (self.ns, self.id)


@dataclass(frozen=True, slots=True)
class MarkerArray:
    markers: tuple[Marker, ...] = ()


@dataclass(frozen=True, slots=True)
class PoseStamped:
    frame_id: str
    stamp: Stamp
    pose: Transform
    seq: int = 0

    def __post_init__(self):
        validate_frame(self.frame_id)


@dataclass(frozen=True, slots=True)
class CommandString:
    data: str

    def __post_init__(self):
        if not self.data:
            raise ValueError("command string must be nonempty")


# -- decode helpers -------------------------------------------------------

def _obj(v: Any, path: str) -> Mapping:
    if not isinstance(v, Mapping):
        raise DecodeError(f"{path}: expected object, got {type(v).__name__}")
    return v


def _num(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DecodeError(f"{path}: expected number, got {type(v).__name__}")
    f = float(v)
    if not math.isfinite(f):
        raise DecodeError(f"{path}: non-finite number")
    return f


def _int(v: Any, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise DecodeError(f"{path}: expected integer, got {type(v).__name__}")
    return v


def _str(v: Any, path: str) -> str:
    if not isinstance(v, str):
        raise DecodeError(f"{path}: expected string, got {type(v).__name__}")
    return v


def _frame(v: Any, path: str) -> str:
    name = _str(v, path).lstrip("/")
    try:
        return validate_frame(name)
    except ValueError as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def _stamp(v: Any, path: str) -> Stamp:
    d = _obj(v, path)
    secs = _int(d.get("secs", 0), f"{path}.secs")
    nsecs = _int(d.get("nsecs", 0), f"{path}.nsecs")
    if secs < 0 or nsecs < 0:
        raise DecodeError(f"{path}: negative time")
    return Stamp(secs, nsecs)


def _vec3(v: Any, path: str) -> Vec3:
    d = _obj(v, path)
    return Vec3(_num(d.get("x", 0), f"{path}.x"), _num(d.get("y", 0), f"{path}.y"),
                _num(d.get("z", 0), f"{path}.z"))


def _quat(v: Any, path: str) -> UnitQuat:
    d = _obj(v, path)
    x = _num(d.get("x", 0), f"{path}.x")
    y = _num(d.get("y", 0), f"{path}.y")
    z = _num(d.get("z", 0), f"{path}.z")
    w = _num(d.get("w", 1), f"{path}.w")
    norm = math.sqrt(x * x + y * y + z * z + w * w)
    if abs(norm - 1.0) >= QUAT_NORM_TOLERANCE:
        raise DecodeError(f"{path}: quaternion norm {norm:.4f} too far from 1")
    return UnitQuat(x, y, z, w)


def _pose(v: Any, path: str) -> Transform:
    d = _obj(v, path)
    return Transform(
        translation=_vec3(d.get("position", {}), f"{path}.position"),
        rotation=_quat(d.get("orientation", {}), f"{path}.orientation"),
    )


def _transform(v: Any, path: str) -> Transform:
    d = _obj(v, path)
    return Transform(
        translation=_vec3(d.get("translation", {}), f"{path}.translation"),
        rotation=_quat(d.get("rotation", {}), f"{path}.rotation"),
    )


def _header(v: Any, path: str) -> tuple[int, Stamp, str]:
    d = _obj(v, path)
    seq = _int(d.get("seq", 0), f"{path}.seq")
    return seq, _stamp(d.get("stamp", {}), f"{path}.stamp"), _frame(d.get("frame_id"), f"{path}.frame_id")


# -- encode helpers (canonical field order) -------------------------------

def _enc_stamp(s: Stamp) -> dict:
    return {"secs": s.secs, "nsecs": s.nsecs}


def _enc_header(seq: int, stamp: Stamp, frame_id: str) -> dict:
    return {"seq": seq, "stamp": _enc_stamp(stamp), "frame_id": frame_id}


def _enc_vec3(v: Vec3) -> dict:
    return {"x": float(v.x), "y": float(v.y), "z": float(v.z)}


def _enc_quat(q: UnitQuat) -> dict:
    return {"x": float(q.x), "y": float(q.y), "z": float(q.z), "w": float(q.w)}


def _enc_pose(t: Transform) -> dict:
    return {"position": _enc_vec3(t.translation), "orientation": _enc_quat(t.rotation)}


def _enc_transform(t: Transform) -> dict:
    return {"translation": _enc_vec3(t.translation), "rotation": _enc_quat(t.rotation)}


# -- per-type codecs ------------------------------------------------------

def _decode_tf(payload: Mapping) -> TFMessage:
    entries = payload.get("transforms", [])
    if not isinstance(entries, list):
        raise DecodeError("transforms: expected array")
    out = []
    for k, entry in enumerate(entries):
        d = _obj(entry, f"transforms[{k}]")
        _, stamp, frame = _header(d.get("header", {}), f"transforms[{k}].header")
        child = _frame(d.get("child_frame_id"), f"transforms[{k}].child_frame_id")
        tf = _transform(d.get("transform", {}), f"transforms[{k}].transform")
        try:
            out.append(StampedTransform(parent=frame, child=child, stamp=stamp, transform=tf))
        except ValueError as exc:
            raise DecodeError(f"transforms[{k}]: {exc}") from exc
    return TFMessage(transforms=tuple(out))


def _encode_tf(msg: TFMessage) -> dict:
    return {
        "transforms": [
            {
                "header": _enc_header(0, st.stamp, st.parent),
                "child_frame_id": st.child,
                "transform": _enc_transform(st.transform),
            }
            for st in msg.transforms
        ]
    }


def _decode_marker(entry: Any, path: str) -> Marker:
    d = _obj(entry, path)
    _, stamp, frame = _header(d.get("header", {}), f"{path}.header")
    type_int = _int(d.get("type", 0), f"{path}.type")
    try:
        mtype = MarkerType(type_int)
    except ValueError:
        raise DecodeError(f"{path}.type: unsupported marker type {type_int}") from None
    action_int = _int(d.get("action", 0), f"{path}.action")
    try:
        action = MarkerAction(action_int)
    except ValueError:
        raise DecodeError(f"{path}.action: unsupported action {action_int}") from None
    points_raw = d.get("points", [])
    if not isinstance(points_raw, list):
        raise DecodeError(f"{path}.points: expected array")
    color_d = _obj(d.get("color", {}), f"{path}.color")
    try:
        color = RGBA(
            _num(color_d.get("r", 0), f"{path}.color.r"),
            _num(color_d.get("g", 0), f"{path}.color.g"),
            _num(color_d.get("b", 0), f"{path}.color.b"),
            _num(color_d.get("a", 0), f"{path}.color.a"),
        )
    except ValueError as exc:
        raise DecodeError(f"{path}.color: {exc}") from exc
    try:
        return Marker(
            ns=_str(d.get("ns", ""), f"{path}.ns"),
            id=_int(d.get("id", 0), f"{path}.id"),
            marker_type=mtype,
            action=action,
            frame_id=frame,
            stamp=stamp,
            pose=_pose(d.get("pose", {}), f"{path}.pose"),
            scale=_vec3(d.get("scale", {}), f"{path}.scale"),
            color=color,
            points=tuple(_vec3(p, f"{path}.points[{i}]") for i, p in enumerate(points_raw)),
            text=_str(d.get("text", ""), f"{path}.text"),
            lifetime=_stamp(d.get("lifetime", {}), f"{path}.lifetime"),
        )
    except ValueError as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def _decode_marker_array(payload: Mapping) -> MarkerArray:
    entries = payload.get("markers", [])
    if not isinstance(entries, list):
        raise DecodeError("markers: expected array")
    return MarkerArray(markers=tuple(_decode_marker(e, f"markers[{k}]") for k, e in enumerate(entries)))


def _encode_marker_array(msg: MarkerArray) -> dict:
    return {
        "markers": [
            {
                "header": _enc_header(0, m.stamp, m.frame_id),
                "ns": m.ns,
                "id": m.id,
                "type": int(m.marker_type),
                "action": int(m.action),
                "pose": _enc_pose(m.pose),
                "scale": _enc_vec3(m.scale),
                "color": {"r": float(m.color.r), "g": float(m.color.g),
                          "b": float(m.color.b), "a": float(m.color.a)},
                "lifetime": _enc_stamp(m.lifetime),
                "frame_locked": False,
                "points": [_enc_vec3(p) for p in m.points],
                "colors": [],
                "text": m.text,
                "mesh_resource": "",
                "mesh_use_embedded_materials": False,
            }
            for m in msg.markers
        ]
    }


def _decode_pose_stamped(payload: Mapping) -> PoseStamped:
    seq, stamp, frame = _header(payload.get("header", {}), "header")
    return PoseStamped(frame_id=frame, stamp=stamp, pose=_pose(payload.get("pose", {}), "pose"), seq=seq)


def _encode_pose_stamped(msg: PoseStamped) -> dict:
    return {"header": _enc_header(msg.seq, msg.stamp, msg.frame_id), "pose": _enc_pose(msg.pose)}


def _decode_string(payload: Mapping) -> CommandString:
    data = _str(payload.get("data"), "data")
    if not data:
        raise DecodeError("data: command string must be nonempty")
    return CommandString(data=data)


def _encode_string(msg: CommandString) -> dict:
    return {"data": msg.data}


_CODECS: dict[str, tuple[Callable[[Any], dict], Callable[[Mapping], Any], type]] = {
    TF_MESSAGE: (_encode_tf, _decode_tf, TFMessage),
    MARKER_ARRAY: (_encode_marker_array, _decode_marker_array, MarkerArray),
    POSE_STAMPED: (_encode_pose_stamped, _decode_pose_stamped, PoseStamped),
    STRING: (_encode_string, _decode_string, CommandString),
}


def known_types() -> tuple[str, ...]:
    return tuple(_CODECS)


def decode_msg(type_name: str, payload: Any):
    """Decode a publish payload as ``type_name``; DecodeError on failure."""
    if type_name not in _CODECS:
        raise DecodeError(f"no codec for message type {type_name!r}")
    _, dec, _ = _CODECS[type_name]
    return dec(_obj(payload, "msg"))


def encode_msg(type_name: str, msg: Any) -> dict:
    """Canonical payload dict for ``msg`` under ``type_name``.

    Accepts either the typed object or a raw dict (validated first);
    raises EncodeError when the message cannot encode under the type.
    """
    if type_name not in _CODECS:
        raise EncodeError(f"no codec for message type {type_name!r}")
    enc, dec, py_type = _CODECS[type_name]
    if isinstance(msg, Mapping):
        try:
            msg = dec(msg)
        except DecodeError as exc:
            raise EncodeError(f"payload invalid for {type_name}: {exc}") from exc
    if not isinstance(msg, py_type):
        raise EncodeError(f"expected {py_type.__name__} for {type_name}, got {type(msg).__name__}")
    return enc(msg)
