"""rosbridge protocol envelope: one JSON object per wire message.

Encoding is canonical: fixed field order per op, compact separators, UTF-8.
That makes encodings byte-stable for golden-file comparison while decode
accepts any field order and ignores fields we do not model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from ..errors import DecodeError, EncodeError

OPS = ("subscribe", "unsubscribe", "advertise", "unadvertise", "publish", "status")
STATUS_LEVELS = ("info", "warning", "error", "none")

_TOPIC_OPS = ("subscribe", "unsubscribe", "advertise", "unadvertise", "publish")


@dataclass(frozen=True, slots=True)
class BridgeOp:
    """One protocol envelope. ``msg`` is a payload object for publish and a
    human-readable string for status."""

    op: str
    topic: str | None = None
    type: str | None = None
    msg: Any = None
    id: str | None = None
    level: str | None = None
    throttle_rate: int | None = None

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}")
        if self.op in _TOPIC_OPS and not self.topic:
            raise ValueError(f"{self.op} requires a topic")
        if self.op == "advertise" and not self.type:
            raise ValueError("advertise requires a type")
        if self.op == "publish" and not isinstance(self.msg, dict):
            raise ValueError("publish requires a msg object")
        if self.op == "status":
            if self.level not in STATUS_LEVELS:
                raise ValueError(f"status level must be one of {STATUS_LEVELS}")
            if not isinstance(self.msg, str):
                raise ValueError("status requires a msg string")


def encode(op: BridgeOp) -> bytes:
    """Canonical UTF-8 JSON bytes for the envelope."""
    out: dict[str, Any] = {"op": op.op}
    if op.id is not None:
        out["id"] = op.id
    if op.op == "subscribe":
        out["topic"] = op.topic
        if op.type is not None:
            out["type"] = op.type
        if op.throttle_rate is not None:
            out["throttle_rate"] = op.throttle_rate
    elif op.op in ("unsubscribe", "unadvertise"):
        out["topic"] = op.topic
    elif op.op == "advertise":
        out["topic"] = op.topic
        out["type"] = op.type
    elif op.op == "publish":
        out["topic"] = op.topic
        out["msg"] = op.msg
    elif op.op == "status":
        out["level"] = op.level
        out["msg"] = op.msg
    try:
        return json.dumps(out, separators=(",", ":"), ensure_ascii=False, allow_nan=False).encode("utf-8")
    except (ValueError, TypeError) as exc:
        raise EncodeError(f"cannot encode {op.op} envelope: {exc}") from exc


def _reject_constant(name: str):
    raise DecodeError(f"non-finite JSON constant {name!r} not allowed")


def decode(data: bytes | str) -> BridgeOp:
    """Parse one envelope; raises DecodeError with position/reason."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8 at byte {exc.start}") from exc
    try:
        raw = json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"invalid JSON at position {exc.pos}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise DecodeError(f"envelope must be an object, got {type(raw).__name__}")
    op_name = raw.get("op")
    if not isinstance(op_name, str) or op_name not in OPS:
        raise DecodeError(f"unknown or missing op {op_name!r}")

    def opt_str(key: str) -> str | None:
        v = raw.get(key)
        if v is not None and not isinstance(v, str):
            raise DecodeError(f"field {key!r} must be a string")
        return v

    throttle = raw.get("throttle_rate")
    if throttle is not None and (isinstance(throttle, bool) or not isinstance(throttle, int)):
        raise DecodeError("throttle_rate must be an integer")
    try:
        return BridgeOp(
            op=op_name,
            topic=opt_str("topic"),
            type=opt_str("type"),
            msg=raw.get("msg"),
            id=opt_str("id"),
            level=opt_str("level"),
            throttle_rate=throttle,
        )
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
