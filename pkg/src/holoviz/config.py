"""Engine configuration: one JSON document, flags override file values.

Validation errors name the offending field path (``plugins[2].id: ...``) so
misconfigurations are quick to locate. ``serialize_config(parse_config(x))``
is semantically identical to ``x`` field by field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .geom import Transform, UnitQuat, Vec3
from .plugins import PluginDescriptor
from .plugins.registry import PLUGIN_TYPES

DEFAULT_BRIDGE_URL = "ws://127.0.0.1:9090"
DEFAULT_SESSION_PORT = 9091


@dataclass
class Config:
    bridge_url: str = DEFAULT_BRIDGE_URL
    session_port: int = DEFAULT_SESSION_PORT
    fixed_frame: str = "map"
    tf_topic: str = "/tf"
    tick_hz: float = 20.0
    time_scale: float = 1.0
    log_level: str = "info"
    static_dir: str | None = None
    marker_in_rwcs: Transform = field(default_factory=Transform.identity)
    plugins: list[PluginDescriptor] = field(default_factory=list)


def _fail(path: str, reason: str):
    raise ConfigError(f"{path}: {reason}")


def _get_number(d: Mapping, key: str, path: str, default, positive=False):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {v!r}")
    if positive and v <= 0:
        _fail(f"{path}.{key}", f"must be positive, got {v}")
    return float(v)


def _get_str(d: Mapping, key: str, path: str, default):
    v = d.get(key, default)
    if not isinstance(v, str):
        _fail(f"{path}.{key}", f"expected a string, got {v!r}")
    return v


def _parse_transform(d: Any, path: str) -> Transform:
    if not isinstance(d, Mapping):
        _fail(path, f"expected an object, got {d!r}")
    t = d.get("translation", {})
    q = d.get("rotation", {})
    try:
        return Transform(
            Vec3(float(t.get("x", 0)), float(t.get("y", 0)), float(t.get("z", 0))),
            UnitQuat(float(q.get("x", 0)), float(q.get("y", 0)),
                     float(q.get("z", 0)), float(q.get("w", 1))),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        _fail(path, str(exc))


def _parse_plugin(d: Any, path: str) -> PluginDescriptor:
    if not isinstance(d, Mapping):
        _fail(path, f"expected an object, got {d!r}")
    pid = d.get("id")
    if not isinstance(pid, str) or not pid:
        _fail(f"{path}.id", "must be a nonempty string")
    plugin_type = d.get("plugin_type")
    if plugin_type not in PLUGIN_TYPES:
        _fail(f"{path}.plugin_type",
              f"unknown type {plugin_type!r} (have: {', '.join(sorted(PLUGIN_TYPES))})")
    kind = d.get("kind", PLUGIN_TYPES[plugin_type].KIND)
    if kind not in ("display", "tool"):
        _fail(f"{path}.kind", f"must be 'display' or 'tool', got {kind!r}")
    enabled = d.get("enabled", True)
    if not isinstance(enabled, bool):
        _fail(f"{path}.enabled", f"expected a boolean, got {enabled!r}")
    settings = d.get("settings", {})
    if not isinstance(settings, Mapping):
        _fail(f"{path}.settings", f"expected an object, got {settings!r}")
    return PluginDescriptor(
        id=pid,
        kind=kind,
        plugin_type=plugin_type,
        topic=_get_str(d, "topic", path, ""),
        enabled=enabled,
        settings=dict(settings),
    )


def parse_config(raw: Any, source: str = "config") -> Config:
    if not isinstance(raw, Mapping):
        _fail(source, "top level must be a JSON object")
    known = {
        "bridge_url", "session_port", "fixed_frame", "tf_topic", "tick_hz",
        "time_scale", "log_level", "static_dir", "marker_in_rwcs", "plugins",
    }
    for key in raw:
        if key not in known:
            _fail(f"{source}.{key}", "unknown configuration key")
    session_port = raw.get("session_port", DEFAULT_SESSION_PORT)
    if isinstance(session_port, bool) or not isinstance(session_port, int) \
            or not 0 <= session_port <= 65535:
        _fail(f"{source}.session_port", f"expected a port number, got {session_port!r}")
    static_dir = raw.get("static_dir")
    if static_dir is not None and not isinstance(static_dir, str):
        _fail(f"{source}.static_dir", f"expected a string path, got {static_dir!r}")
    plugins_raw = raw.get("plugins", [])
    if not isinstance(plugins_raw, list):
        _fail(f"{source}.plugins", "expected an array")
    plugins = [_parse_plugin(p, f"{source}.plugins[{i}]") for i, p in enumerate(plugins_raw)]
    seen: set[str] = set()
    for i, p in enumerate(plugins):
        if p.id in seen:
            _fail(f"{source}.plugins[{i}].id", f"duplicate plugin id {p.id!r}")
        seen.add(p.id)
    return Config(
        bridge_url=_get_str(raw, "bridge_url", source, DEFAULT_BRIDGE_URL),
        session_port=session_port,
        fixed_frame=_get_str(raw, "fixed_frame", source, "map"),
        tf_topic=_get_str(raw, "tf_topic", source, "/tf"),
        tick_hz=_get_number(raw, "tick_hz", source, 20.0, positive=True),
        time_scale=_get_number(raw, "time_scale", source, 1.0, positive=True),
        log_level=_get_str(raw, "log_level", source, "info"),
        static_dir=static_dir,
        marker_in_rwcs=_parse_transform(raw.get("marker_in_rwcs", {}),
                                        f"{source}.marker_in_rwcs"),
        plugins=plugins,
    )


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return parse_config(raw, source=str(path))


def serialize_config(cfg: Config) -> dict:
    t, q = cfg.marker_in_rwcs.translation, cfg.marker_in_rwcs.rotation
    out = {
        "bridge_url": cfg.bridge_url,
        "session_port": cfg.session_port,
        "fixed_frame": cfg.fixed_frame,
        "tf_topic": cfg.tf_topic,
        "tick_hz": cfg.tick_hz,
        "time_scale": cfg.time_scale,
        "log_level": cfg.log_level,
        "marker_in_rwcs": {
            "translation": {"x": t.x, "y": t.y, "z": t.z},
            "rotation": {"x": q.x, "y": q.y, "z": q.z, "w": q.w},
        },
        "plugins": [p.as_dict() for p in cfg.plugins],
    }
    if cfg.static_dir is not None:
        out["static_dir"] = cfg.static_dir
    return out
