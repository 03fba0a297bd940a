"""Plugin registry: lifecycle, subscriptions, the tick fan-in, input routing.

A failing plugin is disabled and surfaced as a status message; it never
takes the tick loop down with it.
"""

from __future__ import annotations

import threading
from dataclasses import replace
from typing import Callable

from ..assets import AssetRegistry
from ..errors import (
    DuplicateId,
    InvalidSetting,
    InvalidTopic,
    PluginError,
    UnknownId,
    UnknownType,
)
from ..geom import Transform
from ..scene import SceneNode
from .base import MENU, InputEvent, Plugin, PluginDescriptor, TickContext
from .displays import MarkerArrayDisplay, StampedPoseDisplay, TfDisplay
from .tools import Arrow2dTool, CommandTool

PLUGIN_TYPES: dict[str, type[Plugin]] = {
    cls.TYPE_NAME: cls
    for cls in (TfDisplay, MarkerArrayDisplay, StampedPoseDisplay, Arrow2dTool, CommandTool)
}

StatusFn = Callable[[str, str], None]


class _Entry:
    def __init__(self, plugin: Plugin):
        self.plugin = plugin
        self.subscription = None


class PluginRegistry:
    def __init__(self, bus, assets: AssetRegistry | None = None, status: StatusFn | None = None):
        self._bus = bus
        self._assets = assets or AssetRegistry()
        self._status = status or (lambda level, text: None)
        self._entries: dict[str, _Entry] = {}
        self._lock = threading.RLock()
        self.version = 0  # bumped on any state change the UI panel shows

    # -- lifecycle ---------------------------------------------------------

    def register(self, descriptor: PluginDescriptor) -> None:
        with self._lock:
            if descriptor.id in self._entries:
                raise DuplicateId(descriptor.id)
            cls = PLUGIN_TYPES.get(descriptor.plugin_type)
            if cls is None:
                raise UnknownType(descriptor.plugin_type)
            if descriptor.kind != cls.KIND:
                raise UnknownType(
                    f"{descriptor.plugin_type} is a {cls.KIND} plugin, not {descriptor.kind!r}"
                )
            needs_topic = cls.MESSAGE_TYPE is not None or cls.KIND == "tool"
            if needs_topic and not descriptor.topic:
                raise InvalidTopic(f"{descriptor.plugin_type} requires a topic")
            if cls.MESSAGE_TYPE is None and cls.KIND == "display" and descriptor.topic:
                raise InvalidTopic(f"{descriptor.plugin_type} does not take a topic")
            settings = cls.validate_settings(descriptor.settings)
            cls.validate_environment(settings, self._assets)
            plugin = cls(descriptor)
            entry = _Entry(plugin)
            self._entries[descriptor.id] = entry
            if descriptor.enabled:
                self._open_subscription(entry)
            self.version += 1

    def _open_subscription(self, entry: _Entry) -> None:
        plugin = entry.plugin
        if plugin.MESSAGE_TYPE is not None and entry.subscription is None:
            entry.subscription = self._bus.subscribe(
                plugin.descriptor.topic, plugin.MESSAGE_TYPE, plugin.on_message
            )

    def _close_subscription(self, entry: _Entry) -> None:
        if entry.subscription is not None:
            self._bus.unsubscribe(entry.subscription)
            entry.subscription = None

    def _entry(self, plugin_id: str) -> _Entry:
        entry = self._entries.get(plugin_id)
        if entry is None:
            raise UnknownId(plugin_id)
        return entry

    # -- panel operations ----------------------------------------------------

    def set_enabled(self, plugin_id: str, flag: bool) -> None:
        with self._lock:
            entry = self._entry(plugin_id)
            if entry.plugin.descriptor.enabled == flag:
                return
            entry.plugin.descriptor.enabled = flag
            if flag:
                self._open_subscription(entry)
            else:
                self._close_subscription(entry)
            self.version += 1

    def set_visibility(self, plugin_id: str, element: str, flag: bool) -> None:
        with self._lock:
            self._entry(plugin_id).plugin.set_visibility(element, flag)
            self.version += 1

    def set_topic(self, plugin_id: str, topic: str) -> None:
        with self._lock:
            entry = self._entry(plugin_id)
            plugin = entry.plugin
            if plugin.MESSAGE_TYPE is None and plugin.KIND == "display":
                raise InvalidTopic(f"{plugin.TYPE_NAME} does not take a topic")
            if not topic:
                raise InvalidTopic("topic must be nonempty")
            if topic == plugin.descriptor.topic:
                return
            self._close_subscription(entry)
            plugin.descriptor.topic = topic
            plugin.clear_data()
            if plugin.descriptor.enabled:
                self._open_subscription(entry)
            self.version += 1

    def describe(self) -> list[dict]:
        with self._lock:
            out = []
            for entry in self._entries.values():
                d = entry.plugin.descriptor.as_dict()
                d["visible"] = getattr(entry.plugin, "visible", True)
                out.append(d)
            return out

    def plugin(self, plugin_id: str) -> Plugin:
        with self._lock:
            return self._entry(plugin_id).plugin

    # -- tick path -----------------------------------------------------------

    def handle_input(self, ev: InputEvent, ctx: TickContext) -> None:
        if ev.variant == MENU:
            self._handle_menu(ev, ctx)
            return
        with self._lock:
            tools = [e.plugin for e in self._entries.values()
                     if e.plugin.KIND == "tool" and e.plugin.descriptor.enabled]
        for tool in tools:
            try:
                tool.handle_input(ev, ctx)
            except Exception as exc:
                self._disable_broken(tool.descriptor.id, exc)

    def _handle_menu(self, ev: InputEvent, ctx: TickContext) -> None:
        try:
            action = ev.menu_action
            if action == "set_enabled":
                self.set_enabled(ev.menu_plugin, bool(ev.menu_value))
            elif action == "set_visibility":
                value = ev.menu_value or {}
                self.set_visibility(ev.menu_plugin, str(value.get("element", "all")),
                                    bool(value.get("flag", True)))
            elif action == "set_topic":
                self.set_topic(ev.menu_plugin, str(ev.menu_value or ""))
            else:
                with self._lock:
                    plugin = self._entry(ev.menu_plugin).plugin
                plugin.menu_action(action, ev.menu_value, ctx)
                with self._lock:
                    self.version += 1
        except PluginError as exc:
            self._status("error", f"menu action rejected: {exc}")

    def render_all(self, ctx: TickContext) -> dict[str, SceneNode]:
        with self._lock:
            entries = [(pid, e.plugin) for pid, e in self._entries.items()
                       if e.plugin.descriptor.enabled]
        desired: dict[str, SceneNode] = {}
        for plugin_id, plugin in entries:
            if not getattr(plugin, "visible", True):
                continue
            try:
                nodes = plugin.render(ctx)
            except Exception as exc:
                self._disable_broken(plugin_id, exc)
                continue
            for suffix, node in nodes.items():
                node_id = f"{plugin_id}/{suffix}"
                desired[node_id] = replace(node, node_id=node_id)
        return desired

    def _disable_broken(self, plugin_id: str, exc: Exception) -> None:
        try:
            self.set_enabled(plugin_id, False)
        except UnknownId:
            pass
        self._status("error", f"plugin {plugin_id!r} disabled after error: {exc!r}")

    def rebase(self, correction: Transform) -> None:
        with self._lock:
            plugins = [e.plugin for e in self._entries.values()]
        for plugin in plugins:
            plugin.rebase(correction)
