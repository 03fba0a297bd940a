"""Plugin framework: display plugins turn subscribed data into scene nodes
on every tick; tool plugins turn input events into published messages."""

from .base import InputEvent, PluginDescriptor, TickContext, input_event_from_wire
from .registry import PLUGIN_TYPES, PluginRegistry

__all__ = [
    "InputEvent",
    "PluginDescriptor",
    "TickContext",
    "input_event_from_wire",
    "PluginRegistry",
    "PLUGIN_TYPES",
]
