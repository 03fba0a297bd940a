// Pure view-model of the plugin panel plus the input payloads its controls
// emit. The panel never flips state optimistically: it renders only what
// the engine confirmed through the last "plugins" message.

import type { InputPayload, PluginState } from "./protocol.js";

export interface PanelModel {
  displays: PluginState[];
  tools: PluginState[];
}

export function buildPanelModel(plugins: PluginState[]): PanelModel {
  const sorted = [...plugins].sort((a, b) => a.id.localeCompare(b.id));
  return {
    displays: sorted.filter((p) => p.kind === "display"),
    tools: sorted.filter((p) => p.kind === "tool"),
  };
}

export function setEnabledAction(id: string, flag: boolean): InputPayload {
  return { variant: "menu", menu: { plugin_id: id, action: "set_enabled", value: flag } };
}

export function setVisibilityAction(id: string, element: string, flag: boolean): InputPayload {
  return {
    variant: "menu",
    menu: { plugin_id: id, action: "set_visibility", value: { element, flag } },
  };
}

export function setTopicAction(id: string, topic: string): InputPayload {
  return { variant: "menu", menu: { plugin_id: id, action: "set_topic", value: topic } };
}

export function resetToolAction(id: string): InputPayload {
  return { variant: "menu", menu: { plugin_id: id, action: "reset" } };
}

export function commandAction(word: string): InputPayload {
  return { variant: "command", command: word };
}

/** Does any enabled command tool map this keyword? Purely informational;
 * the engine stays authoritative. */
export function keywordKnown(plugins: PluginState[], word: string): boolean {
  return plugins.some(
    (p) =>
      p.plugin_type === "CommandTool" &&
      p.enabled &&
      typeof p.settings === "object" &&
      p.settings !== null &&
      Object.prototype.hasOwnProperty.call(
        (p.settings as { keywords?: Record<string, string> }).keywords ?? {},
        word,
      ),
  );
}
