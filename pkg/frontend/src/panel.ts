// DOM plugin panel: enable/visibility/topic controls per plugin, tool
// activation, and the command palette. State shown is engine-confirmed.

import {
  buildPanelModel,
  commandAction,
  keywordKnown,
  resetToolAction,
  setEnabledAction,
  setTopicAction,
  setVisibilityAction,
} from "./panelstate.js";
import type { InputPayload, PluginState } from "./protocol.js";

export class Panel {
  private plugins: PluginState[] = [];
  activeToolId: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly send: (payload: InputPayload) => void,
    private readonly note: (text: string) => void,
  ) {}

  update(plugins: PluginState[]): void {
    this.plugins = plugins;
    if (this.activeToolId && !plugins.some((p) => p.id === this.activeToolId && p.enabled)) {
      this.activeToolId = null;
    }
    this.render();
  }

  private render(): void {
    const model = buildPanelModel(this.plugins);
    this.root.textContent = "";
    this.root.append(this.section("Displays", model.displays, false));
    this.root.append(this.section("Tools", model.tools, true));
    this.root.append(this.palette());
  }

  private section(title: string, entries: PluginState[], tools: boolean): HTMLElement {
    const box = document.createElement("div");
    box.className = "panel-section";
    const h = document.createElement("h3");
    h.textContent = title;
    box.append(h);
    for (const plugin of entries) {
      box.append(tools ? this.toolRow(plugin) : this.displayRow(plugin));
    }
    return box;
  }

  private baseRow(plugin: PluginState): HTMLElement {
    const row = document.createElement("div");
    row.className = "plugin-row";
    const enabled = document.createElement("input");
    enabled.type = "checkbox";
    enabled.checked = plugin.enabled;
    enabled.title = "enabled";
    enabled.addEventListener("change", () =>
      this.send(setEnabledAction(plugin.id, enabled.checked)),
    );
    const name = document.createElement("span");
    name.className = "plugin-name";
    name.textContent = `${plugin.id} (${plugin.plugin_type})`;
    row.append(enabled, name);
    return row;
  }

  private displayRow(plugin: PluginState): HTMLElement {
    const row = this.baseRow(plugin);
    const vis = document.createElement("button");
    vis.textContent = plugin.visible ? "hide" : "show";
    vis.addEventListener("click", () =>
      this.send(setVisibilityAction(plugin.id, "all", !plugin.visible)),
    );
    row.append(vis);
    if (plugin.plugin_type === "TfDisplay") {
      for (const element of ["labels", "arrows"]) {
        const btn = document.createElement("button");
        btn.textContent = element;
        btn.title = `toggle ${element}`;
        let shown = true;
        btn.addEventListener("click", () => {
          shown = !shown;
          this.send(setVisibilityAction(plugin.id, element, shown));
        });
        row.append(btn);
      }
    }
    if (plugin.topic) {
      const topic = document.createElement("input");
      topic.type = "text";
      topic.value = plugin.topic;
      topic.className = "topic-input";
      topic.addEventListener("keydown", (ev) => {
        if (ev.key === "Enter") this.send(setTopicAction(plugin.id, topic.value));
      });
      row.append(topic);
    }
    return row;
  }

  private toolRow(plugin: PluginState): HTMLElement {
    const row = this.baseRow(plugin);
    const activate = document.createElement("input");
    activate.type = "radio";
    activate.name = "active-tool";
    activate.checked = this.activeToolId === plugin.id;
    activate.title = "route pointer input to this tool";
    activate.addEventListener("change", () => {
      this.activeToolId = plugin.id;
    });
    row.append(activate);
    return row;
  }

  private palette(): HTMLElement {
    const box = document.createElement("div");
    box.className = "panel-section";
    const h = document.createElement("h3");
    h.textContent = "Command palette";
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = "keyword, e.g. start";
    input.id = "command-palette";
    input.addEventListener("keydown", (ev) => {
      if (ev.key !== "Enter") return;
      const word = input.value.trim();
      if (!word) return; // empty submit ignored
      this.send(commandAction(word));
      if (!keywordKnown(this.plugins, word)) {
        this.note(`no keyword match for "${word}"`);
      }
      input.value = "";
    });
    box.append(h, input);
    return box;
  }

  resetActiveTool(): void {
    if (this.activeToolId) {
      this.send(resetToolAction(this.activeToolId));
    }
  }
}
