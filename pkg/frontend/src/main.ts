// Viewer bootstrap: connect to the engine session port, fold diffs, draw,
// and surface status. The session endpoint defaults to the page host.

import { Panel } from "./panel.js";
import { SessionClient } from "./protocol.js";
import { SceneStore } from "./scenestore.js";
import { attachInteraction } from "./tools.js";
import { Viewer } from "./viewer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("viewport");
const banner = el<HTMLDivElement>("status-banner");
const epochBadge = el<HTMLSpanElement>("epoch-badge");
const hashBadge = el<HTMLSpanElement>("hash-badge");

const store = new SceneStore();
const viewer = new Viewer(canvas);

let noteTimer: ReturnType<typeof setTimeout> | null = null;
function note(text: string, level: "info" | "warning" | "error" = "info"): void {
  banner.textContent = text;
  banner.dataset.level = level;
  banner.style.display = "block";
  if (noteTimer) clearTimeout(noteTimer);
  noteTimer = setTimeout(() => (banner.style.display = "none"), 4000);
}

const params = new URLSearchParams(location.search);
const url =
  params.get("session") ??
  `ws://${location.hostname || "127.0.0.1"}:${location.port || "9091"}/`;

const client = new SessionClient({
  url,
  onOpen: () => note("connected", "info"),
  onClose: () => note("disconnected, retrying...", "warning"),
  onStatus: (status) => note(status.text, status.level),
  onPlugins: (plugins) => panel.update(plugins),
  onDiff: (diff) => {
    const { result, delta } = store.applyWithDelta(diff);
    if (result === "gap") {
      note("missed an epoch; resyncing", "warning");
      client.resync();
      return;
    }
    viewer.applyDelta(delta);
    epochBadge.textContent = `epoch ${store.epoch}`;
    hashBadge.textContent = store.hashOk ? "scene ok" : "scene hash mismatch";
    hashBadge.dataset.ok = String(store.hashOk);
  },
});

const panel = new Panel(el<HTMLDivElement>("panel"), (payload) => client.sendInput(payload), note);
attachInteraction(canvas, viewer, panel, (payload) => client.sendInput(payload));
client.connect();
