// Pointer interaction: mouse rays stand in for the hand ray. The engine is
// authoritative; we only forward rays, taps and escape resets.

import type { Panel } from "./panel.js";
import type { InputPayload } from "./protocol.js";
import type { Viewer } from "./viewer.js";

const RAY_MOVE_MIN_INTERVAL_MS = 33;

export function attachInteraction(
  canvas: HTMLCanvasElement,
  viewer: Viewer,
  panel: Panel,
  send: (payload: InputPayload) => void,
): void {
  let lastMove = 0;
  let downAt: { x: number; y: number } | null = null;

  canvas.addEventListener("pointermove", (ev) => {
    if (panel.activeToolId === null) return;
    const now = performance.now();
    if (now - lastMove < RAY_MOVE_MIN_INTERVAL_MS) return;
    lastMove = now;
    send({ variant: "ray_move", ray: viewer.rayAt(ev.clientX, ev.clientY) });
  });

  canvas.addEventListener("pointerdown", (ev) => {
    if (ev.button === 0) downAt = { x: ev.clientX, y: ev.clientY };
  });

  canvas.addEventListener("pointerup", (ev) => {
    if (ev.button !== 0 || downAt === null) return;
    const moved = Math.hypot(ev.clientX - downAt.x, ev.clientY - downAt.y);
    downAt = null;
    if (moved > 4) return; // that was a camera drag, not a tap
    if (panel.activeToolId === null) return;
    send({ variant: "tap", ray: viewer.rayAt(ev.clientX, ev.clientY) });
  });

  window.addEventListener("keydown", (ev) => {
    if (ev.key === "Escape") panel.resetActiveTool();
  });
}
