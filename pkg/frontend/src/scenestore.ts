// Client-side folded copy of the scene, kept in lockstep with the engine's
// epoch sequence. Any gap means a missed diff: the caller must resync.

import { sceneHash } from "./hash.js";
import type { WireDiff, WireNode } from "./protocol.js";

export type ApplyResult = "applied" | "gap";

export interface StoreDelta {
  upserted: WireNode[];
  deleted: string[];
  reset: boolean;
}

export class SceneStore {
  epoch = 0;
  nodes = new Map<string, WireNode>();
  hashOk = true;
  lastHash = "";

  apply(diff: WireDiff): ApplyResult {
    if (!diff.snapshot && diff.epoch !== this.epoch + 1) {
      return "gap";
    }
    if (diff.snapshot) {
      this.nodes.clear();
    }
    for (const node of diff.upserts) {
      this.nodes.set(node.id, node);
    }
    for (const id of diff.deletes) {
      this.nodes.delete(id);
    }
    this.epoch = diff.epoch;
    if (diff.scene_hash) {
      this.lastHash = sceneHash(this.nodes);
      this.hashOk = this.lastHash === diff.scene_hash;
    }
    return "applied";
  }

  /** Like apply, but reports exactly what changed (for renderers). */
  applyWithDelta(diff: WireDiff): { result: ApplyResult; delta: StoreDelta } {
    const reset = diff.snapshot;
    const result = this.apply(diff);
    if (result === "gap") {
      return { result, delta: { upserted: [], deleted: [], reset: false } };
    }
    return {
      result,
      delta: { upserted: diff.upserts, deleted: diff.deletes, reset },
    };
  }

  count(prefix?: string): number {
    if (!prefix) return this.nodes.size;
    let n = 0;
    for (const id of this.nodes.keys()) {
      if (id.startsWith(prefix)) n++;
    }
    return n;
  }

  byPrefix(prefix: string): WireNode[] {
    return [...this.nodes.values()].filter((n) => n.id.startsWith(prefix));
  }
}
