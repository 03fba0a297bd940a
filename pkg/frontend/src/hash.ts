// FNV-1a 64 scene hash, bit-identical to the engine's implementation:
// nodes sorted by id, fields joined by "|" with floats as big-endian
// IEEE-754 binary64 hex, lines joined by "\n".

import type { WireNode } from "./protocol.js";

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = 0xffffffffffffffffn;

export function fnv1a64(data: Uint8Array | string): string {
  const bytes = typeof data === "string" ? new TextEncoder().encode(data) : data;
  let h = FNV_OFFSET;
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * FNV_PRIME) & MASK64;
  }
  return h.toString(16).padStart(16, "0");
}

const view = new DataView(new ArrayBuffer(8));

export function f64hex(v: number): string {
  view.setFloat64(0, v, false);
  let out = "";
  for (let i = 0; i < 8; i++) {
    out += view.getUint8(i).toString(16).padStart(2, "0");
  }
  return out;
}

function nodeLine(n: WireNode): string {
  const parts = [
    n.id,
    n.primitive,
    f64hex(n.pose.t[0]),
    f64hex(n.pose.t[1]),
    f64hex(n.pose.t[2]),
    f64hex(n.pose.q[0]),
    f64hex(n.pose.q[1]),
    f64hex(n.pose.q[2]),
    f64hex(n.pose.q[3]),
    f64hex(n.scale[0]),
    f64hex(n.scale[1]),
    f64hex(n.scale[2]),
    f64hex(n.color[0]),
    f64hex(n.color[1]),
    f64hex(n.color[2]),
    f64hex(n.color[3]),
    n.text,
    n.visible ? "1" : "0",
  ];
  return parts.join("|");
}

export function sceneHash(nodes: Map<string, WireNode>): string {
  const ids = [...nodes.keys()].sort();
  const canonical = ids.map((id) => nodeLine(nodes.get(id)!)).join("\n");
  return fnv1a64(canonical);
}
