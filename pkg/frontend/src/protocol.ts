// Session protocol types and the WebSocket client.
//
// The WebSocket implementation is injectable so the same client runs in the
// browser (global WebSocket) and under vitest/node (the `ws` package).

export type Primitive =
  | "segment"
  | "cube"
  | "sphere"
  | "cylinder"
  | "arrow"
  | "label"
  | "mesh";

export interface WirePose {
  t: [number, number, number];
  q: [number, number, number, number];
}

export interface WireNode {
  id: string;
  primitive: Primitive;
  pose: WirePose;
  scale: [number, number, number];
  color: [number, number, number, number];
  text: string;
  visible: boolean;
}

export interface WireDiff {
  epoch: number;
  snapshot: boolean;
  upserts: WireNode[];
  deletes: string[];
  scene_hash: string;
}

export interface PluginState {
  id: string;
  kind: "display" | "tool";
  plugin_type: string;
  topic: string;
  enabled: boolean;
  visible: boolean;
  settings: Record<string, unknown>;
}

export interface StatusPayload {
  level: "info" | "warning" | "error";
  text: string;
}

export interface RayPayload {
  origin: [number, number, number];
  direction: [number, number, number];
}

export type InputPayload =
  | { variant: "tap" | "ray_move"; ray: RayPayload }
  | { variant: "command"; command: string }
  | { variant: "menu"; menu: { plugin_id: string; action: string; value?: unknown } };

export interface DetectPayload {
  marker_in_device: { t: number[]; q: number[] };
  device_in_vwcs: { t: number[]; q: number[] };
  stamp?: number;
}

type ServerMessage =
  | { kind: "diff"; payload: WireDiff }
  | { kind: "status"; payload: StatusPayload }
  | { kind: "plugins"; payload: PluginState[] };

// Minimal surface shared by the browser WebSocket and the `ws` package.
export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WsFactory = (url: string) => WebSocketLike;

export interface SessionClientOptions {
  url: string;
  wsFactory?: WsFactory;
  onDiff?: (diff: WireDiff) => void;
  onPlugins?: (plugins: PluginState[]) => void;
  onStatus?: (status: StatusPayload) => void;
  onOpen?: () => void;
  onClose?: () => void;
  pingIntervalMs?: number;
  reconnect?: boolean;
}

const BACKOFF_START_MS = 500;
const BACKOFF_CAP_MS = 8000;
const PING_INTERVAL_MS = 3000;

export class SessionClient {
  private readonly opts: SessionClientOptions;
  private ws: WebSocketLike | null = null;
  private closed = false;
  private backoffMs = BACKOFF_START_MS;
  private pingTimer: ReturnType<typeof setInterval> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  connected = false;

  constructor(opts: SessionClientOptions) {
    this.opts = opts;
  }

  connect(): void {
    if (this.closed) return;
    const factory =
      this.opts.wsFactory ??
      ((url: string) => new WebSocket(url) as unknown as WebSocketLike);
    const ws = factory(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      this.connected = true;
      this.backoffMs = BACKOFF_START_MS;
      this.startPing();
      this.opts.onOpen?.();
    };
    ws.onmessage = (ev) => this.handleMessage(String(ev.data));
    ws.onerror = () => {
      /* onclose follows */
    };
    ws.onclose = () => {
      this.connected = false;
      this.stopPing();
      this.opts.onClose?.();
      if (!this.closed && this.opts.reconnect !== false) {
        this.reconnectTimer = setTimeout(() => this.connect(), this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
      }
    };
  }

  close(): void {
    this.closed = true;
    this.stopPing();
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.ws?.close();
  }

  private startPing(): void {
    this.stopPing();
    const interval = this.opts.pingIntervalMs ?? PING_INTERVAL_MS;
    this.pingTimer = setInterval(() => this.sendRaw({ kind: "ping" }), interval);
  }

  private stopPing(): void {
    if (this.pingTimer !== null) {
      clearInterval(this.pingTimer);
      this.pingTimer = null;
    }
  }

  private handleMessage(data: string): void {
    let msg: ServerMessage;
    try {
      msg = JSON.parse(data) as ServerMessage;
    } catch {
      return;
    }
    switch (msg.kind) {
      case "diff":
        this.opts.onDiff?.(msg.payload);
        break;
      case "plugins":
        this.opts.onPlugins?.(msg.payload);
        break;
      case "status":
        this.opts.onStatus?.(msg.payload);
        break;
    }
  }

  private sendRaw(obj: unknown): void {
    if (!this.connected || this.ws === null) return;
    try {
      this.ws.send(JSON.stringify(obj));
    } catch {
      /* socket raced shut; reconnect handles it */
    }
  }

  sendInput(payload: InputPayload): void {
    this.sendRaw({ kind: "input", payload });
  }

  sendDetect(payload: DetectPayload): void {
    this.sendRaw({ kind: "detect", payload });
  }

  resync(): void {
    this.sendRaw({ kind: "resync" });
  }
}
