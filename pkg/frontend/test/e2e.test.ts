// End-to-end against the live engine and mock robot server: the same
// protocol, store, and panel-action code the browser runs, driven over a
// real WebSocket. WebGL drawing is the only part not exercised here.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";

import {
  commandAction,
  setEnabledAction,
  setVisibilityAction,
} from "../src/panelstate.js";
import {
  SessionClient,
  type PluginState,
  type StatusPayload,
  type WebSocketLike,
} from "../src/protocol.js";
import { SceneStore } from "../src/scenestore.js";

const PYTHON = process.env.PYTHON ?? "python3";
const wsFactory = (url: string) => new WebSocket(url) as unknown as WebSocketLike;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      srv.close(() => resolve(address.port));
    });
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(
  predicate: () => boolean | Promise<boolean>,
  timeoutMs = 15000,
  what = "condition",
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await predicate()) return;
    await sleep(25);
  }
  throw new Error(`timed out waiting for ${what}`);
}

async function httpOk(url: string): Promise<boolean> {
  try {
    const res = await fetch(url);
    return res.ok;
  } catch {
    return false;
  }
}

interface Stack {
  mockros: ChildProcess;
  engine: ChildProcess;
  store: SceneStore;
  client: SessionClient;
  plugins: PluginState[];
  statuses: StatusPayload[];
  mockrosPort: number;
  stop(): Promise<void>;
}

async function launchStack(scenario: string, plugins: object[]): Promise<Stack> {
  const mockrosPort = await freePort();
  const sessionPort = await freePort();
  const logs: string[] = [];

  const mockros = spawn(PYTHON, [
    "-m", "holoviz.mockros",
    "--scenario", scenario,
    "--bind", `127.0.0.1:${mockrosPort}`,
    "--time-scale", "10",
    "--log-level", "warning",
  ]);
  mockros.stderr?.on("data", (d) => logs.push(`mockros: ${d}`));
  await waitFor(
    () => httpOk(`http://127.0.0.1:${mockrosPort}/state`),
    15000,
    "mockros to come up",
  );

  const dir = mkdtempSync(join(tmpdir(), "holoviz-e2e-"));
  const configPath = join(dir, "config.json");
  writeFileSync(configPath, JSON.stringify({
    bridge_url: `ws://127.0.0.1:${mockrosPort}`,
    session_port: sessionPort,
    time_scale: 10,
    log_level: "warning",
    plugins,
  }));
  const engine = spawn(PYTHON, ["-m", "holoviz", "--config", configPath]);
  engine.stderr?.on("data", (d) => logs.push(`engine: ${d}`));

  const store = new SceneStore();
  const pluginsState: PluginState[] = [];
  const statuses: StatusPayload[] = [];
  const client = new SessionClient({
    url: `ws://127.0.0.1:${sessionPort}`,
    wsFactory,
    reconnect: true,
    pingIntervalMs: 1000,
    onDiff: (diff) => {
      if (store.apply(diff) === "gap") client.resync();
    },
    onPlugins: (p) => {
      pluginsState.length = 0;
      pluginsState.push(...p);
    },
    onStatus: (s) => statuses.push(s),
  });
  await waitFor(() => httpOk(`http://127.0.0.1:${sessionPort}/health`), 15000,
                "engine session port");
  client.connect();
  await waitFor(() => client.connected && store.epoch > 0, 15000, "first snapshot");

  const stack: Stack = {
    mockros, engine, store, client,
    plugins: pluginsState, statuses, mockrosPort,
    async stop() {
      client.close();
      engine.kill("SIGTERM");
      mockros.kill("SIGTERM");
      await sleep(300);
      engine.kill("SIGKILL");
      mockros.kill("SIGKILL");
      if (process.env.E2E_DEBUG) console.log(logs.join(""));
    },
  };
  return stack;
}

describe("nav scenario end to end", () => {
  let stack: Stack;

  beforeAll(async () => {
    stack = await launchStack("nav", [
      { id: "tf", plugin_type: "TfDisplay" },
      { id: "viz", plugin_type: "MarkerArrayDisplay", topic: "/viz_markers" },
      { id: "robot", plugin_type: "StampedPoseDisplay", topic: "/robot_pose",
        settings: { mesh: "mobile_robot", opacity: 0.8 } },
      { id: "nav", kind: "tool", plugin_type: "Arrow2dTool",
        topic: "/move_base_simple/goal" },
    ]);
  }, 60000);

  afterAll(async () => {
    await stack?.stop();
  });

  it("streams tf triads and the floor grid into the folded scene", async () => {
    await waitFor(() => stack.store.count("tf/base_link/") >= 3, 15000, "tf triad nodes");
    await waitFor(() => stack.store.count("viz/grid/") > 0, 15000, "grid nodes");
    expect(stack.store.hashOk).toBe(true);
  }, 30000);

  it("lists plugins and toggles TfDisplay off and on via panel actions", async () => {
    await waitFor(() => stack.plugins.length === 4, 10000, "plugin listing");
    stack.client.sendInput(setEnabledAction("tf", false));
    await waitFor(() => stack.store.count("tf/") === 0, 10000, "tf nodes to vanish");
    await waitFor(
      () => stack.plugins.find((p) => p.id === "tf")?.enabled === false,
      10000,
      "panel state to confirm",
    );
    stack.client.sendInput(setEnabledAction("tf", true));
    await waitFor(() => stack.store.count("tf/") > 0, 10000, "tf nodes to return");
  }, 30000);

  it("hides only the frame labels when asked", async () => {
    await waitFor(() => stack.store.count("tf/base_link/label") === 1, 10000, "label");
    stack.client.sendInput(setVisibilityAction("tf", "labels", false));
    await waitFor(() => stack.store.count("tf/base_link/label") === 0, 10000, "label gone");
    expect(stack.store.count("tf/base_link/")).toBeGreaterThan(0);
    stack.client.sendInput(setVisibilityAction("tf", "labels", true));
    await waitFor(() => stack.store.count("tf/base_link/label") === 1, 10000, "label back");
  }, 30000);

  it("places a goal with two clicks and the robot converges in the viewport", async () => {
    const goal = { x: 1.5, y: 0.5 };
    stack.client.sendInput({
      variant: "tap",
      ray: { origin: [goal.x, goal.y, 3], direction: [0, 0, -1] },
    });
    await sleep(150);
    stack.client.sendInput({
      variant: "ray_move",
      ray: { origin: [goal.x + 1, goal.y, 3], direction: [0, 0, -1] },
    });
    await sleep(50);
    // Preview arrow shows while orienting (engine-rendered, not client-side).
    await waitFor(() => stack.store.count("nav/preview") === 1, 10000, "preview arrow");
    stack.client.sendInput({
      variant: "tap",
      ray: { origin: [goal.x + 1, goal.y, 3], direction: [0, 0, -1] },
    });
    await waitFor(() => {
      const robot = stack.store.nodes.get("robot/pose");
      if (!robot) return false;
      const [x, y] = robot.pose.t;
      return Math.hypot(x - goal.x, y - goal.y) < 0.05;
    }, 20000, "robot to reach the goal");
    expect(stack.store.count("nav/preview")).toBe(0);
    expect(stack.store.hashOk).toBe(true);
  }, 40000);
});

describe("handover scenario end to end", () => {
  let stack: Stack;

  beforeAll(async () => {
    stack = await launchStack("handover", [
      { id: "viz", plugin_type: "MarkerArrayDisplay", topic: "/viz_markers" },
      { id: "grasp", plugin_type: "StampedPoseDisplay", topic: "/grasp_pose",
        settings: { mesh: "gripper", opacity: 0.5 } },
      { id: "voice", kind: "tool", plugin_type: "CommandTool",
        topic: "/handover/command", settings: { keywords: { start: "start" } } },
    ]);
  }, 60000);

  afterAll(async () => {
    await stack?.stop();
  });

  it("stays idle before the keyword", async () => {
    await sleep(400);
    expect(stack.store.count("viz/wire/")).toBe(0);
    expect(stack.store.count("grasp/")).toBe(0);
  }, 20000);

  it("typing start brings up the wireframe and the grasp mesh", async () => {
    stack.client.sendInput(commandAction("start"));
    await waitFor(() => stack.store.count("viz/wire/") === 12, 15000, "wireframe");
    await waitFor(() => stack.store.count("grasp/pose") === 1, 15000, "grasp node");
    const grasp = stack.store.nodes.get("grasp/pose");
    expect(grasp?.primitive).toBe("mesh");
    expect(grasp?.text).toBe("gripper");
    expect(grasp?.color[3]).toBeCloseTo(0.5);
    expect(stack.store.hashOk).toBe(true);
  }, 30000);

  it("unmapped keywords publish nothing", async () => {
    const before = stack.store.epoch;
    stack.client.sendInput(commandAction("warp"));
    await waitFor(() => stack.store.epoch > before + 5, 10000, "a few epochs");
    // still exactly one grasp node and 12 wires; no state change
    expect(stack.store.count("viz/wire/")).toBe(12);
    expect(stack.store.count("grasp/pose")).toBe(1);
  }, 20000);
});
