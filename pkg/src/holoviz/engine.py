"""Engine core: the 20 Hz tick loop tying every subsystem together.

Each tick: pending marker detections are applied (world alignment), queued
input events are drained into the tools, every enabled display renders its
desired nodes, and the delta against the authoritative scene goes out to all
attached sessions as one epoch-tagged diff. Plugin failures are isolated:
a throwing plugin is disabled and reported, never crashing the tick.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from typing import Callable

from .align import MarkerDetection, WorldAlignment
from .assets import AssetRegistry
from .bridge.messages import RGBA, TF_MESSAGE
from .clockutil import Clock
from .errors import BridgeError, CycleRejected
from .geom import Transform, Vec3, compose
from .plugins import InputEvent, PluginDescriptor, PluginRegistry, TickContext
from .scene import Primitive, Scene, SceneDiff, SceneNode
from .txgraph import TransformTree

log = logging.getLogger("holoviz.engine")

DiffListener = Callable[[SceneDiff], None]
StatusListener = Callable[[dict], None]

MARKER_NODE_ID = "align/marker"


class Engine:
    def __init__(
        self,
        bus,
        *,
        tick_hz: float = 20.0,
        fixed_frame: str = "map",
        tf_topic: str = "/tf",
        marker_in_rwcs: Transform = Transform.identity(),
        clock: Clock | None = None,
        assets: AssetRegistry | None = None,
    ):
        if tick_hz <= 0:
            raise ValueError("tick_hz must be positive")
        self.bus = bus
        self.clock = clock or Clock()
        self.tick_hz = tick_hz
        self.fixed_frame = fixed_frame
        self.tf_topic = tf_topic
        self.tree = TransformTree()
        self.scene = Scene()
        self.assets = assets or AssetRegistry()
        self.alignment = WorldAlignment(marker_in_rwcs=marker_in_rwcs)
        self.registry = PluginRegistry(bus, self.assets, status=self.status)
        self._inputs: deque[InputEvent] = deque()
        self._detections: deque[MarkerDetection] = deque()
        self._marker_node_pose: Transform | None = None
        self._tf_handle = None
        self._commit_lock = threading.Lock()
        self._diff_listeners: list[DiffListener] = []
        self._status_listeners: list[StatusListener] = []
        self.counters = {"tf_cycle_rejected": 0, "tf_messages": 0}
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    # -- wiring --------------------------------------------------------------

    def attach_tf(self) -> None:
        """Subscribe the transform topic and feed the tree."""
        if self._tf_handle is None:
            self._tf_handle = self.bus.subscribe(self.tf_topic, TF_MESSAGE, self._on_tf)

    def _on_tf(self, msg) -> None:
        self.counters["tf_messages"] += 1
        for st in msg.transforms:
            try:
                self.tree.insert(st)
            except CycleRejected:
                self.counters["tf_cycle_rejected"] += 1

    def register_plugins(self, descriptors: list[PluginDescriptor]) -> None:
        for desc in descriptors:
            self.registry.register(desc)

    # -- session fan-out -------------------------------------------------------

    def attach_session(self, listener: DiffListener) -> SceneDiff:
        """Register a diff listener; returns the snapshot it must start from.

        Atomic with respect to commits, so no epoch can slip between the
        snapshot and the first streamed diff.
        """
        with self._commit_lock:
            self._diff_listeners.append(listener)
            return self.scene.snapshot_diff()

    def detach_session(self, listener: DiffListener) -> None:
        with self._commit_lock:
            if listener in self._diff_listeners:
                self._diff_listeners.remove(listener)

    def resync_diff(self) -> SceneDiff:
        with self._commit_lock:
            return self.scene.snapshot_diff()

    def add_status_listener(self, listener: StatusListener) -> None:
        self._status_listeners.append(listener)

    def status(self, level: str, text: str) -> None:
        getattr(log, "warning" if level == "warning" else "error" if level == "error" else "info")(text)
        payload = {"level": level, "text": text}
        for listener in list(self._status_listeners):
            try:
                listener(payload)
            except Exception:
                pass

    # -- inputs ---------------------------------------------------------------

    def submit_input(self, ev: InputEvent) -> None:
        self._inputs.append(ev)

    def inject_detection(self, det: MarkerDetection) -> None:
        self._detections.append(det)

    # -- tick -----------------------------------------------------------------

    def _context(self) -> TickContext:
        return TickContext(
            now=self.clock.now(),
            tree=self.tree,
            fixed_frame=self.fixed_frame,
            assets=self.assets,
            publish=self._publish,
            status=self.status,
        )

    def _publish(self, topic: str, type_name: str, msg) -> None:
        try:
            self.bus.publish(topic, type_name, msg)
        except BridgeError as exc:
            self.status("error", f"publish to {topic} failed: {exc}")

    def _apply_pending_alignment(self) -> None:
        det: MarkerDetection | None = None
        while self._detections:
            det = self._detections.popleft()  # latest detection wins
        if det is None:
            return
        correction = self.alignment.solve(det)
        # Everything engine-side expressed in scene coordinates re-roots now;
        # data-driven nodes re-render in the same tick, already in RWCS.
        self._marker_node_pose = compose(correction, det.marker_in_vwcs())
        self.registry.rebase(correction)
        self.alignment.aligned = True
        self.status("info", "world alignment applied from marker detection")

    def tick(self) -> SceneDiff:
        ctx = self._context()
        self._apply_pending_alignment()
        while self._inputs:
            self.registry.handle_input(self._inputs.popleft(), ctx)
        desired = self.registry.render_all(ctx)
        if self._marker_node_pose is not None:
            desired[MARKER_NODE_ID] = SceneNode(
                node_id=MARKER_NODE_ID,
                primitive=Primitive.CUBE,
                pose_world=self._marker_node_pose,
                scale=Vec3(0.12, 0.12, 0.004),
                color=RGBA(1.0, 0.85, 0.1, 1.0),
                text="fiducial",
            )
        with self._commit_lock:
            diff = self.scene.commit(desired)
            listeners = list(self._diff_listeners)
        for listener in listeners:
            try:
                listener(diff)
            except Exception as exc:
                log.warning("diff listener failed: %r", exc)
        return diff

    @property
    def epoch(self) -> int:
        return self.scene.epoch

    # -- run loop ---------------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name="engine-tick", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        period = 1.0 / self.tick_hz  # virtual seconds
        next_t = self.clock.now() + period
        while not self._stop.is_set():
            self.tick()
            wall_wait = (next_t - self.clock.now()) / self.clock.scale
            if wall_wait > 0:
                if self._stop.wait(wall_wait):
                    break
            next_t += period
            if next_t < self.clock.now() - 5 * period:
                # Fell badly behind (suspend, debugger): resynchronize.
                next_t = self.clock.now() + period

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None
