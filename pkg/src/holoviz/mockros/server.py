"""Mock rosbridge server.

Speaks the same envelope protocol as the real thing: clients subscribe,
advertise and publish; everything published (by clients or by the running
scenario) fans out to every subscriber of that topic in order. Unsupported
ops get a status error back and the connection survives.

Plain HTTP GETs on the same port provide introspection for tests:
``/subscriptions`` lists the live subscription set, ``/state`` the scenario
state.
"""

from __future__ import annotations

import json
import logging
import threading
from http import HTTPStatus
from urllib.parse import urlparse

from websockets.exceptions import ConnectionClosed
from websockets.sync.server import serve

from ..bridge import envelope
from ..bridge.envelope import BridgeOp
from ..bridge.messages import encode_msg
from ..clockutil import Clock
from ..errors import BindError, DecodeError
from .scenarios import Scenario

log = logging.getLogger("holoviz.mockros")


class _Client:
    def __init__(self, conn):
        self.conn = conn
        self.send_lock = threading.Lock()
        self.subscriptions: dict[str, str] = {}  # topic -> declared type
        self.advertised: dict[str, str] = {}

    def send(self, data: bytes) -> bool:
        try:
            with self.send_lock:
                self.conn.send(data.decode("utf-8"))
            return True
        except (ConnectionClosed, OSError):
            return False


class MockRosServer:
    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 9090,
        scenario: Scenario | None = None,
        clock: Clock | None = None,
    ):
        self.host = host
        self._requested_port = port
        self.scenario = scenario
        self.clock = clock or Clock()
        self._server = None
        self._serve_thread: threading.Thread | None = None
        self._scenario_thread: threading.Thread | None = None
        self._stop = threading.Event()
        self._clients: set[_Client] = set()
        self._lock = threading.Lock()
        self._seq: dict[str, int] = {}

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> "MockRosServer":
        try:
            self._server = serve(self._handle, self.host, self._requested_port,
                                 process_request=self._process_request)
        except OSError as exc:
            raise BindError(f"cannot bind {self.host}:{self._requested_port}: {exc}") from exc
        self._serve_thread = threading.Thread(target=self._server.serve_forever,
                                              name="mockros-server", daemon=True)
        self._serve_thread.start()
        if self.scenario is not None:
            self._scenario_thread = threading.Thread(target=self._scenario_loop,
                                                     name="mockros-scenario", daemon=True)
            self._scenario_thread.start()
        log.info("mockros listening on %s:%s (scenario: %s)", self.host, self.port,
                 self.scenario.name if self.scenario else "none")
        return self

    @property
    def port(self) -> int:
        if self._server is not None and hasattr(self._server, "socket"):
            return self._server.socket.getsockname()[1]
        return self._requested_port

    @property
    def url(self) -> str:
        return f"ws://{self.host}:{self.port}"

    def stop(self) -> None:
        self._stop.set()
        self.clock.stop()
        if self._server is not None:
            self._server.shutdown()
            self._server = None
        with self._lock:
            clients = list(self._clients)
        for client in clients:
            # shutdown() only stops the listener; live connections must be
            # closed explicitly so peers observe the outage.
            try:
                client.conn.close()
            except Exception:
                pass
        for t in (self._serve_thread, self._scenario_thread):
            if t is not None:
                t.join(timeout=2.0)
        self._serve_thread = self._scenario_thread = None

    # -- publishing ------------------------------------------------------------

    def publish(self, topic: str, type_name: str, msg) -> None:
        """Fan a message out to every subscriber, stamping per-topic seq."""
        payload = msg if isinstance(msg, dict) else encode_msg(type_name, msg)
        with self._lock:
            seq = self._seq.get(topic, 0) + 1
            self._seq[topic] = seq
            if isinstance(payload.get("header"), dict):
                payload["header"]["seq"] = seq
            targets = [c for c in self._clients if topic in c.subscriptions]
            if self.scenario is not None and topic in self.scenario.listened_topics():
                self.scenario.on_message(topic, payload)
            data = envelope.encode(BridgeOp(op="publish", topic=topic, msg=payload))
            for client in targets:
                if not client.send(data):
                    self._clients.discard(client)

    # -- client handling ---------------------------------------------------------

    def _handle(self, conn) -> None:
        client = _Client(conn)
        with self._lock:
            self._clients.add(client)
        try:
            while True:
                try:
                    raw = conn.recv()
                except (ConnectionClosed, OSError):
                    return
                try:
                    op = envelope.decode(raw)
                except DecodeError as exc:
                    client.send(envelope.encode(BridgeOp(
                        op="status", level="error", msg=f"undecodable envelope: {exc}")))
                    continue
                self._dispatch(client, op)
        finally:
            with self._lock:
                self._clients.discard(client)

    def _dispatch(self, client: _Client, op: BridgeOp) -> None:
        if op.op == "subscribe":
            with self._lock:
                client.subscriptions[op.topic] = op.type or ""
        elif op.op == "unsubscribe":
            with self._lock:
                client.subscriptions.pop(op.topic, None)
        elif op.op == "advertise":
            with self._lock:
                client.advertised[op.topic] = op.type or ""
        elif op.op == "unadvertise":
            with self._lock:
                client.advertised.pop(op.topic, None)
        elif op.op == "publish":
            self.publish(op.topic, "", dict(op.msg))
        else:
            client.send(envelope.encode(BridgeOp(
                op="status", id=op.id, level="error",
                msg=f"op {op.op!r} is not supported by mockros")))

    # -- scenario loop --------------------------------------------------------------

    def _scenario_loop(self) -> None:
        period = 1.0 / self.scenario.params.tf_rate  # simulated seconds
        next_t = self.clock.now() + period
        while not self._stop.is_set():
            try:
                self.scenario.step(self.clock.now(), period, self.publish)
            except Exception as exc:
                log.error("scenario step failed: %r", exc)
            if not self.clock.sleep_until(next_t):
                return
            next_t += period

    # -- introspection ----------------------------------------------------------------

    def subscription_set(self) -> list[dict]:
        with self._lock:
            seen: dict[tuple[str, str], int] = {}
            for client in self._clients:
                for topic, type_name in client.subscriptions.items():
                    seen[(topic, type_name)] = seen.get((topic, type_name), 0) + 1
        return [
            {"topic": topic, "type": type_name, "clients": count}
            for (topic, type_name), count in sorted(seen.items())
        ]

    def _process_request(self, connection, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None
        path = urlparse(request.path).path
        if path == "/subscriptions":
            body = json.dumps({"subscriptions": self.subscription_set()})
        elif path == "/state":
            body = json.dumps(self.scenario.state_dict() if self.scenario else {})
        else:
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        return connection.respond(HTTPStatus.OK, body + "\n")
