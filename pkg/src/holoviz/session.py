"""UI session server: streams scene diffs out, takes input events in.

Wire format: WebSocket text messages, one JSON object per message.

    server -> client: {"kind": "diff",    "payload": <scene diff>}
                      {"kind": "status",  "payload": {"level", "text"}}
                      {"kind": "plugins", "payload": [<descriptor state>...]}
    client -> server: {"kind": "input",   "payload": <input event>}
                      {"kind": "resync"}
                      {"kind": "ping"}
                      {"kind": "detect",  "payload": <marker detection>}

Every client receives the same epoch sequence: a full snapshot on attach,
then one diff per engine tick. Slow clients (more than ``max_queue`` queued
messages) are dropped with a status notice; clients silent longer than the
keepalive window are closed. The same port answers plain HTTP GETs with the
bundled static viewer when ``static_dir`` is configured.
"""

from __future__ import annotations

import json
import logging
import threading
from collections import deque
from http import HTTPStatus
from pathlib import Path

from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response
from websockets.sync.server import serve

from .align import detection_from_wire
from .engine import Engine
from .errors import BindError
from .plugins import input_event_from_wire
from .scene import diff_to_wire

log = logging.getLogger("holoviz.session")

DEFAULT_PORT = 9091
KEEPALIVE_WINDOW = 10.0
MAX_QUEUE = 128

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript",
    ".mjs": "application/javascript",
    ".css": "text/css",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}


class _Session:
    def __init__(self, conn, now: float, max_queue: int):
        self.conn = conn
        self.queue: deque[dict] = deque()
        self.cv = threading.Condition()
        self.dead = False
        self.dropped_slow = False
        self.last_recv = now
        self.max_queue = max_queue
        self.sent_plugins_version = -1

    def enqueue(self, message: dict) -> None:
        with self.cv:
            if self.dead:
                return
            self.queue.append(message)
            if len(self.queue) > self.max_queue:
                self.dead = True
                self.dropped_slow = True
            self.cv.notify()

    def enqueue_diff(self, diff) -> None:
        self.enqueue({"kind": "diff", "payload": diff_to_wire(diff)})


class SessionServer:
    def __init__(
        self,
        engine: Engine,
        host: str = "0.0.0.0",
        port: int = DEFAULT_PORT,
        *,
        keepalive: float = KEEPALIVE_WINDOW,
        max_queue: int = MAX_QUEUE,
        static_dir: str | Path | None = None,
    ):
        self.engine = engine
        self.host = host
        self._requested_port = port
        self.keepalive = keepalive
        self.max_queue = max_queue
        self.static_dir = Path(static_dir) if static_dir else None
        self._server = None
        self._thread: threading.Thread | None = None
        self._sessions: set[_Session] = set()
        self._sessions_lock = threading.Lock()
        engine.add_status_listener(self._broadcast_status)

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> "SessionServer":
        try:
            self._server = serve(
                self._handle,
                self.host,
                self._requested_port,
                process_request=self._process_request,
            )
        except OSError as exc:
            raise BindError(f"cannot bind session port {self._requested_port}: {exc}") from exc
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="session-server", daemon=True)
        self._thread.start()
        log.info("session server listening on %s:%s", self.host, self.port)
        return self

    @property
    def port(self) -> int:
        if self._server is not None:
            socks = self._server.socket if hasattr(self._server, "socket") else None
            if socks is not None:
                return socks.getsockname()[1]
        return self._requested_port

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server = None
        with self._sessions_lock:
            sessions = list(self._sessions)
        for session in sessions:
            # The listener is down; also close the live connections.
            with session.cv:
                session.dead = True
                session.cv.notify_all()
            try:
                session.conn.close()
            except Exception:
                pass
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def session_count(self) -> int:
        with self._sessions_lock:
            return len(self._sessions)

    # -- broadcast --------------------------------------------------------------

    def _broadcast_status(self, payload: dict) -> None:
        with self._sessions_lock:
            sessions = list(self._sessions)
        for session in sessions:
            session.enqueue({"kind": "status", "payload": payload})

    # -- per-connection ----------------------------------------------------------

    def _handle(self, conn) -> None:
        session = _Session(conn, self.engine.clock.now(), self.max_queue)
        with self._sessions_lock:
            self._sessions.add(session)
        snapshot = self.engine.attach_session(session.enqueue_diff)
        session.enqueue({"kind": "diff", "payload": diff_to_wire(snapshot)})
        writer = threading.Thread(target=self._write_loop, args=(session,),
                                  name="session-writer", daemon=True)
        writer.start()
        try:
            self._read_loop(session)
        finally:
            self.engine.detach_session(session.enqueue_diff)
            with self._sessions_lock:
                self._sessions.discard(session)
            with session.cv:
                session.dead = True
                session.cv.notify_all()
            try:
                conn.close()
            except Exception:
                pass

    def _read_loop(self, session: _Session) -> None:
        while not session.dead:
            try:
                raw = session.conn.recv(timeout=0.5)
            except TimeoutError:
                if self.engine.clock.now() - session.last_recv > self.keepalive:
                    log.info("closing silent session (keepalive window exceeded)")
                    return
                continue
            except (ConnectionClosed, OSError):
                return
            session.last_recv = self.engine.clock.now()
            try:
                message = json.loads(raw)
                self._dispatch(session, message)
            except (ValueError, KeyError, TypeError) as exc:
                session.enqueue({"kind": "status",
                                 "payload": {"level": "error", "text": f"bad message: {exc}"}})

    def _dispatch(self, session: _Session, message: dict) -> None:
        kind = message.get("kind")
        if kind == "input":
            self.engine.submit_input(input_event_from_wire(message.get("payload") or {}))
        elif kind == "resync":
            diff = self.engine.resync_diff()
            with session.cv:
                session.queue.clear()
                session.queue.append({"kind": "diff", "payload": diff_to_wire(diff)})
                session.cv.notify()
        elif kind == "detect":
            self.engine.inject_detection(detection_from_wire(message.get("payload") or {}))
        elif kind == "ping":
            pass  # nothing beyond the last_recv bump
        else:
            raise ValueError(f"unknown message kind {kind!r}")

    def _write_loop(self, session: _Session) -> None:
        while True:
            batch: list[dict] = []
            with session.cv:
                if not session.queue and not session.dead:
                    session.cv.wait(timeout=0.25)
                while session.queue:
                    batch.append(session.queue.popleft())
                dead = session.dead
                dropped = session.dropped_slow
            version = self.engine.registry.version
            if session.sent_plugins_version != version and not dead:
                session.sent_plugins_version = version
                batch.append({"kind": "plugins", "payload": self.engine.registry.describe()})
            for message in batch:
                try:
                    session.conn.send(json.dumps(message))
                except (ConnectionClosed, OSError):
                    dead = True
                    break
            if dead:
                if dropped:
                    try:
                        session.conn.send(json.dumps({
                            "kind": "status",
                            "payload": {"level": "warning",
                                        "text": "session dropped: client too slow"},
                        }))
                    except (ConnectionClosed, OSError):
                        pass
                    log.warning("dropped slow session (queue > %d)", self.max_queue)
                with session.cv:
                    session.dead = True
                try:
                    session.conn.close()
                except Exception:
                    pass
                return

    # -- plain HTTP (static viewer + health) ---------------------------------------

    def _process_request(self, connection, request):
        if "upgrade" in request.headers.get("Connection", "").lower() or \
                request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # proceed with the WebSocket handshake
        path = request.path.split("?", 1)[0]
        if path == "/health":
            return connection.respond(HTTPStatus.OK, "ok\n")
        if self.static_dir is None:
            return connection.respond(HTTPStatus.OK,
                                      "holoviz session endpoint; connect a WebSocket client\n")
        rel = path.lstrip("/") or "index.html"
        base = self.static_dir.resolve()
        target = (base / rel).resolve()
        if not str(target).startswith(str(base)) or not target.is_file():
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        body = target.read_bytes()
        headers = Headers([
            ("Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream")),
            ("Content-Length", str(len(body))),
        ])
        return Response(HTTPStatus.OK, "OK", headers, body)
