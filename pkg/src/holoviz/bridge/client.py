"""rosbridge client session.

Transports:
- ``ws://`` / ``wss://``  WebSocket framing (the standard rosbridge transport)
- ``tcp://``              newline-delimited JSON over a raw TCP socket

The reader thread owns the socket and only parses envelopes; decoded
messages are handed to subscription handlers on a separate dispatcher
thread, in per-topic arrival order. Incoming data is buffered per
subscription in a bounded queue (drop-oldest) because displays only need
recent data.

On connection loss the session reconnects with exponential backoff
(0.5 s doubling to an 8 s cap by default) and re-issues every active
subscription and advertisement. ConnectRefused is raised once the retry
budget is exhausted.
"""

from __future__ import annotations

import socket
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol
from urllib.parse import urlparse

from websockets.exceptions import WebSocketException
from websockets.sync.client import connect as ws_connect

from ..errors import BridgeError, ConnectRefused, DecodeError
from . import envelope
from .envelope import BridgeOp
from .messages import decode_msg, encode_msg, known_types

DEFAULT_QUEUE_DEPTH = 64

StatusHandler = Callable[[str, str], None]


class TopicBus(Protocol):
    """Minimal pub/sub surface the engine needs from a transport."""

    def subscribe(self, topic: str, type: str, handler: Callable[[Any], None]): ...

    def unsubscribe(self, handle) -> None: ...

    def publish(self, topic: str, type: str, msg: Any) -> None: ...


class _Closed(Exception):
    pass


class _WsTransport:
    def __init__(self, url: str, timeout: float):
        self._conn = ws_connect(url, open_timeout=timeout, close_timeout=1.0)

    def send(self, data: bytes) -> None:
        try:
            self._conn.send(data.decode("utf-8"))
        except (WebSocketException, OSError) as exc:
            raise _Closed(str(exc)) from exc

    def recv(self) -> str | bytes:
        try:
            return self._conn.recv()
        except (WebSocketException, OSError, EOFError) as exc:
            raise _Closed(str(exc)) from exc

    def close(self) -> None:
        try:
            self._conn.close()
        except Exception:
            pass


class _TcpTransport:
    def __init__(self, host: str, port: int, timeout: float):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._sock.settimeout(None)
        self._rfile = self._sock.makefile("rb")
        self._wlock = threading.Lock()

    def send(self, data: bytes) -> None:
        try:
            with self._wlock:
                self._sock.sendall(data + b"\n")
        except OSError as exc:
            raise _Closed(str(exc)) from exc

    def recv(self) -> bytes:
        try:
            line = self._rfile.readline()
        except (OSError, ValueError) as exc:
            raise _Closed(str(exc)) from exc
        if not line:
            raise _Closed("connection closed")
        return line.rstrip(b"\n")

    def close(self) -> None:
        try:
            self._sock.close()
        except Exception:
            pass


def _open_transport(url: str, timeout: float):
    scheme = urlparse(url).scheme
    if scheme in ("ws", "wss"):
        return _WsTransport(url, timeout)
    if scheme == "tcp":
        parsed = urlparse(url)
        if not parsed.hostname or not parsed.port:
            raise BridgeError(f"tcp url needs host and port: {url}")
        return _TcpTransport(parsed.hostname, parsed.port, timeout)
    raise BridgeError(f"unsupported url scheme {scheme!r} in {url}")


@dataclass
class Subscription:
    id: str
    topic: str
    type: str
    handler: Callable[[Any], None]
    throttle_rate: int | None = None
    queue: deque = field(default_factory=deque)
    drops: int = 0  # decode failures plus queue overflow


class BridgeClient:
    """Live session against a rosbridge endpoint. Thread-safe."""

    def __init__(
        self,
        url: str,
        *,
        retry_budget: int = 10,
        backoff_base: float = 0.5,
        backoff_cap: float = 8.0,
        queue_depth: int = DEFAULT_QUEUE_DEPTH,
        open_timeout: float = 3.0,
        status_handler: StatusHandler | None = None,
    ):
        self.url = url
        self._retry_budget = retry_budget
        self._backoff_base = backoff_base
        self._backoff_cap = backoff_cap
        self._queue_depth = queue_depth
        self._open_timeout = open_timeout
        self._status = status_handler or (lambda level, text: None)
        self._transport = None
        self._send_lock = threading.Lock()
        self._state = threading.Lock()
        self._subs: dict[str, Subscription] = {}
        self._advertised: dict[str, str] = {}
        self._sub_counter = 0
        self._closed = threading.Event()
        self._dispatch_cv = threading.Condition()
        self._reader: threading.Thread | None = None
        self._dispatcher: threading.Thread | None = None
        self.connected = threading.Event()

    # -- lifecycle ---------------------------------------------------------

    def connect(self) -> "BridgeClient":
        """Establish the session; raises ConnectRefused after the retry budget."""
        self._transport = self._establish()
        self.connected.set()
        self._status("info", f"connected to {self.url}")
        self._reader = threading.Thread(target=self._read_loop, name="bridge-reader", daemon=True)
        self._dispatcher = threading.Thread(target=self._dispatch_loop, name="bridge-dispatch", daemon=True)
        self._reader.start()
        self._dispatcher.start()
        return self

    def _establish(self):
        delay = self._backoff_base
        last_error: Exception | None = None
        for attempt in range(self._retry_budget):
            if self._closed.is_set():
                raise ConnectRefused("client closed during connect")
            try:
                return _open_transport(self.url, self._open_timeout)
            except (OSError, WebSocketException, TimeoutError) as exc:
                last_error = exc
                if attempt < self._retry_budget - 1:
                    self._status("warning", f"connect to {self.url} failed ({exc}); retrying in {delay:.1f}s")
                    if self._closed.wait(delay):
                        break
                    delay = min(delay * 2, self._backoff_cap)
        raise ConnectRefused(f"{self.url} unreachable after {self._retry_budget} attempts: {last_error}")

    def close(self) -> None:
        self._closed.set()
        self.connected.clear()
        if self._transport is not None:
            self._transport.close()
        with self._dispatch_cv:
            self._dispatch_cv.notify_all()
        for t in (self._reader, self._dispatcher):
            if t is not None and t.is_alive() and t is not threading.current_thread():
                t.join(timeout=2.0)

    # -- pub/sub -----------------------------------------------------------

    def subscribe(self, topic: str, type: str, handler: Callable[[Any], None],
                  throttle_rate: int | None = None) -> Subscription:
        if type not in known_types():
            raise BridgeError(f"no codec for message type {type!r}")
        with self._state:
            self._sub_counter += 1
            sub = Subscription(id=f"sub:{topic}:{self._sub_counter}", topic=topic, type=type,
                               handler=handler, throttle_rate=throttle_rate)
            self._subs[sub.id] = sub
        self._send(BridgeOp(op="subscribe", id=sub.id, topic=topic, type=type,
                            throttle_rate=throttle_rate))
        return sub

    def unsubscribe(self, handle: Subscription) -> None:
        with self._state:
            self._subs.pop(handle.id, None)
        self._send(BridgeOp(op="unsubscribe", id=handle.id, topic=handle.topic))

    def publish(self, topic: str, type: str, msg: Any) -> None:
        """Advertise once per topic, then publish the canonical payload."""
        payload = encode_msg(type, msg)  # EncodeError for invalid msg
        advertise = False
        with self._state:
            if self._advertised.get(topic) != type:
                self._advertised[topic] = type
                advertise = True
        if advertise:
            self._send(BridgeOp(op="advertise", topic=topic, type=type))
        self._send(BridgeOp(op="publish", topic=topic, msg=payload))

    def drop_count(self, handle: Subscription) -> int:
        return handle.drops

    # -- wire --------------------------------------------------------------

    def _send(self, op: BridgeOp) -> None:
        data = envelope.encode(op)
        with self._send_lock:
            transport = self._transport
            if transport is None or not self.connected.is_set():
                raise BridgeError("not connected")
            try:
                transport.send(data)
            except _Closed as exc:
                raise BridgeError(f"send failed: {exc}") from exc

    def _read_loop(self) -> None:
        while not self._closed.is_set():
            try:
                raw = self._transport.recv()
            except _Closed:
                if self._closed.is_set():
                    return
                self.connected.clear()
                self._status("warning", "bridge connection lost; reconnecting")
                try:
                    self._transport = self._establish()
                except ConnectRefused as exc:
                    self._status("error", str(exc))
                    return
                self.connected.set()
                self._restore_session()
                continue
            try:
                op = envelope.decode(raw)
            except DecodeError as exc:
                self._status("warning", f"undecodable envelope: {exc}")
                continue
            if op.op == "publish":
                self._route_publish(op)
            elif op.op == "status":
                self._status(op.level or "info", str(op.msg))

    def _restore_session(self) -> None:
        with self._state:
            subs = list(self._subs.values())
            adverts = list(self._advertised.items())
        try:
            for sub in subs:
                self._send(BridgeOp(op="subscribe", id=sub.id, topic=sub.topic, type=sub.type,
                                    throttle_rate=sub.throttle_rate))
            for topic, type_name in adverts:
                self._send(BridgeOp(op="advertise", topic=topic, type=type_name))
        except BridgeError:
            return  # reader loop will observe the broken socket and retry
        self._status("info", "bridge session restored")

    def _route_publish(self, op: BridgeOp) -> None:
        with self._state:
            matches = [s for s in self._subs.values() if s.topic == op.topic]
        for sub in matches:
            try:
                msg = decode_msg(sub.type, op.msg)
            except DecodeError:
                sub.drops += 1  # type mismatch: dropped, counted
                continue
            with self._dispatch_cv:
                sub.queue.append(msg)
                if len(sub.queue) > self._queue_depth:
                    sub.queue.popleft()
                    sub.drops += 1
                self._dispatch_cv.notify()

    def _dispatch_loop(self) -> None:
        while True:
            batch: list[tuple[Callable[[Any], None], Any]] = []
            with self._dispatch_cv:
                while not batch:
                    if self._closed.is_set():
                        return
                    with self._state:
                        subs = list(self._subs.values())
                    for sub in subs:
                        while sub.queue:
                            batch.append((sub.handler, sub.queue.popleft()))
                    if not batch:
                        self._dispatch_cv.wait(timeout=0.5)
            for handler, msg in batch:
                try:
                    handler(msg)
                except Exception as exc:  # a broken handler must not kill dispatch
                    self._status("error", f"subscription handler raised: {exc!r}")


class LocalBus:
    """In-process TopicBus with synchronous delivery, for tests and embedding.

    Messages still round-trip through the codecs so anything published here
    would also be valid on the wire.
    """

    def __init__(self):
        self._subs: dict[int, tuple[str, str, Callable[[Any], None]]] = {}
        self._next = 0
        self.published: list[tuple[str, str, dict]] = []
        self._lock = threading.Lock()

    def subscribe(self, topic: str, type: str, handler: Callable[[Any], None]) -> int:
        with self._lock:
            self._next += 1
            self._subs[self._next] = (topic, type, handler)
            return self._next

    def unsubscribe(self, handle: int) -> None:
        with self._lock:
            self._subs.pop(handle, None)

    def publish(self, topic: str, type: str, msg: Any) -> None:
        payload = encode_msg(type, msg)
        with self._lock:
            self.published.append((topic, type, payload))
            targets = [(t, ty, h) for (t, ty, h) in self._subs.values() if t == topic]
        for _, sub_type, handler in targets:
            try:
                decoded = decode_msg(sub_type, payload)
            except DecodeError:
                continue
            handler(decoded)

    def deliver(self, topic: str, type: str, msg: Any) -> None:
        """Inject a message as if it arrived from the wire."""
        self.publish(topic, type, msg)
