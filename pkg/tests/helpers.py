"""Shared utilities for integration tests."""

from __future__ import annotations

import json
import socket
import time
import urllib.request


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_for(predicate, timeout: float = 5.0, interval: float = 0.02, message: str = ""):
    """Poll until predicate() is truthy; returns its value or raises."""
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = predicate()
        if value:
            return value
        time.sleep(interval)
    raise TimeoutError(message or "condition not met in time")


def http_json(url: str) -> dict:
    with urllib.request.urlopen(url, timeout=2.0) as resp:
        return json.loads(resp.read())


class Collector:
    """Thread-safe message sink for subscription handlers."""

    def __init__(self):
        self.items = []

    def __call__(self, msg):
        self.items.append(msg)

    def __len__(self):
        return len(self.items)
