"""Engine clocks.

``Clock`` maps wall time onto virtual seconds with an acceleration factor so
integration tests can run scenarios faster than real time. ``ManualClock``
is fully deterministic for unit tests: time moves only when told to.
"""

from __future__ import annotations

import threading
import time


class Clock:
    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ValueError("clock scale must be positive")
        self.scale = scale
        self._t0 = time.monotonic()
        self._stopped = threading.Event()

    def now(self) -> float:
        """Virtual seconds since construction."""
        return (time.monotonic() - self._t0) * self.scale

    def sleep(self, dt: float) -> bool:
        """Sleep ``dt`` virtual seconds; returns False if stop() woke us."""
        if dt <= 0:
            return not self._stopped.is_set()
        return not self._stopped.wait(dt / self.scale)

    def sleep_until(self, t: float) -> bool:
        return self.sleep(t - self.now())

    def stop(self) -> None:
        """Wake all sleepers permanently (shutdown)."""
        self._stopped.set()

    @property
    def stopped(self) -> bool:
        return self._stopped.is_set()


class ManualClock:
    """Deterministic clock; sleeping advances time instantly."""

    def __init__(self, start: float = 0.0):
        self._now = start
        self.scale = 1.0

    def now(self) -> float:
        return self._now

    def advance(self, dt: float) -> None:
        self._now += dt

    def sleep(self, dt: float) -> bool:
        if dt > 0:
            self._now += dt
        return True

    def sleep_until(self, t: float) -> bool:
        self._now = max(self._now, t)
        return True

    def stop(self) -> None:
        pass

    @property
    def stopped(self) -> bool:
        return False
