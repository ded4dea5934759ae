"""Clocks. Production code reads wall/monotonic time; replay and tests use a ticking fake."""

from __future__ import annotations

import threading
import time


class SystemClock:
    def now(self) -> float:
        """Wall-clock seconds since the epoch."""
        return time.time()

    def perf(self) -> float:
        return time.perf_counter()


class FakeClock:
    """Deterministic clock: every read advances time by ``tick`` seconds."""

    def __init__(self, start: float = 1_700_000_000.0, tick: float = 0.001):
        self._t = start
        self.tick = tick
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            self._t += self.tick
            return self._t

    perf = now

    def advance(self, seconds: float) -> None:
        with self._lock:
            self._t += seconds
