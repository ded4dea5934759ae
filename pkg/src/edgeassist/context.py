"""Sensor ingestion, context snapshots and user profiles for prompt enrichment."""

from __future__ import annotations

import csv
import enum
import json
import logging
import os
import tempfile
import threading
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator

from edgeassist.errors import DuplicateSensor, InvalidProfile

log = logging.getLogger(__name__)

RING_SIZE = 1024
STALE_FACTOR = 3


class SensorKind(str, enum.Enum):
    TEMPERATURE = "temperature"
    HUMIDITY = "humidity"
    MOTION = "motion"
    INFRARED_PRESENCE = "infrared_presence"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: str
    kind: SensorKind
    unit: str
    interval_ms: int

    def __post_init__(self) -> None:
        if not self.sensor_id:
            raise ValueError("sensor_id must be non-empty")
        if self.interval_ms <= 0:
            raise ValueError("interval_ms must be positive")
        object.__setattr__(self, "kind", SensorKind(self.kind))


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    value: float
    unit: str
    timestamp: float  # epoch seconds


@dataclass(frozen=True)
class SensorView:
    spec: SensorSpec
    reading: SensorReading | None  # None is the absent-value marker
    stale: bool
    age_s: float | None


@dataclass(frozen=True)
class ContextSnapshot:
    session_id: str
    wall_time: float
    sensors: dict[str, SensorView] = field(default_factory=dict)


@dataclass
class UserProfile:
    user_id: str
    display_name: str = ""
    preferences: dict[str, Any] = field(default_factory=dict)
    created_at: float = 0.0


# a provider returns (value, unit) or raises
SensorSource = Callable[[], tuple[float, str]]


class ReplayProvider:
    """Replays ``timestamp_ms,value`` CSV rows in order; exhausted replays raise StopIteration."""

    def __init__(self, rows: list[tuple[float, float]], unit: str):
        self.rows = rows
        self.unit = unit
        self._pos = 0

    @classmethod
    def from_csv(cls, path: str | Path, unit: str) -> "ReplayProvider":
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(rec[0]), float(rec[1])))
                except ValueError:
                    continue  # header line
        return cls(rows, unit)

    def __call__(self) -> tuple[float, str]:
        if self._pos >= len(self.rows):
            raise StopIteration("replay exhausted")
        _, value = self.rows[self._pos]
        self._pos += 1
        return value, self.unit

    def timed(self) -> Iterator[tuple[float, float]]:
        """(timestamp_s, value) pairs."""
        for ts_ms, value in self.rows:
            yield ts_ms / 1000.0, value


class ContextHub:
    def __init__(self, clock: Callable[[], float] = time.time):
        self.clock = clock
        self._specs: dict[str, SensorSpec] = {}
        self._sources: dict[str, SensorSource] = {}
        self._buffers: dict[str, deque[SensorReading]] = {}
        self._lock = threading.RLock()
        self._stop = threading.Event()
        self._workers: dict[str, threading.Thread] = {}
        self._running = False

    # -- registration and ingestion --------------------------------------
    def register_sensor(self, spec: SensorSpec, source: SensorSource | None = None) -> None:
        with self._lock:
            if spec.sensor_id in self._specs:
                raise DuplicateSensor(spec.sensor_id)
            self._specs[spec.sensor_id] = spec
            self._buffers[spec.sensor_id] = deque(maxlen=RING_SIZE)
            if source is not None:
                self._sources[spec.sensor_id] = source
                if self._running:
                    self._spawn(spec.sensor_id)

    def specs(self) -> list[SensorSpec]:
        with self._lock:
            return [self._specs[k] for k in sorted(self._specs)]

    def push_reading(self, sensor_id: str, value: float, timestamp: float | None = None, unit: str | None = None) -> bool:
        """Append a reading. Out-of-order timestamps are dropped (returns False)."""
        with self._lock:
            spec = self._specs.get(sensor_id)
            if spec is None:
                raise KeyError(f"unknown sensor {sensor_id!r}")
            ts = self.clock() if timestamp is None else timestamp
            buf = self._buffers[sensor_id]
            if buf and ts < buf[-1].timestamp:
                log.warning("dropping out-of-order reading for %s (%.3f < %.3f)", sensor_id, ts, buf[-1].timestamp)
                return False
            buf.append(SensorReading(sensor_id, float(value), unit or spec.unit, ts))
            return True

    def readings(self, sensor_id: str) -> list[SensorReading]:
        with self._lock:
            return list(self._buffers[sensor_id])

    def poll(self, sensor_id: str) -> bool:
        """Read the sensor's source once and buffer the result."""
        source = self._sources[sensor_id]
        try:
            value, unit = source()
        except StopIteration:
            return False
        except Exception as exc:  # noqa: BLE001 - a flaky sensor must not kill its worker
            log.warning("sensor %s read failed: %s", sensor_id, exc)
            return False
        return self.push_reading(sensor_id, value, unit=unit)

    def _spawn(self, sensor_id: str) -> None:
        interval = self._specs[sensor_id].interval_ms / 1000.0

        def run() -> None:
            while not self._stop.is_set():
                self.poll(sensor_id)
                if self._stop.wait(interval):
                    break

        t = threading.Thread(target=run, name=f"sensor-{sensor_id}", daemon=True)
        self._workers[sensor_id] = t
        t.start()

    def start(self) -> None:
        with self._lock:
            if self._running:
                return
            self._stop.clear()
            self._running = True
            for sid in self._sources:
                self._spawn(sid)

    def stop(self) -> None:
        with self._lock:
            self._running = False
            self._stop.set()
            workers = list(self._workers.values())
            self._workers.clear()
        for t in workers:
            t.join(timeout=2.0)

    # -- snapshots ---------------------------------------------------------
    def snapshot(self, session_id: str = "", now: float | None = None) -> ContextSnapshot:
        with self._lock:
            now = self.clock() if now is None else now
            views = {}
            for sid in sorted(self._specs):
                spec = self._specs[sid]
                buf = self._buffers[sid]
                if not buf:
                    views[sid] = SensorView(spec, None, True, None)
                    continue
                latest = buf[-1]
                age = max(now - latest.timestamp, 0.0)
                views[sid] = SensorView(spec, latest, age * 1000.0 > STALE_FACTOR * spec.interval_ms, age)
            return ContextSnapshot(session_id, now, views)


class ProfileStore:
    """User profiles, optionally backed by a JSON file written atomically."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._profiles: dict[str, UserProfile] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            doc = json.loads(self.path.read_text(encoding="utf-8"))
            for d in doc.get("profiles", []):
                self._profiles[d["user_id"]] = UserProfile(**d)

    def upsert_profile(self, profile: UserProfile) -> None:
        if not isinstance(profile.user_id, str) or not profile.user_id.strip():
            raise InvalidProfile("user_id must be a non-empty string")
        with self._lock:
            self._profiles[profile.user_id] = UserProfile(
                profile.user_id, profile.display_name, dict(profile.preferences), profile.created_at
            )
            self._flush()

    def get_profile(self, user_id: str) -> UserProfile | None:
        with self._lock:
            p = self._profiles.get(user_id)
            return None if p is None else UserProfile(p.user_id, p.display_name, dict(p.preferences), p.created_at)

    def _flush(self) -> None:
        if self.path is None:
            return
        doc = {"profiles": [asdict(self._profiles[k]) for k in sorted(self._profiles)]}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".profiles.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)


def format_context_for_prompt(snapshot: ContextSnapshot | None, profile: UserProfile | None) -> str:
    """Plain-text context block: one line per sensor, then preferences, keys sorted."""
    lines = []
    if snapshot is not None:
        for sid in sorted(snapshot.sensors):
            view = snapshot.sensors[sid]
            if view.reading is None:
                lines.append(f"{sid}=absent")
                continue
            value = round(view.reading.value, 1) + 0.0  # folds -0.0 into 0.0
            lines.append(f"{sid}={value:.1f}{view.reading.unit} ({int(view.age_s)}s old)")
    if profile is not None:
        for key in sorted(profile.preferences):
            lines.append(f"pref.{key}={profile.preferences[key]}")
    return "\n".join(lines)
