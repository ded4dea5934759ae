"""Device actions: adapter registry, validated execution, feedback into the cache."""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

from edgeassist.errors import DuplicateDevice, UnknownEntry, UnknownInteraction

if TYPE_CHECKING:
    from edgeassist.cache import SemanticCache
    from edgeassist.interactions import InteractionLog


class Origin(str, enum.Enum):
    CACHE = "cache"
    CLOUD_TOOL = "cloud_tool"
    EDGE_MODEL = "edge_model"
    PLAN = "plan"


@dataclass(frozen=True)
class Action:
    device_id: str
    capability: str
    parameters: dict[str, Any]
    origin: Origin = Origin.CLOUD_TOOL

    def to_json(self) -> dict:
        return {
            "device_id": self.device_id,
            "capability": self.capability,
            "parameters": dict(self.parameters),
            "origin": Origin(self.origin).value,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Action":
        return cls(str(d["device_id"]), str(d["capability"]), dict(d["parameters"]), Origin(d["origin"]))


@dataclass(frozen=True)
class ActionResult:
    action: Action
    ok: bool
    detail: str
    latency_ms: float

    def to_json(self) -> dict:
        return {"action": self.action.to_json(), "ok": self.ok, "detail": self.detail, "latency_ms": self.latency_ms}


@dataclass(frozen=True)
class CapabilitySpec:
    """Either an enumeration (``values``) or a numeric range (``minimum``..``maximum``)."""

    name: str
    values: tuple[str, ...] | None = None
    minimum: float | None = None
    maximum: float | None = None
    integer: bool = False

    def validate(self, value: Any) -> str | None:
        """Return an error message, or None when ``value`` is acceptable."""
        if self.values is not None:
            if value not in self.values:
                return f"{self.name} must be one of {', '.join(self.values)}"
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return f"{self.name} must be a number"
        if self.integer and float(value) != int(value):
            return f"{self.name} must be an integer"
        if (self.minimum is not None and value < self.minimum) or (self.maximum is not None and value > self.maximum):
            return f"{self.name} out of range {self.minimum:g}..{self.maximum:g}"
        return None

    def to_json(self) -> dict:
        if self.values is not None:
            return {"type": "enum", "values": list(self.values)}
        return {"type": "integer" if self.integer else "number", "minimum": self.minimum, "maximum": self.maximum}


class DeviceAdapter:
    """In-memory device: a capability map plus current state, one writer at a time."""

    kind = "device"

    def __init__(self, capabilities: list[CapabilitySpec], initial: dict[str, Any]):
        self.capabilities = {c.name: c for c in capabilities}
        self.state = dict(initial)
        self._lock = threading.Lock()

    def apply(self, capability: str, value: Any) -> None:
        with self._lock:
            self.state[capability] = value

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return dict(self.state)


class MockLamp(DeviceAdapter):
    kind = "lamp"

    def __init__(self) -> None:
        super().__init__(
            [CapabilitySpec("power", values=("on", "off")), CapabilitySpec("brightness", minimum=0, maximum=100, integer=True)],
            {"power": "off", "brightness": 100},
        )


class MockThermostat(DeviceAdapter):
    kind = "thermostat"

    def __init__(self) -> None:
        super().__init__([CapabilitySpec("set_target", minimum=10.0, maximum=30.0)], {"set_target": 20.0})


class MockSwitch(DeviceAdapter):
    kind = "switch"

    def __init__(self) -> None:
        super().__init__([CapabilitySpec("power", values=("on", "off"))], {"power": "off"})


MOCK_DEVICES: dict[str, Callable[[], DeviceAdapter]] = {
    "lamp": MockLamp,
    "thermostat": MockThermostat,
    "switch": MockSwitch,
}


class DeviceRegistry:
    def __init__(self, perf: Callable[[], float] = time.perf_counter):
        self._devices: dict[str, DeviceAdapter] = {}
        self._lock = threading.Lock()
        self._perf = perf
        self.history: list[ActionResult] = []

    def register_device(self, device_id: str, adapter: DeviceAdapter) -> None:
        if not device_id:
            raise ValueError("device_id must be non-empty")
        with self._lock:
            if device_id in self._devices:
                raise DuplicateDevice(device_id)
            self._devices[device_id] = adapter

    def device(self, device_id: str) -> DeviceAdapter | None:
        with self._lock:
            return self._devices.get(device_id)

    def inventory(self) -> dict[str, dict]:
        with self._lock:
            items = sorted(self._devices.items())
        return {
            dev_id: {"kind": dev.kind, "capabilities": {n: c.to_json() for n, c in sorted(dev.capabilities.items())}}
            for dev_id, dev in items
        }

    def state_dump(self) -> dict[str, dict[str, Any]]:
        with self._lock:
            items = sorted(self._devices.items())
        return {dev_id: dev.snapshot() for dev_id, dev in items}

    def _check(self, action: Action) -> str | None:
        if not isinstance(action.device_id, str) or not action.device_id:
            return "device_id must be non-empty"
        if not isinstance(action.capability, str) or not action.capability:
            return "capability must be non-empty"
        dev = self.device(action.device_id)
        if dev is None:
            return "unknown device"
        spec = dev.capabilities.get(action.capability)
        if spec is None:
            return f"unknown capability {action.capability!r} for {action.device_id}"
        params = action.parameters
        if not isinstance(params, dict) or set(params) != {"value"}:
            return "parameters must be exactly {'value': ...}"
        return spec.validate(params["value"])

    def execute(self, action: Action) -> ActionResult:
        """Apply an action. Failures come back as ``ok=False`` results, never exceptions."""
        t0 = self._perf()
        try:
            problem = self._check(action)
            if problem is None:
                self._devices[action.device_id].apply(action.capability, action.parameters["value"])
                ok, detail = True, "ok"
            else:
                ok, detail = False, problem
        except Exception as exc:  # noqa: BLE001 - the boundary is total by contract
            ok, detail = False, f"internal error: {exc}"
        result = ActionResult(action, ok, detail, max(0.0, (self._perf() - t0) * 1000.0))
        with self._lock:
            self.history.append(result)
        return result


def default_registry(perf: Callable[[], float] = time.perf_counter) -> DeviceRegistry:
    reg = DeviceRegistry(perf)
    reg.register_device("lamp1", MockLamp())
    reg.register_device("thermostat1", MockThermostat())
    reg.register_device("switch1", MockSwitch())
    return reg


@dataclass(frozen=True)
class FeedbackRecord:
    interaction_id: str
    rating: int
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self) -> None:
        if isinstance(self.rating, bool) or self.rating not in (-1, 0, 1):
            raise ValueError("rating must be -1, 0 or +1")


def apply_feedback(
    record: FeedbackRecord,
    log: "InteractionLog",
    cache: "SemanticCache",
    reinforcement: int = 2,
) -> str:
    """Fold one rating into the cache. Returns what was done (for logging)."""
    rec = log.get(record.interaction_id)
    if rec is None:
        raise UnknownInteraction(record.interaction_id)
    log.record_feedback(record)
    if record.rating == 0 or rec.error:
        return "logged"
    if rec.tier == "cache":
        entry_id = rec.cache_entry_id
        try:
            if record.rating > 0:
                cache.reinforce(entry_id, reinforcement)
                return "reinforced"
            cache.invalidate(entry_id)
            return "invalidated"
        except UnknownEntry:  # already purged by maintenance
            return "logged"
    if rec.tier in ("edge", "cloud") and record.rating > 0 and rec.reply:
        action = None
        for a in rec.actions:
            if a.get("ok"):
                action = Action.from_json(a["action"])
                break
        cache.insert(rec.query, rec.reply, action, tier=rec.tier, now=record.timestamp)
        return "cached"
    return "logged"
