"""Tool schemas, validated dispatch, and the built-in device/sensor tools."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

import jsonschema

from edgeassist.actions import Action, ActionResult, DeviceRegistry, Origin
from edgeassist.cache import normalize_query

if TYPE_CHECKING:
    from edgeassist.context import ContextHub


@dataclass
class ToolContext:
    """Per-request scratch space handed to tool handlers."""

    actions: list[ActionResult] = field(default_factory=list)
    origin: Origin = Origin.CLOUD_TOOL


Handler = Callable[[dict[str, Any], ToolContext], str]


@dataclass
class ToolSchema:
    name: str
    description: str
    parameters: dict[str, Any]
    handler: Handler | None = None
    trigger_keywords: tuple[str, ...] = ()
    reentrant: bool = True

    def to_wire(self) -> dict:
        return {
            "type": "function",
            "function": {"name": self.name, "description": self.description, "parameters": self.parameters},
        }


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict[str, Any]
    call_id: str = ""


@dataclass(frozen=True)
class ToolResult:
    name: str
    output: str
    ok: bool
    call_id: str = ""


def keyword_present(keyword: str, normalized_query: str) -> bool:
    """Whole-token (or whole-phrase) match against an already normalised query."""
    kw = normalize_query(keyword)
    if not kw:
        return False
    return f" {kw} " in f" {normalized_query} "


def _validation_message(err: jsonschema.ValidationError) -> str:
    if err.validator == "required":
        return f"invalid arguments: {err.message}"
    where = ".".join(str(p) for p in err.absolute_path) or "arguments"
    return f"invalid arguments: {where}: {err.message}"


class ToolRegistry:
    def __init__(self) -> None:
        self._tools: dict[str, ToolSchema] = {}
        self._locks: dict[str, threading.Lock] = {}

    def register(self, schema: ToolSchema) -> None:
        jsonschema.Draft7Validator.check_schema(schema.parameters)
        self._tools[schema.name] = schema
        self._locks[schema.name] = threading.Lock()

    def get(self, name: str) -> ToolSchema | None:
        return self._tools.get(name)

    def schemas(self) -> list[ToolSchema]:
        return [self._tools[k] for k in sorted(self._tools)]

    def trigger_keywords(self) -> tuple[str, ...]:
        return tuple(sorted({kw for t in self._tools.values() for kw in t.trigger_keywords}))

    def dispatch_tool(self, call: ToolCall, ctx: ToolContext | None = None) -> ToolResult:
        """Validate and run one call. Every failure is returned as ``ok=False``."""
        ctx = ctx if ctx is not None else ToolContext()
        tool = self._tools.get(call.name)
        if tool is None or tool.handler is None:
            return ToolResult(call.name, "unknown tool", False, call.call_id)
        if not isinstance(call.arguments, dict):
            return ToolResult(call.name, "invalid arguments: expected an object", False, call.call_id)
        errors = sorted(jsonschema.Draft7Validator(tool.parameters).iter_errors(call.arguments), key=lambda e: e.path)
        if errors:
            return ToolResult(call.name, _validation_message(errors[0]), False, call.call_id)
        try:
            if tool.reentrant:
                out = tool.handler(call.arguments, ctx)
            else:
                with self._locks[call.name]:
                    out = tool.handler(call.arguments, ctx)
        except Exception as exc:  # noqa: BLE001 - failures are data for the model
            return ToolResult(call.name, f"tool error: {exc}", False, call.call_id)
        return ToolResult(call.name, out if isinstance(out, str) else json.dumps(out, sort_keys=True), True, call.call_id)


DEVICE_KEYWORDS = (
    "lamp", "light", "lights", "thermostat", "heating", "temperature", "switch",
    "turn on", "turn off", "switch on", "switch off", "brightness", "dim",
)


def device_tool(devices: DeviceRegistry) -> ToolSchema:
    def handler(args: dict[str, Any], ctx: ToolContext) -> str:
        action = Action(args["device_id"], args["capability"], {"value": args["value"]}, ctx.origin)
        result = devices.execute(action)
        ctx.actions.append(result)
        if not result.ok:
            raise RuntimeError(result.detail)
        return f"{action.device_id}.{action.capability} = {args['value']}"

    return ToolSchema(
        name="set_device",
        description="Set a capability of a home device, e.g. lamp power on/off, brightness 0-100, thermostat set_target in Celsius.",
        parameters={
            "type": "object",
            "properties": {
                "device_id": {"type": "string", "enum": sorted(devices.inventory())},
                "capability": {"type": "string"},
                "value": {"type": ["string", "number"]},
            },
            "required": ["device_id", "capability", "value"],
            "additionalProperties": False,
        },
        handler=handler,
        trigger_keywords=DEVICE_KEYWORDS,
        reentrant=False,
    )


def list_devices_tool(devices: DeviceRegistry) -> ToolSchema:
    return ToolSchema(
        name="list_devices",
        description="List home devices with their capabilities and current state.",
        parameters={"type": "object", "properties": {}, "additionalProperties": False},
        handler=lambda _args, _ctx: json.dumps(
            {"inventory": devices.inventory(), "state": devices.state_dump()}, sort_keys=True
        ),
    )


def sensor_tool(hub: "ContextHub") -> ToolSchema:
    def handler(args: dict[str, Any], _ctx: ToolContext) -> str:
        view = hub.snapshot().sensors.get(args["sensor_id"])
        if view is None:
            raise KeyError(f"unknown sensor {args['sensor_id']}")
        if view.reading is None:
            return "no reading"
        return f"{view.reading.value:.1f}{view.reading.unit}"

    return ToolSchema(
        name="get_sensor",
        description="Read the latest value of an environmental sensor.",
        parameters={
            "type": "object",
            "properties": {"sensor_id": {"type": "string"}},
            "required": ["sensor_id"],
            "additionalProperties": False,
        },
        handler=handler,
        trigger_keywords=("sensor", "humidity", "motion", "presence"),
    )
