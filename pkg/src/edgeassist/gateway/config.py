"""Gateway configuration: one JSON document with ``"config_version": 1``.

Every section mirrors a module's config dataclass. Loading is strict: unknown
keys, wrong types and values rejected by a dataclass's own checks all raise
``ConfigError`` naming the offending field (or the line/column for JSON syntax
errors).
"""

from __future__ import annotations

import dataclasses
import enum
import json
import os
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from edgeassist.asr import AsrEngineSpec
from edgeassist.audio.pipeline import FrontendConfig
from edgeassist.cache import CacheConfig
from edgeassist.context import SensorKind
from edgeassist.controller.cloud import CloudConfig
from edgeassist.controller.prompt import PromptConfig
from edgeassist.controller.routing import Connectivity, RoutingConfig
from edgeassist.errors import ConfigError

CONFIG_VERSION = 1


@dataclass
class EdgeConfig:
    kind: str = "mock"  # mock | openai; the mock is seeded from the top-level seed
    max_tokens: int = 64
    base_url: str = "http://127.0.0.1:8080"
    model: str = "local"

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "openai"):
            raise ValueError("kind must be 'mock' or 'openai'")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass
class SensorConfig:
    sensor_id: str
    kind: SensorKind
    unit: str
    interval_ms: int
    replay_csv: str = ""  # optional "timestamp_ms,value" file driving the sensor


@dataclass
class GatewayConfig:
    config_version: int = CONFIG_VERSION
    data_dir: str = "ia-data"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8787
    seed: int = 0
    connectivity: Connectivity = Connectivity.ONLINE
    templates_dir: str = ""  # empty means the bundled library
    feedback_reinforcement: int = 2
    persist_every: int = 1  # write the cache file every N hit-only requests (structural changes always write)
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    asr: AsrEngineSpec = field(default_factory=AsrEngineSpec)
    cache: CacheConfig = field(default_factory=CacheConfig)
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    prompt: PromptConfig = field(default_factory=PromptConfig)
    cloud: CloudConfig = field(default_factory=CloudConfig)
    edge: EdgeConfig = field(default_factory=EdgeConfig)
    sensors: tuple[SensorConfig, ...] = ()

    def __post_init__(self) -> None:
        if self.config_version != CONFIG_VERSION:
            raise ValueError(f"config_version must be {CONFIG_VERSION}")
        if not 0 < self.listen_port < 65536:
            raise ValueError("listen_port out of range")
        if self.persist_every < 1:
            raise ValueError("persist_every must be >= 1")
        if self.routing.similarity_tau != self.cache.similarity_tau:
            raise ValueError("routing.similarity_tau must equal cache.similarity_tau")

    @property
    def data_path(self) -> Path:
        return Path(self.data_dir)

    def to_json(self) -> dict:
        return _to_plain(self)


def _to_plain(value: Any) -> Any:
    if dataclasses.is_dataclass(value):
        return {f.name: _to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _to_plain(v) for k, v in value.items()}
    return value


def _type_name(tp: Any) -> str:
    return getattr(tp, "__name__", str(tp))


def _coerce(tp: Any, value: Any, where: str) -> Any:
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = typing.get_args(tp)
        if value is None and type(None) in args:
            return None
        errors = []
        for arg in args:
            if arg is type(None):
                continue
            try:
                return _coerce(arg, value, where)
            except ConfigError as exc:
                errors.append(str(exc))
        raise ConfigError(errors[0] if errors else f"{where}: unexpected null")
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {type(value).__name__}")
        args = typing.get_args(tp)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{where}[{i}]") for i, v in enumerate(value))
        if len(args) != len(value):
            raise ConfigError(f"{where}: expected {len(args)} items, got {len(value)}")
        return tuple(_coerce(a, v, f"{where}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if origin is dict or tp is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
        return dict(value)
    if dataclasses.is_dataclass(tp):
        return build_dataclass(tp, value, where)
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(value)
        except ValueError:
            allowed = ", ".join(repr(m.value) for m in tp)
            raise ConfigError(f"{where}: {value!r} is not one of {allowed}") from None
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{where}: unsupported field type {_type_name(tp)}")


def build_dataclass(cls: type, data: Any, where: str = "") -> Any:
    """Instantiate ``cls`` from a JSON object, checking keys and types field by field."""
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where or 'config'}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls) if f.init}
    prefix = f"{where}." if where else ""
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{prefix}{unknown[0]}: unknown field")
    kwargs = {}
    for name, f in fields.items():
        if name in data:
            kwargs[name] = _coerce(hints[name], data[name], prefix + name)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(f"{prefix}{name}: required field missing")
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from None


ENV_OVERRIDES = {
    "IA_DATA_DIR": ("data_dir",),
    "IA_CLOUD_URL": ("cloud", "base_url"),
    "IA_CLOUD_KEY": ("cloud", "api_key"),
    "IA_CLOUD_MODEL": ("cloud", "model"),
}


def parse_config(text: str, source: str = "<config>", env: Mapping[str, str] | None = None) -> GatewayConfig:
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    doc.setdefault("config_version", CONFIG_VERSION)
    for var, path in ENV_OVERRIDES.items():
        if env and env.get(var):
            node = doc
            for key in path[:-1]:
                node = node.setdefault(key, {})
            node[path[-1]] = env[var]
    try:
        return build_dataclass(GatewayConfig, doc)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> GatewayConfig:
    """Read the config named by ``path`` or ``IA_CONFIG``; defaults when neither is set."""
    env = os.environ if env is None else env
    path = path or env.get("IA_CONFIG")
    if not path:
        return parse_config("", env=env)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), env)
