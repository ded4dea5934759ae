"""OpenAI-compatible chat-completions client with a bounded tool-calling loop.

Wire objects are small dataclasses. Parsed objects remember the key order they
arrived in (unknown keys included) so a parse/serialise round trip is
byte-exact; locally built objects use the protocol's documented order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

import httpx

from edgeassist.controller.prompt import PromptBundle
from edgeassist.controller.tools import ToolCall, ToolContext, ToolRegistry, ToolResult
from edgeassist.errors import CloudTimeout, CloudUnreachable, MalformedCloudResponse, ToolLoopExceeded

MAX_TOOL_ITERATIONS = 5


def dumps_wire(obj: Any) -> bytes:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _split(d: dict, known: tuple[str, ...]) -> dict:
    return {k: v for k, v in d.items() if k not in known}


def _ordered(d: dict, order: tuple[str, ...]) -> dict:
    """Reorder ``d`` to follow ``order``; keys not listed keep their place after it."""
    if not order:
        return d
    out = {k: d[k] for k in order if k in d}
    out.update((k, v) for k, v in d.items() if k not in out)
    return out


@dataclass
class WireToolCall:
    id: str
    name: str
    arguments: str  # JSON-encoded, exactly as received
    type: str = "function"
    extra: dict = field(default_factory=dict)
    fn_extra: dict = field(default_factory=dict)
    order: tuple[str, ...] = field(default=(), repr=False, compare=False)
    fn_order: tuple[str, ...] = field(default=(), repr=False, compare=False)

    KEYS = ("id", "type", "function")

    @classmethod
    def from_wire(cls, d: dict) -> "WireToolCall":
        fn = d["function"]
        if not isinstance(fn.get("name"), str) or not isinstance(fn.get("arguments"), str):
            raise ValueError("tool call function needs string name and arguments")
        return cls(d["id"], fn["name"], fn["arguments"], d.get("type", "function"),
                   _split(d, cls.KEYS), _split(fn, ("name", "arguments")), tuple(d), tuple(fn))

    def to_wire(self) -> dict:
        fn = _ordered({"name": self.name, "arguments": self.arguments, **self.fn_extra}, self.fn_order)
        return _ordered({"id": self.id, "type": self.type, "function": fn, **self.extra}, self.order)

    def to_call(self) -> ToolCall:
        try:
            args = json.loads(self.arguments) if self.arguments.strip() else {}
        except json.JSONDecodeError:
            args = None  # dispatch reports it back to the model as invalid
        return ToolCall(self.name, args if isinstance(args, dict) else {"__raw__": self.arguments}, self.id)


@dataclass
class WireMessage:
    role: str
    content: str | None
    tool_calls: list[WireToolCall] | None = None
    tool_call_id: str | None = None
    extra: dict = field(default_factory=dict)
    order: tuple[str, ...] = field(default=(), repr=False, compare=False)

    KEYS = ("role", "content", "tool_calls", "tool_call_id")

    @classmethod
    def from_wire(cls, d: dict) -> "WireMessage":
        calls = d.get("tool_calls")
        return cls(
            role=d["role"],
            content=d.get("content"),
            tool_calls=None if calls is None else [WireToolCall.from_wire(c) for c in calls],
            tool_call_id=d.get("tool_call_id"),
            extra=_split(d, cls.KEYS),
            order=tuple(d),
        )

    def to_wire(self) -> dict:
        out: dict[str, Any] = {"role": self.role, "content": self.content}
        if self.tool_calls is not None:
            out["tool_calls"] = [c.to_wire() for c in self.tool_calls]
        if self.tool_call_id is not None:
            out["tool_call_id"] = self.tool_call_id
        out.update(self.extra)
        return _ordered(out, self.order)


@dataclass
class ChatRequest:
    model: str
    messages: list[WireMessage]
    tools: list[dict] = field(default_factory=list)

    def to_wire(self) -> dict:
        body: dict[str, Any] = {"model": self.model, "messages": [m.to_wire() for m in self.messages]}
        if self.tools:
            body["tools"] = self.tools
            body["tool_choice"] = "auto"
        return body

    def encode(self) -> bytes:
        return dumps_wire(self.to_wire())

    @classmethod
    def from_wire(cls, d: dict) -> "ChatRequest":
        return cls(d["model"], [WireMessage.from_wire(m) for m in d["messages"]], list(d.get("tools", [])))


@dataclass
class Choice:
    index: int
    message: WireMessage
    finish_reason: str | None
    extra: dict = field(default_factory=dict)
    order: tuple[str, ...] = field(default=(), repr=False, compare=False)

    KEYS = ("index", "message", "finish_reason")

    def to_wire(self) -> dict:
        out = {"index": self.index, "message": self.message.to_wire(), "finish_reason": self.finish_reason, **self.extra}
        return _ordered(out, self.order)


@dataclass
class ChatCompletion:
    id: str
    object: str
    created: int
    model: str
    choices: list[Choice]
    usage: dict[str, int] | None = None
    extra: dict = field(default_factory=dict)
    order: tuple[str, ...] = field(default=(), repr=False, compare=False)

    KEYS = ("id", "object", "created", "model", "choices", "usage")

    @classmethod
    def from_wire(cls, d: dict) -> "ChatCompletion":
        choices = [
            Choice(c["index"], WireMessage.from_wire(c["message"]), c.get("finish_reason"), _split(c, Choice.KEYS), tuple(c))
            for c in d["choices"]
        ]
        if not choices:
            raise ValueError("response has no choices")
        return cls(d["id"], d["object"], d["created"], d["model"], choices, d.get("usage"), _split(d, cls.KEYS), tuple(d))

    @classmethod
    def decode(cls, raw: bytes) -> "ChatCompletion":
        try:
            return cls.from_wire(json.loads(raw))
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise MalformedCloudResponse(f"cannot parse chat completion: {exc}") from exc

    def to_wire(self) -> dict:
        out: dict[str, Any] = {
            "id": self.id,
            "object": self.object,
            "created": self.created,
            "model": self.model,
            "choices": [c.to_wire() for c in self.choices],
        }
        if self.usage is not None:
            out["usage"] = self.usage
        out.update(self.extra)
        return _ordered(out, self.order)

    def encode(self) -> bytes:
        return dumps_wire(self.to_wire())


@dataclass
class CloudConfig:
    base_url: str = "https://api.openai.com"
    api_key: str = ""
    model: str = "gpt-4o-mini"
    timeout_s: float = 15.0
    retries: int = 1
    max_iterations: int = MAX_TOOL_ITERATIONS

    @classmethod
    def from_env(cls, **overrides: Any) -> "CloudConfig":
        cfg = cls(**overrides)
        cfg.base_url = os.environ.get("IA_CLOUD_URL", cfg.base_url)
        cfg.api_key = os.environ.get("IA_CLOUD_KEY", cfg.api_key)
        cfg.model = os.environ.get("IA_CLOUD_MODEL", cfg.model)
        return cfg


@dataclass
class CloudReply:
    text: str
    tool_calls: list[tuple[ToolCall, ToolResult]]
    usage: dict[str, int]
    iterations: int
    transcript: list[WireMessage] = field(default_factory=list)


class CloudClient:
    """Sends chat-completion requests. ``transport`` lets tests script the server."""

    def __init__(self, config: CloudConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            timeout=config.timeout_s,
            transport=transport,
            headers={"Authorization": f"Bearer {config.api_key}", "Content-Type": "application/json"},
        )

    def close(self) -> None:
        self._client.close()

    def complete(self, request: ChatRequest) -> ChatCompletion:
        body = request.encode()
        last: Exception | None = None
        for _attempt in range(self.config.retries + 1):
            try:
                resp = self._client.post("/v1/chat/completions", content=body)
            except httpx.TimeoutException as exc:
                last = CloudTimeout(f"cloud request timed out after {self.config.timeout_s}s")
                last.__cause__ = exc
                continue
            except httpx.TransportError as exc:
                last = CloudUnreachable(f"cloud unreachable: {exc}")
                last.__cause__ = exc
                continue
            if resp.status_code >= 500:
                last = CloudUnreachable(f"cloud returned HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise CloudUnreachable(f"cloud rejected request: HTTP {resp.status_code} {resp.text[:200]}")
            return ChatCompletion.decode(resp.content)
        assert last is not None
        raise last


def call_cloud(
    bundle: PromptBundle,
    client: CloudClient,
    tools: ToolRegistry,
    ctx: ToolContext | None = None,
) -> CloudReply:
    """Drive the model until it answers without tool calls, at most ``max_iterations`` round trips."""
    ctx = ctx if ctx is not None else ToolContext()
    messages = [WireMessage(m["role"], m["content"]) for m in bundle.to_messages()]
    tool_wire = [t.to_wire() for t in bundle.tools]
    executed: list[tuple[ToolCall, ToolResult]] = []
    usage: dict[str, int] = {}
    limit = client.config.max_iterations
    for iteration in range(1, limit + 1):
        completion = client.complete(ChatRequest(client.config.model, list(messages), tool_wire))
        for k, v in (completion.usage or {}).items():
            if isinstance(v, int):
                usage[k] = usage.get(k, 0) + v
        msg = completion.choices[0].message
        messages.append(msg)
        if not msg.tool_calls:
            return CloudReply(msg.content or "", executed, usage, iteration, messages)
        for wc in msg.tool_calls:
            call = wc.to_call()
            result = tools.dispatch_tool(call, ctx)
            executed.append((call, result))
            messages.append(WireMessage("tool", result.output, tool_call_id=wc.id))
    raise ToolLoopExceeded(f"model kept requesting tools after {limit} iterations", limit)
