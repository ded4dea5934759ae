"""Deterministic stand-ins for the cloud chat-completions server.

Each stub is an ``httpx.MockTransport`` factory, so the real client code path
(encoding, retries, parsing) runs unchanged against it.
"""

from __future__ import annotations

import json
import re
from typing import Callable

import httpx

from edgeassist.cache import normalize_query


def completion(
    seq: int,
    content: str | None = None,
    tool_calls: list[tuple[str, dict]] | None = None,
    model: str = "stub-model",
) -> dict:
    """A chat-completion body. ``tool_calls`` is a list of (name, arguments)."""
    msg: dict = {"role": "assistant", "content": content}
    if tool_calls:
        msg["tool_calls"] = [
            {
                "id": f"call_{seq}_{i}",
                "type": "function",
                "function": {"name": name, "arguments": json.dumps(args, sort_keys=True)},
            }
            for i, (name, args) in enumerate(tool_calls)
        ]
    return {
        "id": f"chatcmpl-{seq:06d}",
        "object": "chat.completion",
        "created": 1_700_000_000 + seq,
        "model": model,
        "choices": [{"index": 0, "message": msg, "finish_reason": "tool_calls" if tool_calls else "stop"}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 5, "total_tokens": 15},
    }


class StubServer:
    """Base stub: records every request body and answers via ``respond``."""

    def __init__(self) -> None:
        self.requests: list[dict] = []

    def respond(self, body: dict) -> dict:  # pragma: no cover - overridden
        raise NotImplementedError

    def _handle(self, request: httpx.Request) -> httpx.Response:
        if not request.url.path.endswith("/v1/chat/completions"):
            return httpx.Response(404, json={"error": "not found"})
        body = json.loads(request.content)
        self.requests.append(body)
        return httpx.Response(200, json=self.respond(body))

    def transport(self) -> httpx.MockTransport:
        return httpx.MockTransport(self._handle)


class ScriptedCloud(StubServer):
    """Replays a fixed list of response bodies, then repeats the last one."""

    def __init__(self, script: list[dict]):
        super().__init__()
        if not script:
            raise ValueError("script must not be empty")
        self.script = script

    def respond(self, body: dict) -> dict:
        return self.script[min(len(self.requests) - 1, len(self.script) - 1)]


class LoopingCloud(StubServer):
    """Adversarial stub that requests a tool call on every turn."""

    def __init__(self, tool: str = "list_devices", args: dict | None = None):
        super().__init__()
        self.tool = tool
        self.args = args or {}

    def respond(self, body: dict) -> dict:
        return completion(len(self.requests), tool_calls=[(self.tool, self.args)])


class FlakyCloud(StubServer):
    """Fails the first ``failures`` requests with ``status`` (or a connect error when status is 0)."""

    def __init__(self, inner: StubServer, failures: int = 1, status: int = 503):
        super().__init__()
        self.inner = inner
        self.failures = failures
        self.status = status
        self.attempts = 0

    def _handle(self, request: httpx.Request) -> httpx.Response:
        self.attempts += 1
        if self.attempts <= self.failures:
            if self.status == 0:
                raise httpx.ConnectError("stub connection refused", request=request)
            return httpx.Response(self.status, json={"error": "unavailable"})
        return self.inner._handle(request)


_NUMBER = re.compile(r"\b(\d+(?:\.\d+)?)\b")


def _intents(text: str) -> list[tuple[str, dict]]:
    """Rule-based device intents for the home stub."""
    norm = normalize_query(text)
    words = f" {norm} "
    on = " on " in words
    off = " off " in words
    nums = [float(n) for n in _NUMBER.findall(norm)]
    calls: list[tuple[str, dict]] = []
    if any(k in words for k in (" lamp ", " light ", " lights ")):
        if "bright" in norm and nums:
            calls.append(("set_device", {"device_id": "lamp1", "capability": "brightness", "value": int(nums[0])}))
        elif on or off:
            calls.append(("set_device", {"device_id": "lamp1", "capability": "power", "value": "on" if on else "off"}))
    if any(k in words for k in (" thermostat ", " heating ")) and nums:
        calls.append(("set_device", {"device_id": "thermostat1", "capability": "set_target", "value": nums[-1]}))
    if " switch " in words and (on or off) and not any(k in words for k in (" lamp ", " light ")):
        calls.append(("set_device", {"device_id": "switch1", "capability": "power", "value": "on" if on else "off"}))
    return calls


class HomeCloud(StubServer):
    """Rule-driven stub: device commands become ``set_device`` calls, anything else an echo answer."""

    def __init__(self, intents: Callable[[str], list[tuple[str, dict]]] = _intents):
        super().__init__()
        self.intents = intents

    def respond(self, body: dict) -> dict:
        seq = len(self.requests)
        model = body.get("model", "stub-model")
        msgs = body["messages"]
        if msgs[-1]["role"] == "tool":
            outputs = []
            for m in reversed(msgs):
                if m["role"] != "tool":
                    break
                outputs.append(m["content"])
            return completion(seq, "Done: " + "; ".join(reversed(outputs)) + ".", model=model)
        user = next(m["content"] for m in reversed(msgs) if m["role"] == "user")
        calls = self.intents(user)
        if calls:
            return completion(seq, None, calls, model=model)
        return completion(seq, f"Cloud answer: {user}", model=model)
