"""Edge-model adapters: the interface, a deterministic mock, and an OpenAI-compatible local server client."""

from __future__ import annotations

import random
from typing import Protocol

import httpx

from edgeassist.controller.prompt import PromptBundle, estimate_tokens
from edgeassist.errors import AdapterFailure
from edgeassist.hashing import fnv1a_64

FALLBACK_REPLY = "Sorry, I can't answer that right now. Please try again in a moment."

_CANNED = (
    "Here's what I know about {topic}: I can only give a short answer while working locally.",
    "About {topic}: a quick local answer is all I have at the moment.",
    "On {topic}, my offline knowledge is limited, but I'll do my best.",
    "You asked about {topic}. I'm answering from the on-device model.",
)


class EdgeModelAdapter(Protocol):
    max_tokens: int
    deterministic: bool

    def generate(self, prompt: str) -> str: ...


class MockEdgeModel:
    """Deterministic stand-in: picks a canned reply seeded by ``(seed, fnv1a(prompt))``."""

    deterministic = True

    def __init__(self, seed: int = 0, max_tokens: int = 64):
        self.seed = seed
        self.max_tokens = max_tokens

    def generate(self, prompt: str) -> str:
        rng = random.Random((self.seed << 64) ^ fnv1a_64(prompt.encode("utf-8")))
        user_lines = [ln[6:] for ln in prompt.splitlines() if ln.startswith("user: ")]
        topic = " ".join((user_lines[-1] if user_lines else prompt).split()[:8]) or "that"
        return rng.choice(_CANNED).format(topic=topic)


class OpenAICompatEdgeModel:
    """Client for a local OpenAI-compatible server (llama.cpp, vLLM and the like)."""

    deterministic = False

    def __init__(self, base_url: str, model: str, max_tokens: int = 128, timeout_s: float = 10.0,
                 transport: httpx.BaseTransport | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.max_tokens = max_tokens
        self.timeout_s = timeout_s
        self.transport = transport

    def generate(self, prompt: str) -> str:
        body = {"model": self.model, "messages": [{"role": "user", "content": prompt}], "max_tokens": self.max_tokens}
        with httpx.Client(timeout=self.timeout_s, transport=self.transport) as client:
            resp = client.post(f"{self.base_url}/v1/chat/completions", json=body)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"] or ""


def clip_to_tokens(text: str, max_tokens: int) -> str:
    if estimate_tokens(text) <= max_tokens:
        return text
    cut = text[: 4 * max_tokens]
    if " " in cut:
        cut = cut[: cut.rfind(" ")]
    return cut


def edge_generate(bundle: PromptBundle, adapter: EdgeModelAdapter) -> str:
    """Run the local model on the flattened prompt. Adapter errors surface as ``AdapterFailure``."""
    try:
        text = adapter.generate(bundle.flatten())
    except Exception as exc:  # noqa: BLE001
        raise AdapterFailure(f"edge model failed: {exc}") from exc
    return clip_to_tokens(text.strip(), adapter.max_tokens)
