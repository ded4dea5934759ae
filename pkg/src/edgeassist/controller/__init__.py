"""The controller: routing, prompt assembly, cloud tool loop, edge model, plan templates."""

from __future__ import annotations

import threading
from collections import defaultdict

from edgeassist.controller.cloud import CloudClient, CloudConfig, CloudReply, call_cloud
from edgeassist.controller.edge import FALLBACK_REPLY, EdgeModelAdapter, MockEdgeModel, edge_generate
from edgeassist.controller.plans import PlanTemplate, load_library, run_plan, select_plan_template
from edgeassist.controller.prompt import PromptBundle, PromptConfig, Turn, build_prompt
from edgeassist.controller.routing import Connectivity, Reason, RouteTier, RoutingConfig, RoutingDecision, route
from edgeassist.controller.tools import ToolCall, ToolContext, ToolRegistry, ToolResult, ToolSchema


class SessionStore:
    """Per-session chat history with one lock per session."""

    def __init__(self, max_turns: int = 50):
        self.max_turns = max_turns
        self._history: dict[str, list[Turn]] = defaultdict(list)
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks[session_id]

    def history(self, session_id: str) -> list[Turn]:
        with self._guard:
            return list(self._history.get(session_id, []))

    def append(self, session_id: str, user_text: str, reply: str) -> None:
        with self._guard:
            h = self._history[session_id]
            h.extend([Turn("user", user_text), Turn("assistant", reply)])
            del h[: max(0, len(h) - self.max_turns)]


__all__ = [
    "CloudClient", "CloudConfig", "CloudReply", "Connectivity", "EdgeModelAdapter", "FALLBACK_REPLY",
    "MockEdgeModel", "PlanTemplate", "PromptBundle", "PromptConfig", "Reason", "RouteTier",
    "RoutingConfig", "RoutingDecision", "SessionStore", "ToolCall", "ToolContext", "ToolRegistry",
    "ToolResult", "ToolSchema", "Turn", "build_prompt", "call_cloud", "edge_generate", "load_library",
    "route", "run_plan", "select_plan_template",
]
