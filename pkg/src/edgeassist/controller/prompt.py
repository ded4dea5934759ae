"""Prompt assembly under a token budget."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from edgeassist.context import ContextSnapshot, UserProfile, format_context_for_prompt
from edgeassist.controller.tools import ToolSchema

if TYPE_CHECKING:
    from edgeassist.controller.plans import PlanTemplate

DEFAULT_SYSTEM_TEXT = (
    "You are a home voice assistant running on an edge gateway. "
    "Answer briefly and plainly; replies are spoken aloud. "
    "Use the provided tools to control devices or read sensors instead of guessing. "
    "Never claim an action succeeded unless a tool result says so. "
    "Refuse requests that could endanger people or property."
)


def estimate_tokens(text: str) -> int:
    """Approximate token count: one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class Turn:
    role: str  # "user" | "assistant"
    content: str


@dataclass
class PromptConfig:
    system_text: str = DEFAULT_SYSTEM_TEXT
    token_budget: int = 2048
    max_history_turns: int = 12


@dataclass
class PromptBundle:
    system_text: str
    context_block: str
    history: list[Turn]
    user_text: str
    tools: list[ToolSchema] = field(default_factory=list)
    template_text: str = ""

    def token_estimate(self) -> int:
        return sum(estimate_tokens(p) for p in self._parts())

    def _parts(self) -> list[str]:
        return [self.system_text, self.context_block, self.template_text, self.user_text] + [
            t.content for t in self.history
        ]

    def system_message(self) -> str:
        text = self.system_text
        if self.context_block:
            text += "\n\nContext:\n" + self.context_block
        if self.template_text:
            text += "\n\n" + self.template_text
        return text

    def to_messages(self) -> list[dict]:
        msgs = [{"role": "system", "content": self.system_message()}]
        msgs += [{"role": t.role, "content": t.content} for t in self.history]
        msgs.append({"role": "user", "content": self.user_text})
        return msgs

    def flatten(self) -> str:
        """Single-string prompt for models without a chat format."""
        lines = [self.system_message(), ""]
        lines += [f"{t.role}: {t.content}" for t in self.history]
        lines.append(f"user: {self.user_text}")
        lines.append("assistant:")
        return "\n".join(lines)


def template_instructions(template: "PlanTemplate") -> str:
    steps = "; ".join(f"{i}. call {s.tool} with {s.args_template}" for i, s in enumerate(template.steps, 1))
    return (
        f"Task plan '{template.name}': {steps or 'no tool steps'}. "
        f"Phrase the reply like: {template.response_template}"
    )


def build_prompt(
    query: str,
    snapshot: ContextSnapshot | None = None,
    profile: UserProfile | None = None,
    history: list[Turn] | None = None,
    template: "PlanTemplate | None" = None,
    config: PromptConfig | None = None,
    tools: list[ToolSchema] | None = None,
) -> PromptBundle:
    """Assemble a bundle; history is trimmed oldest-first to fit the token budget.

    If the fixed parts alone overflow, the context block goes next, then the
    user text is cut from the front.
    """
    cfg = config or PromptConfig()
    kept = list(history or [])[-cfg.max_history_turns :] if cfg.max_history_turns > 0 else []
    bundle = PromptBundle(
        system_text=cfg.system_text,
        context_block=format_context_for_prompt(snapshot, profile),
        history=kept,
        user_text=query,
        tools=list(tools or []),
        template_text=template_instructions(template) if template is not None else "",
    )
    while bundle.history and bundle.token_estimate() > cfg.token_budget:
        bundle.history.pop(0)
    if bundle.token_estimate() > cfg.token_budget:
        bundle.context_block = ""
    over = bundle.token_estimate() - cfg.token_budget
    if over > 0:
        bundle.user_text = bundle.user_text[min(len(bundle.user_text), 4 * over) :]
    return bundle
