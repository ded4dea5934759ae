"""Plan-template library: keyword-triggered recipes of templated tool calls."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from edgeassist.cache import normalize_query
from edgeassist.controller.tools import ToolCall, ToolContext, ToolRegistry, keyword_present

PLACEHOLDER = re.compile(r"\{([A-Za-z_][\w.]*)\}")
# request slots always available; "sensor.<id>" resolves from the context snapshot
REQUEST_SLOTS = ("query", "user", "time")


@dataclass(frozen=True)
class PlanStep:
    tool: str
    args_template: dict[str, Any]


@dataclass(frozen=True)
class PlanTemplate:
    name: str
    trigger_keywords: tuple[str, ...]
    steps: tuple[PlanStep, ...]
    response_template: str

    def __post_init__(self) -> None:
        known = set(REQUEST_SLOTS)
        for i, step in enumerate(self.steps, 1):
            for ph in _placeholders(step.args_template):
                _require(ph, known, f"{self.name} step {i}")
            known.add(f"step{i}")
        for ph in PLACEHOLDER.findall(self.response_template):
            _require(ph, known, f"{self.name} response")

    @classmethod
    def from_json(cls, d: dict) -> "PlanTemplate":
        return cls(
            name=str(d["name"]),
            trigger_keywords=tuple(d["trigger_keywords"]),
            steps=tuple(PlanStep(s["tool"], dict(s.get("args_template", {}))) for s in d.get("steps", [])),
            response_template=str(d["response_template"]),
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trigger_keywords": list(self.trigger_keywords),
            "steps": [{"tool": s.tool, "args_template": s.args_template} for s in self.steps],
            "response_template": self.response_template,
        }


def _require(ph: str, known: set[str], where: str) -> None:
    if ph in known or ph.startswith("sensor."):
        return
    raise ValueError(f"{where}: unresolvable placeholder {{{ph}}}")


def _placeholders(value: Any) -> list[str]:
    if isinstance(value, str):
        return PLACEHOLDER.findall(value)
    if isinstance(value, dict):
        return [p for v in value.values() for p in _placeholders(v)]
    if isinstance(value, list):
        return [p for v in value for p in _placeholders(v)]
    return []


def substitute(value: Any, slots: dict[str, str]) -> Any:
    """Fill placeholders. A string that is exactly one placeholder takes the slot's raw value."""
    if isinstance(value, str):
        m = PLACEHOLDER.fullmatch(value)
        if m:
            return slots.get(m.group(1), "")
        return PLACEHOLDER.sub(lambda mm: str(slots.get(mm.group(1), "")), value)
    if isinstance(value, dict):
        return {k: substitute(v, slots) for k, v in value.items()}
    if isinstance(value, list):
        return [substitute(v, slots) for v in value]
    return value


def load_library(directory: str | Path | None = None) -> list[PlanTemplate]:
    """Read every ``*.json`` template in ``directory`` (default: the bundled library)."""
    if directory is None:
        files = [f for f in resources.files("edgeassist.templates").iterdir() if f.name.endswith(".json")]
    else:
        files = list(Path(directory).glob("*.json"))
    templates = [PlanTemplate.from_json(json.loads(f.read_text(encoding="utf-8"))) for f in files]
    return sorted(templates, key=lambda t: t.name)


def keyword_score(template: PlanTemplate, normalized_query: str) -> int:
    return sum(1 for kw in template.trigger_keywords if keyword_present(kw, normalized_query))


def select_plan_template(query_text: str, library: list[PlanTemplate]) -> PlanTemplate | None:
    """Most trigger keywords present wins; ties go to the lexicographically smallest name."""
    norm = normalize_query(query_text)
    best: PlanTemplate | None = None
    best_score = 0
    for t in library:
        score = keyword_score(t, norm)
        if score > best_score or (score == best_score and score > 0 and best is not None and t.name < best.name):
            best, best_score = t, score
    return best


def run_plan(template: PlanTemplate, slots: dict[str, str], tools: ToolRegistry, ctx: ToolContext) -> tuple[str, list]:
    """Execute the steps in order and render the response. Returns (reply, tool results)."""
    values = dict(slots)
    results = []
    for i, step in enumerate(template.steps, 1):
        args = substitute(step.args_template, values)
        res = tools.dispatch_tool(ToolCall(step.tool, args, f"plan-{i}"), ctx)
        results.append(res)
        values[f"step{i}"] = res.output if res.ok else f"(failed: {res.output})"
    return substitute(template.response_template, values), results
