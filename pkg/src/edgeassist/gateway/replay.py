"""Record and replay interaction sessions against the deterministic mocks.

A session file is JSON lines. The first line is the setup::

    {"kind": "setup", "config": {...}, "asr_registry": {...}, "clock_start": 1700000000.0}

followed by steps, each carrying what the gateway answered when recorded::

    {"kind": "interact", "request": {...}, "status": 200, "response": {...}}
    {"kind": "feedback", "interaction_id": "...", "rating": 1, "status": 204}
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from edgeassist.asr import MockRegistry
from edgeassist.clock import FakeClock
from edgeassist.controller.stubs import HomeCloud
from edgeassist.errors import BadRequest, UnknownInteraction
from edgeassist.gateway.config import parse_config
from edgeassist.gateway.service import Gateway, canonical_json


def mock_gateway(setup: dict, data_dir: str | Path) -> Gateway:
    """A gateway wired to the fake clock, rule-based cloud stub and a private mock-ASR registry."""
    doc = dict(setup.get("config", {}))
    doc["data_dir"] = str(data_dir)
    config = parse_config(json.dumps(doc), "<session setup>", env={})
    registry = MockRegistry.from_json(setup["asr_registry"]) if "asr_registry" in setup else MockRegistry()
    return Gateway(
        config,
        clock=FakeClock(start=float(setup.get("clock_start", 1_700_000_000.0))),
        cloud_transport=HomeCloud().transport(),
        asr_registry=registry,
    )


def run_steps(gateway: Gateway, steps: list[dict]) -> list[dict]:
    out = []
    for step in steps:
        if step["kind"] == "interact":
            resp = gateway.handle_interact(step["request"])
            out.append({"kind": "interact", "request": step["request"], "status": resp.status, "response": resp.to_json()})
        elif step["kind"] == "feedback":
            try:
                gateway.handle_feedback(step["interaction_id"], step["rating"])
                status = 204
            except BadRequest:
                status = 400
            except UnknownInteraction:
                status = 404
            out.append({"kind": "feedback", "interaction_id": step["interaction_id"], "rating": step["rating"], "status": status})
        else:
            raise ValueError(f"unknown step kind {step['kind']!r}")
    return out


def read_session(path: str | Path) -> tuple[dict, list[dict]]:
    lines = [json.loads(ln) for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0].get("kind") != "setup":
        raise ValueError(f"{path}: first line must be the setup record")
    return lines[0], lines[1:]


def write_session(path: str | Path, setup: dict, steps: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in [setup, *steps]:
            fh.write(canonical_json(rec) + "\n")


def record_session(path: str | Path, setup: dict, steps: list[dict]) -> list[dict]:
    """Run ``steps`` on a fresh mock gateway and write the session file."""
    with tempfile.TemporaryDirectory(prefix="ia-record-") as tmp:
        gw = mock_gateway(setup, tmp)
        try:
            recorded = run_steps(gw, steps)
        finally:
            gw.cloud.close()
    write_session(path, {"kind": "setup", **{k: v for k, v in setup.items() if k != "kind"}}, recorded)
    return recorded


@dataclass
class ReplayReport:
    total: int
    mismatches: list[tuple[int, str, str]]  # (step index, expected, actual)

    @property
    def identical(self) -> bool:
        return not self.mismatches


def replay_session(path: str | Path) -> ReplayReport:
    """Re-run a recorded session and compare each step's canonical JSON byte for byte."""
    setup, steps = read_session(path)
    with tempfile.TemporaryDirectory(prefix="ia-replay-") as tmp:
        gw = mock_gateway(setup, tmp)
        try:
            actual = run_steps(gw, steps)
        finally:
            gw.cloud.close()
    mismatches = []
    for i, (want, got) in enumerate(zip(steps, actual)):
        a, b = canonical_json(want), canonical_json(got)
        if a != b:
            mismatches.append((i, a, b))
    return ReplayReport(len(steps), mismatches)


def session_setup(config: dict[str, Any] | None = None, registry: MockRegistry | None = None) -> dict:
    setup: dict[str, Any] = {"kind": "setup", "config": config or {}, "clock_start": 1_700_000_000.0}
    if registry is not None:
        setup["asr_registry"] = registry.to_json()
    return setup
