"""Append-only interaction log (JSON lines) plus the feedback side-log."""

from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from edgeassist.actions import FeedbackRecord


@dataclass
class InteractionRecord:
    interaction_id: str
    session_id: str
    user_id: str
    query: str
    tier: str
    reply: str
    actions: list[dict[str, Any]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    timestamp: float = 0.0
    error: str | None = None
    cache_entry_id: str | None = None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "InteractionRecord":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def _read_jsonl(path: Path) -> list[dict]:
    out = []
    if not path.exists():
        return out
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError:
                # torn final write after a crash; everything before it is intact
                break
    return out


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class InteractionLog:
    """In-memory index over an optional JSONL file. Each append is flushed and fsynced."""

    def __init__(self, path: str | Path | None = None, feedback_path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.feedback_path = Path(feedback_path) if feedback_path else (
            self.path.with_name("feedback.jsonl") if self.path else None
        )
        self._lock = threading.Lock()
        self._records: dict[str, InteractionRecord] = {}
        self._order: list[str] = []
        self.feedback: list[FeedbackRecord] = []
        if self.path is not None:
            for d in _read_jsonl(self.path):
                rec = InteractionRecord.from_json(d)
                self._records[rec.interaction_id] = rec
                self._order.append(rec.interaction_id)
        if self.feedback_path is not None:
            for d in _read_jsonl(self.feedback_path):
                self.feedback.append(FeedbackRecord(d["interaction_id"], d["rating"], d["timestamp"]))

    @staticmethod
    def _append(path: Path, line: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def append(self, record: InteractionRecord) -> None:
        with self._lock:
            if self.path is not None:
                self._append(self.path, _dumps(record.to_json()))
            self._records[record.interaction_id] = record
            self._order.append(record.interaction_id)

    def record_feedback(self, fb: FeedbackRecord) -> None:
        with self._lock:
            if self.feedback_path is not None:
                self._append(self.feedback_path, _dumps(asdict(fb)))
            self.feedback.append(fb)

    def get(self, interaction_id: str) -> InteractionRecord | None:
        with self._lock:
            return self._records.get(interaction_id)

    def __len__(self) -> int:
        with self._lock:
            return len(self._order)

    def records(self) -> list[InteractionRecord]:
        with self._lock:
            return [self._records[i] for i in self._order]
