from __future__ import annotations

import json

from edgeassist.actions import FeedbackRecord
from edgeassist.interactions import InteractionLog, InteractionRecord


def rec(i: int) -> InteractionRecord:
    return InteractionRecord(f"ix-{i}", "s1", "u1", f"query {i}", "edge", f"reply {i}", timings={"total": 1.5}, timestamp=float(i))


def test_append_and_reload(tmp_path):
    path = tmp_path / "interactions.jsonl"
    log = InteractionLog(path)
    for i in range(3):
        log.append(rec(i))
    log.record_feedback(FeedbackRecord("ix-1", 1, 9.0))
    again = InteractionLog(path)
    assert [r.interaction_id for r in again.records()] == ["ix-0", "ix-1", "ix-2"]
    assert again.get("ix-2") == rec(2)
    assert again.feedback == [FeedbackRecord("ix-1", 1, 9.0)]
    assert (tmp_path / "feedback.jsonl").exists()


def test_lines_are_canonical_json(tmp_path):
    path = tmp_path / "log.jsonl"
    InteractionLog(path).append(rec(0))
    line = path.read_text().splitlines()[0]
    assert line == json.dumps(json.loads(line), sort_keys=True, separators=(",", ":"))


def test_torn_final_line_is_ignored(tmp_path):
    path = tmp_path / "log.jsonl"
    log = InteractionLog(path)
    log.append(rec(0))
    log.append(rec(1))
    with path.open("a") as fh:
        fh.write('{"interaction_id": "ix-2", "sess')
    again = InteractionLog(path)
    assert len(again) == 2 and again.get("ix-2") is None


def test_unknown_fields_ignored_on_load():
    d = rec(0).to_json() | {"future_field": 1}
    assert InteractionRecord.from_json(d) == rec(0)


def test_memory_only_log():
    log = InteractionLog()
    log.append(rec(0))
    assert log.get("ix-0").reply == "reply 0" and len(log) == 1
