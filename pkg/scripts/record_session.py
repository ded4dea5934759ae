"""Record the 5-interaction replay fixture (tests/fixtures/session_5.jsonl).

The session covers every tier: a cloud tool call, an edge chat answer, positive
feedback that caches the first answer, a cache hit on a repeat, a template plan,
and a spoken request through the audio front-end and mock ASR.

    python scripts/record_session.py [--out PATH]
"""

from __future__ import annotations

import argparse
import base64
import tempfile
from pathlib import Path

import numpy as np

from edgeassist.asr import MockRegistry
from edgeassist.audio.synth import speech_like
from edgeassist.audio.wav import encode_wav
from edgeassist.gateway.replay import mock_gateway, record_session, session_setup

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "session_5.jsonl"
CONFIG = {"seed": 7, "cache": {"capacity": 100}}


def spoken_command() -> np.ndarray:
    rng = np.random.default_rng(2024)
    return np.concatenate([np.zeros(4000), speech_like(1.2, rng), np.zeros(4000)])


def text(session: str, payload: str) -> dict:
    return {"session_id": session, "user_id": "alex", "input": {"type": "text", "payload": payload}}


def build(out: Path) -> list[dict]:
    registry = MockRegistry()
    audio = spoken_command()
    # register through a scratch gateway so the fingerprint follows the API audio path
    with tempfile.TemporaryDirectory() as tmp:
        scratch = mock_gateway(session_setup(CONFIG), tmp)
        scratch.asr_registry = registry
        scratch.register_utterance(audio, "switch the lamp off")
        scratch.cloud.close()
    setup = session_setup(CONFIG, registry)
    wav_b64 = base64.b64encode(encode_wav(audio)).decode("ascii")
    steps = [
        {"kind": "interact", "request": text("s1", "Turn on the lamp please")},
        {"kind": "interact", "request": text("s1", "tell me a joke")},
        {"kind": "feedback", "interaction_id": "ix7-00000001", "rating": 1},
        {"kind": "interact", "request": text("s2", "turn on the lamp please!")},
        {"kind": "interact", "request": text("s2", "good night")},
        {"kind": "interact", "request": {"session_id": "s3", "user_id": "alex",
                                         "input": {"type": "audio_wav", "payload": wav_b64}}},
    ]
    return record_session(out, setup, steps)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    recorded = build(args.out)
    for step in recorded:
        if step["kind"] == "interact":
            r = step["response"]
            print(f"{r['interaction_id']}  {step['status']}  {r['source_tier']:<7}  {r['reply_text'][:60]}")
        else:
            print(f"feedback {step['interaction_id']} {step['rating']:+d} -> {step['status']}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
