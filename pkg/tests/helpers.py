"""Shared builders for gateway-level tests."""

from __future__ import annotations

import base64
from pathlib import Path

import numpy as np

from edgeassist.asr import MockRegistry
from edgeassist.audio.synth import speech_like
from edgeassist.audio.wav import encode_wav
from edgeassist.clock import FakeClock
from edgeassist.controller.stubs import HomeCloud, StubServer
from edgeassist.gateway import Gateway
from edgeassist.gateway.config import parse_config


def make_gateway(data_dir: Path, cloud: StubServer | None = None, clock=None, **config) -> Gateway:
    import json

    cfg = parse_config(json.dumps({"data_dir": str(data_dir), **config}), env={})
    return Gateway(
        cfg,
        clock=clock or FakeClock(),
        cloud_transport=(cloud or HomeCloud()).transport(),
        asr_registry=MockRegistry(),
    )


def text_request(payload: str, session: str = "s1", user: str = "u1", **options) -> dict:
    body = {"session_id": session, "user_id": user, "input": {"type": "text", "payload": payload}}
    if options:
        body["options"] = options
    return body


def audio_samples(seed: int = 11) -> np.ndarray:
    return np.concatenate([np.zeros(3000), speech_like(1.0, np.random.default_rng(seed)), np.zeros(3000)])


def audio_request(samples: np.ndarray, session: str = "s1", user: str = "u1") -> dict:
    payload = base64.b64encode(encode_wav(samples)).decode("ascii")
    return {"session_id": session, "user_id": user, "input": {"type": "audio_wav", "payload": payload}}
