"""ASR bridge: one transcription interface over a mock registry, a subprocess engine, or an HTTP engine."""

from __future__ import annotations

import enum
import json
import shlex
import subprocess
import threading
from dataclasses import dataclass, field

import httpx
import numpy as np

from edgeassist.audio.pipeline import CleanUtterance
from edgeassist.audio.wav import encode_wav
from edgeassist.errors import AsrTimeout, AsrUnavailable, LowConfidence
from edgeassist.hashing import fnv1a_64

def pcm16_bytes(samples: np.ndarray) -> bytes:
    pcm = np.clip(np.round(np.asarray(samples, dtype=np.float64) * 32768.0), -32768, 32767)
    return pcm.astype("<i2").tobytes()


def fingerprint(utterance: CleanUtterance) -> int:
    """FNV-1a over the utterance's samples as 16-bit little-endian PCM."""
    return fnv1a_64(pcm16_bytes(utterance.samples))


@dataclass(frozen=True)
class Word:
    token: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class Transcript:
    text: str
    confidence: float
    words: tuple[Word, ...] = ()
    engine_id: str = "mock"

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")
        prev_end = None
        for w in self.words:
            if w.end_ms < w.start_ms or (prev_end is not None and w.start_ms < prev_end):
                raise ValueError("word spans must be ordered and non-overlapping")
            prev_end = w.end_ms
        if self.words and self.text != " ".join(w.token for w in self.words):
            raise ValueError("text must equal the space-joined word tokens")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "confidence": self.confidence,
            "words": [[w.token, w.start_ms, w.end_ms] for w in self.words],
            "engine_id": self.engine_id,
        }

    @classmethod
    def from_dict(cls, d: dict, engine_id: str | None = None) -> "Transcript":
        words = tuple(Word(str(t), int(a), int(b)) for t, a, b in d.get("words", []))
        text = str(d.get("text", ""))
        if words and text != " ".join(w.token for w in words):
            text = " ".join(w.token for w in words)
        return cls(text, float(d.get("confidence", 0.0)), words, engine_id or d.get("engine_id", "external"))


class EngineKind(str, enum.Enum):
    MOCK = "mock"
    SUBPROCESS = "subprocess"
    HTTP = "http"


@dataclass
class AsrEngineSpec:
    kind: EngineKind = EngineKind.MOCK
    endpoint_or_path: str = ""
    timeout_ms: int = 5_000
    min_confidence: float = 0.5

    def __post_init__(self) -> None:
        self.kind = EngineKind(self.kind)
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must lie in [0, 1]")


def spread_words(text: str, segments: list[tuple[int, int]], sample_rate: int) -> tuple[Word, ...]:
    """Lay tokens evenly over the speech span (first segment start to last segment end)."""
    tokens = text.split()
    if not tokens:
        return ()
    if segments:
        start_ms = segments[0][0] * 1000 // sample_rate
        end_ms = segments[-1][1] * 1000 // sample_rate
    else:
        start_ms, end_ms = 0, 0
    step = (end_ms - start_ms) / len(tokens)
    bounds = [start_ms + int(round(i * step)) for i in range(len(tokens) + 1)]
    return tuple(Word(t, bounds[i], bounds[i + 1]) for i, t in enumerate(tokens))


@dataclass
class MockRegistry:
    """Fingerprint -> (text, confidence). Safe for concurrent use."""

    _entries: dict[int, tuple[str, float]] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def register(self, fp: int, text: str, confidence: float = 1.0) -> None:
        if not 0.0 <= confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")
        with self._lock:
            self._entries[int(fp)] = (" ".join(text.split()), float(confidence))

    def get(self, fp: int) -> tuple[str, float] | None:
        with self._lock:
            return self._entries.get(int(fp))

    def to_json(self) -> dict:
        with self._lock:
            return {f"{k:016x}": {"text": t, "confidence": c} for k, (t, c) in sorted(self._entries.items())}

    @classmethod
    def from_json(cls, doc: dict) -> "MockRegistry":
        reg = cls()
        for k, v in doc.items():
            reg.register(int(k, 16), v["text"], v.get("confidence", 1.0))
        return reg


DEFAULT_REGISTRY = MockRegistry()


def register_mock_utterance(fp: int, text: str, confidence: float = 1.0, registry: MockRegistry | None = None) -> None:
    (registry or DEFAULT_REGISTRY).register(fp, text, confidence)


def _mock_transcribe(utt: CleanUtterance, registry: MockRegistry) -> Transcript:
    hit = registry.get(fingerprint(utt))
    if hit is None:
        return Transcript("", 0.0, (), "mock")
    text, conf = hit
    return Transcript(text, conf, spread_words(text, utt.segments, utt.sample_rate), "mock")


def _subprocess_transcribe(utt: CleanUtterance, spec: AsrEngineSpec) -> Transcript:
    try:
        proc = subprocess.run(
            shlex.split(spec.endpoint_or_path),
            input=encode_wav(utt.samples, utt.sample_rate),
            capture_output=True,
            timeout=spec.timeout_ms / 1000.0,
        )
    except subprocess.TimeoutExpired as exc:
        raise AsrTimeout(f"ASR subprocess exceeded {spec.timeout_ms} ms") from exc
    except OSError as exc:
        raise AsrUnavailable(f"cannot start ASR subprocess: {exc}") from exc
    if proc.returncode != 0:
        raise AsrUnavailable(f"ASR subprocess exited with {proc.returncode}: {proc.stderr[:200]!r}")
    lines = proc.stdout.decode("utf-8", "replace").strip().splitlines()
    try:
        return Transcript.from_dict(json.loads(lines[0]), "subprocess")
    except (IndexError, ValueError, KeyError, TypeError) as exc:
        raise AsrUnavailable(f"ASR subprocess produced invalid JSON: {exc}") from exc


def _http_transcribe(utt: CleanUtterance, spec: AsrEngineSpec, transport: httpx.BaseTransport | None = None) -> Transcript:
    wav = encode_wav(utt.samples, utt.sample_rate)
    try:
        with httpx.Client(timeout=spec.timeout_ms / 1000.0, transport=transport) as client:
            resp = client.post(spec.endpoint_or_path, files={"file": ("utterance.wav", wav, "audio/wav")})
            resp.raise_for_status()
            return Transcript.from_dict(resp.json(), "http")
    except httpx.TimeoutException as exc:
        raise AsrTimeout(f"ASR endpoint exceeded {spec.timeout_ms} ms") from exc
    except (httpx.HTTPError, ValueError, KeyError, TypeError) as exc:
        raise AsrUnavailable(f"ASR endpoint failed: {exc}") from exc


def transcribe(
    utterance: CleanUtterance,
    engine: AsrEngineSpec | None = None,
    registry: MockRegistry | None = None,
    transport: httpx.BaseTransport | None = None,
) -> Transcript:
    """Transcribe one utterance.

    Utterances without speech segments give an empty transcript with
    confidence 0. A result under ``min_confidence`` raises ``LowConfidence``.
    """
    spec = engine or AsrEngineSpec()
    if not utterance.segments:
        return Transcript("", 0.0, (), spec.kind.value)
    if spec.kind is EngineKind.MOCK:
        result = _mock_transcribe(utterance, registry or DEFAULT_REGISTRY)
    elif spec.kind is EngineKind.SUBPROCESS:
        result = _subprocess_transcribe(utterance, spec)
    else:
        result = _http_transcribe(utterance, spec, transport)
    if result.confidence < spec.min_confidence:
        raise LowConfidence(
            f"confidence {result.confidence:.2f} below {spec.min_confidence:.2f}",
            confidence=result.confidence,
            text=result.text,
        )
    return result
