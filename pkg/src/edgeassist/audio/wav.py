"""PCM WAV I/O: RIFF, 16-bit signed little-endian, mono, 16 kHz."""

from __future__ import annotations

import io
import wave
from pathlib import Path

import numpy as np

from edgeassist.audio.frames import DEFAULT_SAMPLE_RATE
from edgeassist.errors import WavFormatError


def decode_wav(data: bytes, expected_rate: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """Decode WAV bytes to float64 samples in [-1, 1)."""
    try:
        with wave.open(io.BytesIO(data), "rb") as wf:
            channels, width, rate = wf.getnchannels(), wf.getsampwidth(), wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"not a PCM WAV file: {exc}") from exc
    if channels != 1:
        raise WavFormatError(f"expected mono audio, got {channels} channels")
    if width != 2:
        raise WavFormatError(f"expected 16-bit samples, got {8 * width}-bit")
    if rate != expected_rate:
        raise WavFormatError(f"expected {expected_rate} Hz, got {rate} Hz")
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


def encode_wav(samples: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> bytes:
    pcm = np.clip(np.round(np.asarray(samples, dtype=np.float64) * 32768.0), -32768, 32767)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.astype("<i2").tobytes())
    return buf.getvalue()


def read_wav(path: str | Path, expected_rate: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    return decode_wav(Path(path).read_bytes(), expected_rate)


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> None:
    Path(path).write_bytes(encode_wav(samples, sample_rate))
