"""Framing, STFT analysis and overlap-add resynthesis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from edgeassist.errors import EmptySignal

DEFAULT_SAMPLE_RATE = 16_000
DEFAULT_FRAME_LEN = 512
DEFAULT_HOP = 256


@dataclass
class AudioFrame:
    samples: np.ndarray
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE
    index: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.samples, dtype=np.float64)
        self.samples = np.clip(np.nan_to_num(x, nan=0.0, posinf=1.0, neginf=-1.0), -1.0, 1.0)
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class Spectrum:
    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self) -> None:
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.float64)
        self.phases = np.asarray(self.phases, dtype=np.float64)
        if self.magnitudes.shape != self.phases.shape:
            raise ValueError("magnitudes and phases must have the same shape")
        if np.any(self.magnitudes < 0):
            raise ValueError("magnitudes must be non-negative")

    @property
    def bin_count(self) -> int:
        return self.magnitudes.size

    @property
    def power(self) -> np.ndarray:
        return self.magnitudes**2

    @classmethod
    def from_complex(cls, z: np.ndarray) -> "Spectrum":
        return cls(np.abs(z), np.angle(z))

    def to_complex(self) -> np.ndarray:
        return self.magnitudes * np.exp(1j * self.phases)

    def with_power(self, power: np.ndarray) -> "Spectrum":
        """Same phases, magnitudes replaced by ``sqrt(power)``."""
        return Spectrum(np.sqrt(np.maximum(power, 0.0)), self.phases.copy())


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    return -(-max(n_samples - frame_len, 0) // hop) + 1


def frame_matrix(samples: Sequence[float] | np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Stack zero-padded windows into an ``(n_frames, frame_len)`` array."""
    if frame_len <= 0:
        raise ValueError("frame_len must be positive")
    if not 0 < hop <= frame_len:
        raise ValueError("hop must satisfy 0 < hop <= frame_len")
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptySignal("cannot frame an empty signal")
    n = frame_count(x.size, frame_len, hop)
    padded = np.zeros((n - 1) * hop + frame_len)
    padded[: x.size] = x
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n)[:, None]
    return padded[idx]


def frame_signal(
    samples: Sequence[float] | np.ndarray,
    frame_len: int,
    hop: int,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE,
) -> list[AudioFrame]:
    """Split ``samples`` into frames of ``frame_len`` starting every ``hop`` samples.

    The final partial window is zero-padded. Raises ``EmptySignal`` on empty input.
    """
    mat = frame_matrix(samples, frame_len, hop)
    return [AudioFrame(row, sample_rate_hz, i) for i, row in enumerate(mat)]


def hann(frame_len: int) -> np.ndarray:
    # periodic Hann: shifted copies at hop = frame_len/2 sum to exactly 1
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(frame_len) / frame_len)


def analyze(frames: np.ndarray, window: np.ndarray) -> list[Spectrum]:
    z = np.fft.rfft(frames * window[None, :], axis=1)
    return [Spectrum.from_complex(row) for row in z]


def stft(samples: np.ndarray, frame_len: int, hop: int) -> tuple[list[Spectrum], int]:
    """Windowed STFT with ``frame_len - hop`` zeros of lead/tail padding.

    Returns the spectra and the original length, which :func:`istft` needs to trim.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptySignal("cannot analyze an empty signal")
    pad = frame_len - hop
    padded = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    return analyze(frame_matrix(padded, frame_len, hop), hann(frame_len)), x.size


def istft(spectra: Sequence[Spectrum], frame_len: int, hop: int, length: int) -> np.ndarray:
    """Overlap-add resynthesis normalised by the summed analysis window."""
    window = hann(frame_len)
    n = len(spectra)
    total = (n - 1) * hop + frame_len
    out = np.zeros(total)
    wsum = np.zeros(total)
    for i, spec in enumerate(spectra):
        start = i * hop
        out[start : start + frame_len] += np.fft.irfft(spec.to_complex(), n=frame_len)
        wsum[start : start + frame_len] += window
    nz = wsum > 1e-8
    out[nz] /= wsum[nz]
    out[~nz] = 0.0
    pad = frame_len - hop
    return out[pad : pad + length]
