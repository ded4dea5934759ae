"""Mel filterbank and MFCC features."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.fft import dct

from edgeassist.audio.frames import AudioFrame, hann

N_MELS = 26
LOG_FLOOR = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_band_edges(sample_rate: int, n_mels: int = N_MELS) -> np.ndarray:
    """``n_mels + 2`` edge frequencies (Hz), equally spaced on the mel scale from 0 to Nyquist."""
    return mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))


@lru_cache(maxsize=16)
def mel_filterbank(frame_len: int, sample_rate: int, n_mels: int = N_MELS) -> np.ndarray:
    """Triangular filters, shape ``(n_mels, frame_len // 2 + 1)``."""
    edges = mel_band_edges(sample_rate, n_mels)
    freqs = np.fft.rfftfreq(frame_len, d=1.0 / sample_rate)
    fb = np.zeros((n_mels, freqs.size))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (freqs - lo) / (mid - lo)
        falling = (hi - freqs) / (hi - mid)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
    fb.flags.writeable = False
    return fb


def mel_energies(frame: AudioFrame, n_mels: int = N_MELS) -> np.ndarray:
    x = frame.samples
    power = np.abs(np.fft.rfft(x * hann(x.size))) ** 2 / x.size
    return mel_filterbank(x.size, frame.sample_rate_hz, n_mels) @ power


def mfcc(frame: AudioFrame, n_coeffs: int = 13, n_mels: int = N_MELS) -> np.ndarray:
    if not 0 < n_coeffs <= n_mels:
        raise ValueError(f"n_coeffs must be in 1..{n_mels}")
    log_mel = np.log(np.maximum(mel_energies(frame, n_mels), LOG_FLOOR))
    return dct(log_mel, type=2, norm="ortho")[:n_coeffs]


def mfcc_sequence(frames: list[AudioFrame], n_coeffs: int = 13) -> np.ndarray:
    if not frames:
        return np.zeros((0, n_coeffs))
    return np.stack([mfcc(f, n_coeffs) for f in frames])
