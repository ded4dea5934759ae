"""Synthetic test signals: speech surrogates, shaped noise, room impulse responses."""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

FS = 16_000


def speech_like(
    duration: float,
    rng: np.random.Generator,
    fs: int = FS,
    f0: float = 140.0,
    syllable_rate: float = 3.0,
    n_harmonics: int = 20,
    duty: float = 0.6,
) -> np.ndarray:
    """Voiced-speech surrogate: a gliding harmonic series under syllabic on/off envelopes.

    Syllables last ``duty / syllable_rate`` seconds and are separated by silence.
    Peak amplitude is normalised to 0.5.
    """
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    pitch = f0 * (1.0 + 0.08 * np.sin(2 * np.pi * 2.3 * t + rng.uniform(0, 2 * np.pi)))
    phase = 2 * np.pi * np.cumsum(pitch) / fs
    # formant-like spectral tilt: -6 dB/octave with a bump around 500-700 Hz
    x = np.zeros(n)
    for k in range(1, n_harmonics + 1):
        fk = k * f0
        gain = (1.0 / k) * (1.0 + 2.0 * np.exp(-(((fk - 600.0) / 250.0) ** 2)))
        x += gain * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    period = 1.0 / syllable_rate
    pos = (t % period) / period
    env = np.where(pos < duty, np.sin(np.pi * np.clip(pos / duty, 0, 1)) ** 0.5, 0.0)
    x *= env
    peak = np.max(np.abs(x))
    return 0.5 * x / peak if peak > 0 else x


def speech_shaped_noise(n: int, rng: np.random.Generator, rms: float = 0.1) -> np.ndarray:
    """White noise through a one-pole low-pass (rough long-term speech spectrum)."""
    x = lfilter([1.0], [1.0, -0.9], rng.standard_normal(n))
    return rms * x / np.sqrt(np.mean(x**2))


def white_noise(n: int, rng: np.random.Generator, rms: float = 0.1) -> np.ndarray:
    return rms * rng.standard_normal(n)


def sine(freq: float, duration: float, fs: int = FS, amplitude: float = 1.0) -> np.ndarray:
    t = np.arange(int(round(duration * fs))) / fs
    return amplitude * np.sin(2 * np.pi * freq * t)


def exponential_rir(rt60: float, rng: np.random.Generator, fs: int = FS, direct_gain: float = 1.0) -> np.ndarray:
    """Direct path plus a noise tail decaying 60 dB over ``rt60`` seconds."""
    n = int(rt60 * fs)
    t = np.arange(n) / fs
    tail = rng.standard_normal(n) * 10.0 ** (-3.0 * t / rt60)
    tail[: int(0.002 * fs)] = 0.0  # 2 ms gap before reflections
    h = 0.1 * tail
    h[0] = direct_gain
    return h


def scale_to_snr(signal: np.ndarray, noise: np.ndarray, snr_db: float) -> np.ndarray:
    """Rescale ``noise`` so that ``signal`` / ``noise`` power equals ``snr_db``."""
    ps = np.mean(signal**2)
    pn = np.mean(noise**2)
    return noise * np.sqrt(ps / (pn * 10.0 ** (snr_db / 10.0)))
