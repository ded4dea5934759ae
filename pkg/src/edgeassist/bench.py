"""Synthetic scenarios and measurements shared by the acceptance tests and scripts/."""

from __future__ import annotations

import base64
import string
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from edgeassist.audio.aec import AecConfig, EchoCancellerState, cancel_in_place
from edgeassist.audio.enhance import NoiseProfile, estimate_noise, spectral_subtract
from edgeassist.audio.frames import AudioFrame, frame_matrix, istft, stft
from edgeassist.audio.metrics import erle_db, f1_score, segmental_snr
from edgeassist.audio.synth import FS, sine, speech_like, speech_shaped_noise, white_noise
from edgeassist.audio.vad import VadTracker
from edgeassist.cache import CacheConfig, SemanticCache


# -- echo cancellation -----------------------------------------------------------
@dataclass
class EchoScenario:
    mic: np.ndarray
    reference: np.ndarray
    echo: np.ndarray
    near: np.ndarray


def echo_scenario(seed: int, duration: float = 2.0, delay: int = 8, gain: float = 0.5, near_snr_db: float | None = 0.0) -> EchoScenario:
    """mic = gain * reference delayed by ``delay`` + near-end speech at ``near_snr_db`` relative to the echo.

    The reference is white noise (rms 0.25). ``near_snr_db=None`` gives an echo-only mic.
    """
    rng = np.random.default_rng(seed)
    n = int(duration * FS)
    ref = white_noise(n, rng, 0.25)
    echo = gain * np.concatenate([np.zeros(delay), ref[:-delay]])
    if near_snr_db is None:
        near = np.zeros(n)
    else:
        s = speech_like(duration, rng)
        near = s * np.sqrt(np.mean(echo**2) / np.mean(s**2) / 10.0 ** (near_snr_db / 10.0))
    return EchoScenario(echo + near, ref, echo, near)


def measure_erle(sc: EchoScenario, config: AecConfig | None = None, tail_s: float = 0.5) -> tuple[float, np.ndarray, float]:
    """ERLE over the final ``tail_s`` seconds; returns (erle_db, output, runtime_s)."""
    state = EchoCancellerState.initial(config or AecConfig())
    t0 = time.perf_counter()
    out = cancel_in_place(sc.mic, sc.reference, state)
    runtime = time.perf_counter() - t0
    k = sc.mic.size - int(tail_s * FS)
    return erle_db(sc.echo[k:], (out - sc.near)[k:]), out, runtime


# -- VAD ---------------------------------------------------------------------------
def vad_scenario(
    seed: int,
    duration: float = 10.0,
    block_s: float = 1.0,
    speech_first: bool = False,
    speech_rms: float = 0.1,
    snr_db: float = 20.0,
    frame_len: int = 512,
    hop: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """Alternating speech-shaped-noise / silence blocks over a white background ``snr_db`` below.

    Returns the signal and per-frame truth (frame is speech when at least half its samples are).
    """
    rng = np.random.default_rng(seed)
    n = int(duration * FS)
    block = int(block_s * FS)
    labels = ((np.arange(n) // block) % 2) == (0 if speech_first else 1)
    speech = speech_shaped_noise(n, rng, speech_rms)
    background = white_noise(n, rng, speech_rms / 10.0 ** (snr_db / 20.0))
    x = np.where(labels, speech, 0.0) + background
    truth = frame_matrix(labels.astype(float), frame_len, hop).mean(axis=1) >= 0.5
    return x, truth


def measure_vad_f1(x: np.ndarray, truth: np.ndarray, frame_len: int = 512, hop: int = 256) -> float:
    tracker = VadTracker()
    decisions = [tracker.step(AudioFrame(row)) for row in frame_matrix(x, frame_len, hop)]
    return f1_score([d.is_speech for d in decisions], truth)


# -- denoising ---------------------------------------------------------------------
def denoise_scenario(seed: int, lead_frames: int = 10, freq: float = 1000.0, amplitude: float = 0.3,
                     duration: float = 2.0, frame_len: int = 512, hop: int = 256):
    """A sine after ``lead_frames`` noise-only analysis frames, white noise at 0 dB SNR.

    Returns (clean, noisy, lead_samples). The STFT's ``frame_len - hop`` lead
    padding is included so exactly ``lead_frames`` frames see noise only.
    """
    rng = np.random.default_rng(seed)
    lead = lead_frames * hop + (frame_len - hop)
    clean = np.concatenate([np.zeros(lead), sine(freq, duration, amplitude=amplitude)])
    noise = white_noise(clean.size, rng, amplitude / np.sqrt(2.0))
    return clean, clean + noise, lead


def measure_denoise_gain(clean, noisy, lead, lead_frames: int = 10, frame_len: int = 512, hop: int = 256) -> tuple[float, float]:
    """(input segmental SNR, output segmental SNR) over the region after the noise lead."""
    spectra, n = stft(noisy, frame_len, hop)
    profile = estimate_noise(spectra[:lead_frames], NoiseProfile.empty(frame_len // 2 + 1))
    out = istft([spectral_subtract(s, profile) for s in spectra], frame_len, hop, n)
    return segmental_snr(clean[lead:], noisy[lead:]), segmental_snr(clean[lead:], out[lead:])


# -- cache workload ------------------------------------------------------------------
def distinct_queries(count: int, seed: int = 0, words: int = 4) -> list[str]:
    """Random lowercase phrases; pairwise trigram overlap is negligible."""
    rng = np.random.default_rng(seed)
    letters = np.array(list(string.ascii_lowercase))
    out: list[str] = []
    seen: set[str] = set()
    while len(out) < count:
        q = " ".join("".join(rng.choice(letters, rng.integers(4, 8))) for _ in range(words))
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


def zipf_probabilities(n: int, s: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


@dataclass
class WorkloadResult:
    hit_rate: float
    max_size: int
    capacity: int


def run_cache_workload(distribution: str, requests: int = 10_000, distinct: int = 500, capacity: int = 100,
                       seed: int = 7, s: float = 1.0) -> WorkloadResult:
    """Lookup each request; on a miss, insert its answer. Time advances one second per request."""
    rng = np.random.default_rng(seed)
    queries = distinct_queries(distinct, seed)
    if distribution == "zipf":
        picks = rng.choice(distinct, size=requests, p=zipf_probabilities(distinct, s))
    elif distribution == "uniform":
        picks = rng.integers(0, distinct, size=requests)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    cache = SemanticCache(CacheConfig(capacity=capacity))
    hits = 0
    max_size = 0
    for i, k in enumerate(picks):
        now = 1_700_000_000.0 + i
        q = queries[k]
        if cache.lookup(q, now=now) is not None:
            hits += 1
        else:
            cache.insert(q, f"answer {k}", now=now)
        max_size = max(max_size, len(cache))
    return WorkloadResult(hits / requests, max_size, capacity)


# -- gateway latency -------------------------------------------------------------------
def cache_hit_latencies(n: int = 1000, data_dir: str | None = None) -> np.ndarray:
    """Wall-clock milliseconds of ``n`` cache-hit text requests through a mock gateway."""
    from edgeassist.gateway.config import GatewayConfig
    from edgeassist.gateway.service import Gateway

    with tempfile.TemporaryDirectory(prefix="ia-latency-") as tmp:
        gw = Gateway(GatewayConfig(data_dir=data_dir or tmp))
        gw.cache.insert("what time does the pharmacy open", "It opens at 9.", tier="cloud")
        body = {"session_id": "bench", "user_id": "u", "input": {"type": "text", "payload": "What time does the pharmacy open?"}}
        gw.handle_interact(body)  # warm-up
        out = np.empty(n)
        for i in range(n):
            t0 = time.perf_counter()
            resp = gw.handle_interact(body)
            out[i] = (time.perf_counter() - t0) * 1000.0
            if resp.source_tier != "cache":
                raise RuntimeError(f"request {i} missed the cache")
        gw.close()
    return out


def wav_payload(samples: np.ndarray) -> str:
    from edgeassist.audio.wav import encode_wav

    return base64.b64encode(encode_wav(samples)).decode("ascii")
