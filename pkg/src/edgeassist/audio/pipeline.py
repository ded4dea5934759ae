"""The staged front-end: wake gate, AEC, spectral analysis, denoise, dereverb, VAD segmentation, resynthesis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from edgeassist.audio.aec import AecConfig, EchoCancellerState, cancel_in_place
from edgeassist.audio.enhance import DereverbConfig, Dereverberator, NoiseProfile, estimate_noise, spectral_subtract
from edgeassist.audio.features import mfcc
from edgeassist.audio.frames import (
    DEFAULT_FRAME_LEN,
    DEFAULT_HOP,
    DEFAULT_SAMPLE_RATE,
    AudioFrame,
    Spectrum,
    frame_matrix,
    hann,
    istft,
)
from edgeassist.audio.vad import VadConfig, VadDecision, VadTracker
from edgeassist.audio.wakeword import WakeMode, WakeState, detect_wakeword
from edgeassist.errors import EmptySignal

STAGES = ("aec", "denoise", "dereverb")


@dataclass
class FrontendConfig:
    sample_rate: int = DEFAULT_SAMPLE_RATE
    frame_len: int = DEFAULT_FRAME_LEN
    hop: int = DEFAULT_HOP
    vad: VadConfig = field(default_factory=VadConfig)
    aec: AecConfig = field(default_factory=AecConfig)
    oversubtraction_alpha: float = 2.0
    floor_beta: float = 0.05
    noise_smoothing: float = 0.95
    dereverb: DereverbConfig = field(default_factory=DereverbConfig)
    n_mfcc: int = 13
    stages: tuple[str, ...] = STAGES

    def __post_init__(self) -> None:
        unknown = set(self.stages) - set(STAGES)
        if unknown:
            raise ValueError(f"unknown front-end stages: {sorted(unknown)}")
        if not 0 < self.hop <= self.frame_len:
            raise ValueError("hop must satisfy 0 < hop <= frame_len")


@dataclass
class CleanUtterance:
    samples: np.ndarray
    segments: list[tuple[int, int]]  # [start, end) sample indices of speech
    sample_rate: int = DEFAULT_SAMPLE_RATE
    vad: list[VadDecision] = field(default_factory=list)

    @property
    def speech_samples(self) -> np.ndarray:
        if not self.segments:
            return np.zeros(0)
        return np.concatenate([self.samples[a:b] for a, b in self.segments])

    def report(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "num_samples": int(self.samples.size),
            "segments": [
                {"start": a, "end": b, "start_s": a / self.sample_rate, "end_s": b / self.sample_rate}
                for a, b in self.segments
            ],
        }


def segments_from_flags(flags: list[bool], hop: int, frame_len: int, lead: int, length: int) -> list[tuple[int, int]]:
    """Merge runs of speech frames into sample ranges of the unpadded signal."""
    segs: list[tuple[int, int]] = []
    i = 0
    while i < len(flags):
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(flags) and flags[j + 1]:
            j += 1
        start = max(i * hop - lead, 0)
        end = min(j * hop + frame_len - lead, length)
        if end > start:
            segs.append((start, end))
        i = j + 1
    return segs


def process_utterance(
    raw: np.ndarray,
    reference: np.ndarray | None = None,
    config: FrontendConfig | None = None,
    wake: WakeState | None = None,
    trace: Callable[[str], None] | None = None,
) -> CleanUtterance:
    """Run the full chain over one utterance.

    ``wake``, when given, must be Awake. ``trace`` receives each stage name as
    it runs (tests use it to audit the gate).
    """
    cfg = config or FrontendConfig()
    if wake is not None and wake.mode is not WakeMode.AWAKE:
        raise RuntimeError("front-end is asleep; only wake-word detection may observe the stream")
    note = trace or (lambda _stage: None)
    x = np.clip(np.nan_to_num(np.asarray(raw, dtype=np.float64).ravel()), -1.0, 1.0)
    if x.size < cfg.frame_len:
        raise EmptySignal(f"stream has {x.size} samples, shorter than one {cfg.frame_len}-sample frame")

    if "aec" in cfg.stages and reference is not None:
        note("aec")
        ref = np.zeros_like(x)
        r = np.asarray(reference, dtype=np.float64).ravel()[: x.size]
        ref[: r.size] = r
        x = cancel_in_place(x, ref, EchoCancellerState.initial(cfg.aec))

    note("analysis")
    lead = cfg.frame_len - cfg.hop
    padded = np.concatenate([np.zeros(lead), x, np.zeros(lead)])
    frames = frame_matrix(padded, cfg.frame_len, cfg.hop)
    window = hann(cfg.frame_len)

    vad = VadTracker(cfg.vad)
    profile = NoiseProfile.empty(
        cfg.frame_len // 2 + 1,
        oversubtraction_alpha=cfg.oversubtraction_alpha,
        floor_beta=cfg.floor_beta,
        smoothing=cfg.noise_smoothing,
    )
    derev = Dereverberator(cfg.dereverb)
    denoise = "denoise" in cfg.stages
    do_derev = "dereverb" in cfg.stages
    if denoise:
        note("denoise")
    if do_derev:
        note("dereverb")
    note("vad")
    decisions: list[VadDecision] = []
    spectra: list[Spectrum] = []
    for i, row in enumerate(frames):
        d = vad.step(AudioFrame(row, cfg.sample_rate, i))
        decisions.append(d)
        spec = Spectrum.from_complex(np.fft.rfft(row * window))
        if denoise:
            if not d.is_speech:
                profile = estimate_noise([spec], profile)
            spec = spectral_subtract(spec, profile)
        if do_derev:
            spec = derev.process(spec)
        spectra.append(spec)

    note("resynthesis")
    out = np.clip(istft(spectra, cfg.frame_len, cfg.hop, x.size), -1.0, 1.0)
    flags = [d.is_speech for d in decisions]
    segs = segments_from_flags(flags, cfg.hop, cfg.frame_len, lead, x.size)
    return CleanUtterance(out, segs, cfg.sample_rate, decisions)


class AudioFrontend:
    """Continuous-stream front-end with the Sleep/Awake wake gate.

    While asleep only MFCC extraction and wake-word matching touch the audio.
    On a wake, everything from the end of the matched window onward runs
    through :func:`process_utterance` until the awake window lapses.
    """

    def __init__(self, wake: WakeState, config: FrontendConfig | None = None, trace: Callable[[str], None] | None = None):
        self.config = config or FrontendConfig()
        self.wake = wake
        self._trace = trace or (lambda _stage: None)

    def listen(self, raw: np.ndarray, reference: np.ndarray | None = None, start_time: float = 0.0) -> list[CleanUtterance]:
        cfg = self.config
        x = np.asarray(raw, dtype=np.float64).ravel()
        hop, flen = cfg.hop, cfg.frame_len
        tlen = self.wake.template.shape[0]
        utterances: list[CleanUtterance] = []
        feats: list[np.ndarray] = []
        pos = 0
        while pos + flen <= x.size:
            now = start_time + pos / cfg.sample_rate
            self.wake = self.wake.at(now)
            self._trace("mfcc")
            feats.append(mfcc(AudioFrame(x[pos : pos + flen], cfg.sample_rate), cfg.n_mfcc))
            pos += hop
            if len(feats) < tlen:
                continue
            self._trace("detect_wakeword")
            woke, self.wake = detect_wakeword(np.stack(feats[-tlen:]), self.wake, now)
            if not woke:
                continue
            end = min(x.size, pos + int(self.wake.awake_window * cfg.sample_rate))
            seg = x[pos:end]
            ref = None if reference is None else np.asarray(reference, dtype=np.float64).ravel()[pos:end]
            if seg.size >= flen:
                utt = process_utterance(seg, ref, cfg, self.wake, self._trace)
                utterances.append(utt)
                if utt.segments:
                    last_speech = start_time + (pos + utt.segments[-1][1]) / cfg.sample_rate
                    self.wake = self.wake.extend(last_speech)
            pos = end
            feats.clear()
            self.wake = self.wake.at(start_time + pos / cfg.sample_rate)
        return utterances
