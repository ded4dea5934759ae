"""Energy + zero-crossing voice activity detection with hangover and an adaptive noise floor."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from edgeassist.audio.frames import AudioFrame

DB_FLOOR = -100.0


@dataclass
class VadConfig:
    margin_db: float = 6.0
    hangover: int = 8
    zcr_band: tuple[float, float] = (0.01, 0.30)
    # the ZCR path alone cannot fire on frames sitting at the noise floor
    zcr_min_margin_db: float = 3.0
    initial_floor_db: float = -60.0
    floor_smoothing: float = 0.95
    # minimum-statistics window (~1.5 s at hop 256): keeps the floor from
    # deadlocking under loud stationary noise that never reads as non-speech
    min_window_frames: int = 94
    # a window spanning this much dynamic range already holds background frames,
    # so its minimum is trusted before the window fills (cold start mid-speech)
    contrast_db: float = 12.0


@dataclass(frozen=True)
class VadDecision:
    is_speech: bool
    energy_db: float
    hangover_remaining: int = 0

    def __post_init__(self) -> None:
        if self.hangover_remaining < 0:
            raise ValueError("hangover_remaining must be >= 0")
        if self.hangover_remaining > 0 and not self.is_speech:
            raise ValueError("a frame in hangover is speech")


def frame_energy_db(samples: np.ndarray) -> float:
    ms = float(np.mean(np.square(samples))) if samples.size else 0.0
    if ms <= 0.0:
        return DB_FLOOR
    return max(10.0 * np.log10(ms), DB_FLOOR)


def zero_crossing_rate(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    signs = np.signbit(samples)
    return float(np.count_nonzero(signs[1:] != signs[:-1])) / (samples.size - 1)


def compute_vad(
    frame: AudioFrame,
    previous: VadDecision | None = None,
    noise_floor_db: float = VadConfig.initial_floor_db,
    config: VadConfig | None = None,
) -> VadDecision:
    """Classify one frame, carrying hangover from the previous decision."""
    cfg = config or VadConfig()
    energy = frame_energy_db(frame.samples)
    zcr = zero_crossing_rate(frame.samples)
    lo, hi = cfg.zcr_band
    loud = energy > noise_floor_db + cfg.margin_db
    voiced = lo <= zcr <= hi and energy > noise_floor_db + cfg.zcr_min_margin_db
    if loud or voiced:
        return VadDecision(True, energy, cfg.hangover)
    carried = previous.hangover_remaining if previous is not None else 0
    if carried > 0:
        return VadDecision(True, energy, carried - 1)
    return VadDecision(False, energy, 0)


class VadTracker:
    """Stateful VAD over a frame stream; owns the tracked noise floor.

    Unless an initial floor is given, a first frame that looks like noise (ZCR
    outside the speech band) seeds the floor with its energy; otherwise the
    configured default applies. The floor then drops instantly to any quieter frame, follows non-speech frames
    exponentially, and during speech is lifted to the minimum energy seen over
    the last ``min_window_frames`` frames (sooner, once those frames span more
    than ``contrast_db`` of dynamic range).
    """

    def __init__(self, config: VadConfig | None = None, initial_floor_db: float | None = None):
        self.config = config or VadConfig()
        self.noise_floor_db = initial_floor_db
        self.last: VadDecision | None = None
        self._recent: deque[float] = deque(maxlen=self.config.min_window_frames)

    def step(self, frame: AudioFrame) -> VadDecision:
        cfg = self.config
        if self.noise_floor_db is None:
            lo, hi = cfg.zcr_band
            if lo <= zero_crossing_rate(frame.samples) <= hi:
                self.noise_floor_db = cfg.initial_floor_db
            else:
                self.noise_floor_db = frame_energy_db(frame.samples)
        decision = compute_vad(frame, self.last, self.noise_floor_db, cfg)
        e = decision.energy_db
        self._recent.append(e)
        if e < self.noise_floor_db:
            self.noise_floor_db = e
        elif not decision.is_speech:
            a = cfg.floor_smoothing
            self.noise_floor_db = a * self.noise_floor_db + (1.0 - a) * e
        elif len(self._recent) == self._recent.maxlen or max(self._recent) - min(self._recent) > cfg.contrast_db:
            self.noise_floor_db = max(self.noise_floor_db, min(self._recent))
        self.last = decision
        return decision

    def run(self, frames: list[AudioFrame]) -> list[VadDecision]:
        return [self.step(f) for f in frames]
