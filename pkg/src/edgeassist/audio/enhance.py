"""Spectral-domain enhancement: noise tracking, spectral subtraction, late-reverb suppression."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from edgeassist.audio.frames import Spectrum
from edgeassist.errors import SpectrumMismatch


@dataclass
class NoiseProfile:
    noise_psd: np.ndarray
    frames_observed: int = 0
    oversubtraction_alpha: float = 2.0
    floor_beta: float = 0.05
    smoothing: float = 0.95

    def __post_init__(self) -> None:
        self.noise_psd = np.asarray(self.noise_psd, dtype=np.float64)
        if np.any(self.noise_psd < 0):
            raise ValueError("noise_psd entries must be non-negative")
        if self.oversubtraction_alpha < 1.0:
            raise ValueError("oversubtraction_alpha must be >= 1")
        if not 0.0 < self.floor_beta < 1.0:
            raise ValueError("floor_beta must lie in (0, 1)")
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError("smoothing must lie in [0, 1)")

    @classmethod
    def empty(cls, bin_count: int, **kwargs) -> "NoiseProfile":
        return cls(np.zeros(bin_count), **kwargs)


def estimate_noise(
    spectra: Sequence[Spectrum],
    profile: NoiseProfile,
    speech_flags: Sequence[bool] | None = None,
) -> NoiseProfile:
    """Fold the non-speech frames of ``spectra`` into an exponential average of power.

    ``speech_flags[i]`` marks frame ``i`` as speech, which excludes it. Without
    flags every frame counts as noise. While fewer than ``1 / (1 - smoothing)``
    frames have been seen the update weight is ``1 / (n + 1)``, a plain running
    mean, so a young profile is not biased toward zero.
    """
    if len(spectra) == 0:
        raise ValueError("estimate_noise needs at least one spectrum")
    if speech_flags is not None and len(speech_flags) != len(spectra):
        raise ValueError("speech_flags must align with spectra")
    psd = profile.noise_psd.copy()
    seen = profile.frames_observed
    a = profile.smoothing
    for i, spec in enumerate(spectra):
        if spec.bin_count != psd.size:
            raise SpectrumMismatch(f"spectrum has {spec.bin_count} bins, profile {psd.size}")
        if speech_flags is not None and speech_flags[i]:
            continue
        w = max(1.0 - a, 1.0 / (seen + 1))
        psd = (1.0 - w) * psd + w * spec.power
        seen += 1
    return replace(profile, noise_psd=psd, frames_observed=seen)


def spectral_subtract(spectrum: Spectrum, profile: NoiseProfile) -> Spectrum:
    """Power subtraction with over-subtraction and a spectral floor; phase kept."""
    if spectrum.bin_count != profile.noise_psd.size:
        raise SpectrumMismatch(
            f"spectrum has {spectrum.bin_count} bins, profile {profile.noise_psd.size}"
        )
    p = spectrum.power
    out = np.maximum(p - profile.oversubtraction_alpha * profile.noise_psd, profile.floor_beta * p)
    return spectrum.with_power(out)


def dereverb(
    spectrum: Spectrum,
    history: Sequence[np.ndarray],
    decay_gamma: float,
    delay_D: int,
    floor_beta: float = 0.05,
) -> Spectrum:
    """Subtract a late-reverb estimate ``decay_gamma * history[-delay_D]``.

    ``history`` holds smoothed power spectra of past frames, newest last. Until
    ``delay_D`` frames are available the input passes through.
    """
    if delay_D <= 0 or len(history) < delay_D or decay_gamma <= 0.0:
        return Spectrum(spectrum.magnitudes.copy(), spectrum.phases.copy())
    lagged = np.asarray(history[-delay_D])
    if lagged.size != spectrum.bin_count:
        raise SpectrumMismatch("reverb history does not match the spectrum's bin count")
    p = spectrum.power
    return spectrum.with_power(np.maximum(p - decay_gamma * lagged, floor_beta * p))


@dataclass
class DereverbConfig:
    decay_gamma: float = 0.4
    delay_D: int = 3
    floor_beta: float = 0.05
    smoothing: float = 0.5
    adaptive: bool = True
    drop_ratio: float = 0.5
    estimate_window: int = 125


@dataclass
class Dereverberator:
    """Streaming late-reverb suppressor.

    When ``adaptive`` is on, the subtraction weight is capped by an online decay
    estimate: the smallest ``delay_D``-frame energy ratio seen over recent
    energy drops. Dry sound falls to the floor within a frame or two and drives
    the estimate to ~0, so it passes through; a reverberant tail keeps the
    ratio up. The estimate reads low when direct sound dominated the earlier
    frame, so it errs toward under-suppression. Before any drop is seen
    nothing is subtracted.
    """

    config: DereverbConfig = field(default_factory=DereverbConfig)
    smoothed: deque = field(default_factory=deque)
    energies: deque = field(default_factory=deque)
    drops: deque = field(default_factory=deque)
    frame_index: int = 0
    gamma_estimate: float = 0.0

    def effective_gamma(self) -> float:
        cfg = self.config
        if not cfg.adaptive:
            return cfg.decay_gamma
        return min(cfg.decay_gamma, self.gamma_estimate)

    def _track_decay(self, energy: float) -> None:
        cfg = self.config
        if len(self.energies) >= cfg.delay_D:
            past = self.energies[-cfg.delay_D]
            if past > 0.0 and energy < cfg.drop_ratio * past:
                self.drops.append((self.frame_index, energy / past))
        while self.drops and self.drops[0][0] <= self.frame_index - cfg.estimate_window:
            self.drops.popleft()
        if self.drops:
            self.gamma_estimate = min(r for _, r in self.drops)
        self.energies.append(energy)
        while len(self.energies) > cfg.delay_D:
            self.energies.popleft()

    def process(self, spectrum: Spectrum) -> Spectrum:
        cfg = self.config
        p = spectrum.power
        self._track_decay(float(np.sum(p)))
        out = dereverb(spectrum, list(self.smoothed), self.effective_gamma(), cfg.delay_D, cfg.floor_beta)
        prev = self.smoothed[-1] if self.smoothed else p
        self.smoothed.append(cfg.smoothing * prev + (1.0 - cfg.smoothing) * p)
        while len(self.smoothed) > max(cfg.delay_D, 1):
            self.smoothed.popleft()
        self.frame_index += 1
        return out
