"""NLMS acoustic echo cancellation with a two-path (background/foreground) filter.

The background filter runs the plain NLMS recursion on every sample. The
foreground filter produces the output and only takes over the background taps
after a block in which the background error energy beat the foreground's by
``copy_margin``. Near-end speech corrupts the background but never gets copied
forward, so double-talk does not wreck an already converged echo path.
With ``two_path=False`` the output is the background error itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numba
import numpy as np

from edgeassist.audio.frames import AudioFrame
from edgeassist.errors import FrameMismatch


@dataclass
class AecConfig:
    taps: int = 256
    step_size_mu: float = 0.5
    regularizer_eps: float = 1e-6
    two_path: bool = True
    copy_block: int = 256
    copy_margin: float = 0.25


@dataclass
class EchoCancellerState:
    weights: np.ndarray
    step_size_mu: float = 0.5
    regularizer_eps: float = 1e-6
    reference_history: np.ndarray = None  # newest sample first
    foreground: np.ndarray = None
    two_path: bool = True
    copy_block: int = 256
    copy_margin: float = 0.25
    # running block sums: background err^2, foreground err^2, samples seen
    block_acc: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64).copy()
        n = self.weights.size
        if n == 0:
            raise ValueError("echo canceller needs at least one tap")
        if not 0.0 <= self.step_size_mu < 2.0:
            raise ValueError("step_size_mu must lie in [0, 2)")
        if self.regularizer_eps <= 0:
            raise ValueError("regularizer_eps must be positive")
        if self.reference_history is None:
            self.reference_history = np.zeros(n)
        if self.foreground is None:
            self.foreground = self.weights.copy()
        self.reference_history = np.asarray(self.reference_history, dtype=np.float64).copy()
        self.foreground = np.asarray(self.foreground, dtype=np.float64).copy()
        if self.reference_history.size != n or self.foreground.size != n:
            raise ValueError("history and foreground must match the tap count")

    @property
    def taps(self) -> int:
        return self.weights.size

    @classmethod
    def initial(cls, config: AecConfig | None = None) -> "EchoCancellerState":
        cfg = config or AecConfig()
        return cls(
            weights=np.zeros(cfg.taps),
            step_size_mu=cfg.step_size_mu,
            regularizer_eps=cfg.regularizer_eps,
            two_path=cfg.two_path,
            copy_block=cfg.copy_block,
            copy_margin=cfg.copy_margin,
        )

    def copy(self) -> "EchoCancellerState":
        return replace(
            self,
            weights=self.weights.copy(),
            reference_history=self.reference_history.copy(),
            foreground=self.foreground.copy(),
            block_acc=self.block_acc.copy(),
        )


@numba.njit(cache=True)
def _nlms_kernel(mic, ref, w, wf, hist, acc, mu, eps, two_path, block, margin):
    L = w.size
    out = np.empty(mic.size)
    for n in range(mic.size):
        for j in range(L - 1, 0, -1):
            hist[j] = hist[j - 1]
        hist[0] = ref[n]
        e = mic[n] - np.dot(w, hist)
        if two_path:
            ef = mic[n] - np.dot(wf, hist)
            out[n] = ef
            acc[0] += e * e
            acc[1] += ef * ef
            acc[2] += 1.0
        else:
            out[n] = e
        g = mu * e / (np.dot(hist, hist) + eps)
        for j in range(L):
            w[j] += g * hist[j]
        if two_path and acc[2] >= block:
            if acc[0] < margin * acc[1]:
                for j in range(L):
                    wf[j] = w[j]
            acc[0] = 0.0
            acc[1] = 0.0
            acc[2] = 0.0
    if not two_path:
        for j in range(L):
            wf[j] = w[j]
    return out


def cancel_in_place(mic: np.ndarray, ref: np.ndarray, state: EchoCancellerState) -> np.ndarray:
    """Run the canceller over sample arrays, mutating ``state``."""
    mic = np.ascontiguousarray(mic, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    if mic.shape != ref.shape:
        raise FrameMismatch(f"mic has {mic.size} samples, reference has {ref.size}")
    return _nlms_kernel(
        mic, ref, state.weights, state.foreground, state.reference_history, state.block_acc,
        float(state.step_size_mu), float(state.regularizer_eps), bool(state.two_path),
        float(state.copy_block), float(state.copy_margin),
    )


def aec_nlms(
    mic_frame: AudioFrame, reference_frame: AudioFrame, state: EchoCancellerState
) -> tuple[AudioFrame, EchoCancellerState]:
    """Cancel the reference echo from one mic frame; returns the output and the new state."""
    if len(mic_frame) != len(reference_frame):
        raise FrameMismatch(f"frame lengths differ: {len(mic_frame)} vs {len(reference_frame)}")
    if mic_frame.sample_rate_hz != reference_frame.sample_rate_hz:
        raise FrameMismatch("mic and reference sample rates differ")
    new_state = state.copy()
    out = cancel_in_place(mic_frame.samples, reference_frame.samples, new_state)
    return AudioFrame(out, mic_frame.sample_rate_hz, mic_frame.index), new_state


class EchoCanceller:
    """Streaming wrapper that keeps the state between calls."""

    def __init__(self, config: AecConfig | None = None):
        self.state = EchoCancellerState.initial(config)

    def process(self, mic: np.ndarray, reference: np.ndarray) -> np.ndarray:
        return cancel_in_place(mic, reference, self.state)
