"""Wake-word gating: DTW template matching over MFCC sequences and the Sleep/Awake state."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

import numba
import numpy as np

from edgeassist.errors import EmptyFeatures

AWAKE_WINDOW_S = 8.0
THRESHOLD_FACTOR = 0.6


class WakeMode(enum.Enum):
    SLEEP = "sleep"
    AWAKE = "awake"


@numba.njit(cache=True)
def _dtw_kernel(cost):
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    steps = np.zeros((n + 1, m + 1))
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = acc[i - 1, j - 1]
            length = steps[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
                length = steps[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
                length = steps[i, j - 1]
            acc[i, j] = cost[i - 1, j - 1] + best
            steps[i, j] = length + 1.0
    return acc[n, m] / steps[n, m]


def dtw_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Path-length-normalised DTW distance with Euclidean local cost.

    Predecessor preference on ties is diagonal, then vertical, then horizontal.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyFeatures("DTW needs non-empty sequences")
    cost = np.sqrt(np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1))
    return float(_dtw_kernel(cost))


@dataclass(frozen=True)
class WakeState:
    template: np.ndarray
    dtw_threshold: float
    mode: WakeMode = WakeMode.SLEEP
    awake_deadline: float = 0.0
    awake_window: float = AWAKE_WINDOW_S

    def __post_init__(self) -> None:
        if np.asarray(self.template).size == 0:
            raise ValueError("wake template must be non-empty")
        if self.dtw_threshold < 0:
            raise ValueError("dtw_threshold must be non-negative")

    def at(self, now: float) -> "WakeState":
        """Apply expiry: Awake past its deadline reverts to Sleep."""
        if self.mode is WakeMode.AWAKE and now >= self.awake_deadline:
            return replace(self, mode=WakeMode.SLEEP)
        return self

    def extend(self, now: float) -> "WakeState":
        return replace(self, mode=WakeMode.AWAKE, awake_deadline=now + self.awake_window)


def detect_wakeword(
    features: np.ndarray, state: WakeState, now: float = 0.0
) -> tuple[bool, WakeState]:
    """Match ``features`` against the enrolled template.

    A wake moves the state to Awake with a deadline ``awake_window`` seconds
    after ``now``.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.size == 0:
        raise EmptyFeatures("no feature frames to match")
    dist = dtw_distance(features, state.template)
    state = state.at(now)
    if dist <= state.dtw_threshold:
        return True, state.extend(now)
    return False, state


def calibrate_threshold(
    template: np.ndarray, impostors: Sequence[np.ndarray], factor: float = THRESHOLD_FACTOR
) -> float:
    """``factor`` times the mean DTW distance from ``template`` to enrollment impostors."""
    if not impostors:
        raise ValueError("calibration needs at least one impostor sequence")
    return factor * float(np.mean([dtw_distance(imp, template) for imp in impostors]))


def enroll(
    template: np.ndarray,
    impostors: Sequence[np.ndarray],
    awake_window: float = AWAKE_WINDOW_S,
    factor: float = THRESHOLD_FACTOR,
) -> WakeState:
    template = np.asarray(template, dtype=np.float64)
    return WakeState(
        template=template,
        dtw_threshold=calibrate_threshold(template, impostors, factor),
        awake_window=awake_window,
    )
