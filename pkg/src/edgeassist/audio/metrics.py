"""Signal-quality and detection metrics used by tests and the experiment scripts."""

from __future__ import annotations

import numpy as np


def segmental_snr(
    clean: np.ndarray,
    processed: np.ndarray,
    frame_len: int = 512,
    lo: float = -10.0,
    hi: float = 35.0,
    silence_db: float = -40.0,
) -> float:
    """Mean per-frame SNR of ``processed`` against ``clean``, each frame clipped to [lo, hi].

    Frames whose clean energy is more than ``-silence_db`` dB below the loudest
    frame are skipped.
    """
    n = min(clean.size, processed.size) // frame_len * frame_len
    c = clean[:n].reshape(-1, frame_len)
    err = (clean[:n] - processed[:n]).reshape(-1, frame_len)
    ec = np.sum(c**2, axis=1)
    ee = np.sum(err**2, axis=1)
    if not np.any(ec > 0):
        return float("nan")
    active = ec > ec.max() * 10.0 ** (silence_db / 10.0)
    with np.errstate(divide="ignore"):
        snr = 10.0 * np.log10(ec[active] / np.maximum(ee[active], 1e-30))
    return float(np.mean(np.clip(snr, lo, hi)))


def erle_db(echo: np.ndarray, residual: np.ndarray) -> float:
    """Echo power over residual echo power, in dB."""
    den = float(np.sum(np.square(residual)))
    if den == 0.0:
        return float("inf")
    return 10.0 * np.log10(float(np.sum(np.square(echo))) / den)


def f1_score(predicted, truth) -> float:
    p = np.asarray(predicted, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    tp = np.count_nonzero(p & t)
    fp = np.count_nonzero(p & ~t)
    fn = np.count_nonzero(~p & t)
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def direct_to_reverberant_db(direct: np.ndarray, observed: np.ndarray) -> float:
    """Energy of the known direct signal over the energy of everything else."""
    n = min(direct.size, observed.size)
    rest = observed[:n] - direct[:n]
    return 10.0 * np.log10(np.sum(direct[:n] ** 2) / max(np.sum(rest**2), 1e-30))
