from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgeassist.audio.frames import AudioFrame, frame_matrix
from edgeassist.audio.synth import sine, speech_shaped_noise
from edgeassist.audio.vad import DB_FLOOR, VadConfig, VadDecision, VadTracker, compute_vad, frame_energy_db, zero_crossing_rate
from edgeassist.bench import measure_vad_f1, vad_scenario


def test_silent_frame_is_not_speech():
    d = compute_vad(AudioFrame(np.zeros(512)))
    assert not d.is_speech
    assert d.energy_db == DB_FLOOR


def test_full_scale_sine_is_speech():
    d = compute_vad(AudioFrame(sine(1000, 512 / 16000)))
    assert d.is_speech
    assert d.energy_db == pytest.approx(10 * np.log10(0.5), abs=0.05)


def test_energy_and_zcr_helpers():
    assert frame_energy_db(np.full(100, 0.1)) == pytest.approx(-20.0)
    assert zero_crossing_rate(np.array([1.0, -1.0, 1.0, -1.0, 1.0])) == 1.0
    assert zero_crossing_rate(np.ones(10)) == 0.0


def test_zcr_path_needs_energy_above_floor():
    # a 1 kHz tone has ZCR 0.125 (in band) but sits only 1 dB above the floor here
    x = 0.01 * sine(1000, 512 / 16000)
    e = frame_energy_db(x)
    assert not compute_vad(AudioFrame(x), noise_floor_db=e - 1.0).is_speech
    assert compute_vad(AudioFrame(x), noise_floor_db=e - 4.0).is_speech


def test_hangover_counts_down():
    cfg = VadConfig(hangover=3)
    loud = AudioFrame(np.full(512, 0.5))
    quiet = AudioFrame(np.zeros(512))
    d = compute_vad(loud, None, -60.0, cfg)
    seq = [d.hangover_remaining]
    for _ in range(5):
        d = compute_vad(quiet, d, -60.0, cfg)
        seq.append((d.is_speech, d.hangover_remaining))
    assert seq == [3, (True, 2), (True, 1), (True, 0), (False, 0), (False, 0)]


def test_decision_invariants():
    with pytest.raises(ValueError):
        VadDecision(False, -50.0, 2)
    with pytest.raises(ValueError):
        VadDecision(True, -50.0, -1)


@given(
    st.lists(st.floats(-100, 0), min_size=1, max_size=60),
    st.integers(0, 12),
)
def test_hangover_holds_for_h_frames(levels_db, hangover):
    cfg = VadConfig(hangover=hangover)
    tracker = VadTracker(cfg, initial_floor_db=-60.0)
    # a loud DC frame (ZCR 0) forces a speech onset, then arbitrary levels follow
    frames = [np.full(512, 0.9)] + [np.full(512, 10 ** (db / 20)) for db in levels_db]
    decisions = [tracker.step(AudioFrame(f)) for f in frames]
    onsets = [i for i, d in enumerate(decisions) if d.is_speech and (i == 0 or not decisions[i - 1].is_speech)]
    assert onsets and onsets[0] == 0
    for i, d in enumerate(decisions):
        # every detection (onset or re-trigger) restarts a full hangover
        if d.is_speech and d.hangover_remaining == hangover:
            for later in decisions[i + 1 : i + 1 + hangover]:
                assert later.is_speech


def test_floor_tracks_down_instantly_and_up_slowly():
    tracker = VadTracker(initial_floor_db=-40.0)
    tracker.step(AudioFrame(np.full(512, 10 ** (-70 / 20))))
    assert tracker.noise_floor_db == pytest.approx(-70.0)
    tracker.step(AudioFrame(np.full(512, 10 ** (-67 / 20))))  # 3 dB up: non-speech, EMA step
    assert tracker.noise_floor_db == pytest.approx(0.95 * -70 + 0.05 * -67)


def test_noise_like_first_frame_seeds_the_floor(rng):
    hiss = 0.05 * rng.standard_normal(512)  # ZCR near 0.5, outside the speech band
    tracker = VadTracker()
    d = tracker.step(AudioFrame(hiss))
    assert not d.is_speech
    assert tracker.noise_floor_db == pytest.approx(frame_energy_db(np.clip(hiss, -1, 1)))


@pytest.mark.parametrize("speech_first", [True, False])
def test_alternating_blocks_f1(speech_first):
    x, truth = vad_scenario(seed=0, block_s=1.0, speech_first=speech_first)
    assert measure_vad_f1(x, truth) >= 0.9


def test_cold_start_in_speech_finds_the_background_at_the_first_pause(rng):
    loud = list(frame_matrix(speech_shaped_noise(20 * 512, rng, 0.1), 512, 512))
    quiet = list(frame_matrix(speech_shaped_noise(20 * 512, rng, 0.01), 512, 512))
    tracker = VadTracker()
    flags = [tracker.step(AudioFrame(f)).is_speech for f in loud + quiet]
    assert all(flags[:20])
    assert tracker.noise_floor_db == pytest.approx(-40.0, abs=1.5)
    # only the hangover carries speech into the pause
    assert flags[20:].count(True) <= tracker.config.hangover + 1


def test_steady_speech_without_contrast_keeps_the_default_floor(rng):
    tracker = VadTracker()
    for row in frame_matrix(speech_shaped_noise(50 * 512, rng, 0.1), 512, 512):
        tracker.step(AudioFrame(row))
    assert tracker.noise_floor_db == tracker.config.initial_floor_db


@pytest.mark.xfail(
    strict=True,
    reason=(
        "0.5 s blocks are 31 frames; an 8-frame hangover plus window overlap adds 8-9 "
        "false-positive frames per block, capping F1 near 0.886 even with perfect onsets"
    ),
)
def test_half_second_blocks_f1():
    x, truth = vad_scenario(seed=0, block_s=0.5, speech_first=True)
    assert measure_vad_f1(x, truth) >= 0.9


def test_half_second_bound_is_hangover_arithmetic():
    # Perfect onsets/offsets smeared by the hangover alone already fall below 0.9.
    _, truth = vad_scenario(seed=0, block_s=0.5, speech_first=True)
    ideal = truth.copy()
    idx = np.flatnonzero(truth[:-1] & ~truth[1:])
    for i in idx:
        ideal[i + 1 : i + 1 + 8] = True
    tp = np.count_nonzero(ideal & truth)
    fp = np.count_nonzero(ideal & ~truth)
    fn = np.count_nonzero(~ideal & truth)
    assert 2 * tp / (2 * tp + fp + fn) < 0.9
