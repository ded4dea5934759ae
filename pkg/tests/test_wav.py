from __future__ import annotations

import io
import struct
import wave

import numpy as np
import pytest

from edgeassist.audio.wav import decode_wav, encode_wav, read_wav, write_wav
from edgeassist.errors import WavFormatError


def _wav(channels=1, width=2, rate=16000, frames=b"\x00\x00" * 4):
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(width)
        wf.setframerate(rate)
        wf.writeframes(frames)
    return buf.getvalue()


def test_header_is_riff_pcm16_mono_16k():
    data = encode_wav(np.zeros(10))
    assert data[:4] == b"RIFF" and data[8:12] == b"WAVE"
    fmt_tag, channels, rate, _byte_rate, _align, bits = struct.unpack("<HHIIHH", data[20:36])
    assert (fmt_tag, channels, rate, bits) == (1, 1, 16000, 16)


def test_round_trip_is_exact_on_the_16_bit_grid(rng):
    pcm = rng.integers(-32768, 32768, 1000)
    x = pcm / 32768.0
    np.testing.assert_array_equal(decode_wav(encode_wav(x)), x)


def test_encoding_clips_out_of_range():
    y = decode_wav(encode_wav(np.array([1.5, -2.0])))
    np.testing.assert_array_equal(y, [32767 / 32768, -1.0])


def test_little_endian_sample_layout():
    data = _wav(frames=struct.pack("<hh", 16384, -8192))
    np.testing.assert_array_equal(decode_wav(data), [0.5, -0.25])


@pytest.mark.parametrize(
    "data",
    [
        b"not a wav",
        _wav(channels=2, frames=b"\x00" * 8),
        _wav(width=1, frames=b"\x00" * 4),
        _wav(rate=8000),
    ],
)
def test_rejects_other_formats(data):
    with pytest.raises(WavFormatError):
        decode_wav(data)


def test_file_helpers(tmp_path):
    p = tmp_path / "a.wav"
    write_wav(p, np.array([0.25, -0.25]))
    np.testing.assert_array_equal(read_wav(p), [0.25, -0.25])
