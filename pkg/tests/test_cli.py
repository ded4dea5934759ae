from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from edgeassist.asr import MockRegistry, fingerprint
from edgeassist.audio.wav import read_wav, write_wav
from edgeassist.cache import SemanticCache
from edgeassist.gateway.cli import cli_main
from edgeassist.gateway.config import load_config
from edgeassist.gateway.service import api_front_end
from helpers import audio_samples

SESSION = Path(__file__).parent / "fixtures" / "session_5.jsonl"


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    monkeypatch.delenv("IA_CONFIG", raising=False)
    monkeypatch.delenv("IA_DATA_DIR", raising=False)
    p = tmp_path / "gw.json"
    p.write_text(json.dumps({"data_dir": str(tmp_path / "data")}))
    return p


def test_process_audio_on_silence(tmp_path, config_file, capsys):
    src, out = tmp_path / "in.wav", tmp_path / "out.wav"
    write_wav(src, np.zeros(16000))
    assert cli_main(["--config", str(config_file), "process-audio", "--in", str(src), "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["segments"] == []
    assert np.all(read_wav(out) == 0)


def test_process_audio_report_file_and_stage(tmp_path, config_file):
    src, out, rep = tmp_path / "in.wav", tmp_path / "out.wav", tmp_path / "r.json"
    write_wav(src, audio_samples())
    args = ["--config", str(config_file), "process-audio", "--in", str(src), "--out", str(out), "--stage", "denoise", "--report", str(rep)]
    assert cli_main(args) == 0
    report = json.loads(rep.read_text())
    assert report["stage"] == "denoise" and report["segments"]


def test_process_audio_user_errors(tmp_path, config_file, capsys):
    src = tmp_path / "in.wav"
    write_wav(src, np.zeros(16000))
    base = ["--config", str(config_file), "process-audio", "--out", str(tmp_path / "o.wav")]
    assert cli_main(base + ["--in", str(tmp_path / "nope.wav")]) == 1
    assert cli_main(base + ["--in", str(src), "--stage", "aec"]) == 1
    assert cli_main(base + ["--in", str(src), "--stage", "turbo"]) == 1
    assert cli_main(["--config", str(config_file), "--no-such-flag"]) == 1
    assert "error" in capsys.readouterr().err


def test_transcribe(tmp_path, config_file, capsys):
    x = audio_samples()
    src = tmp_path / "in.wav"
    write_wav(src, x)
    fp = fingerprint(api_front_end(read_wav(src), load_config(config_file, env={}).frontend))
    reg = MockRegistry()
    reg.register(fp, "open the blinds")
    mocks = tmp_path / "mocks.json"
    mocks.write_text(json.dumps(reg.to_json()))
    assert cli_main(["--config", str(config_file), "transcribe", "--in", str(src), "--mocks", str(mocks)]) == 0
    assert json.loads(capsys.readouterr().out)["text"] == "open the blinds"
    assert cli_main(["--config", str(config_file), "transcribe", "--in", str(src)]) == 1
    assert json.loads(capsys.readouterr().out)["low_confidence"] is True


def test_cache_commands(tmp_path, config_file, capsys):
    cfg = load_config(config_file, env={})
    cache = SemanticCache(cfg.cache)
    a = cache.insert("turn on the lamp", "Done.")
    cache.insert("what time is it", "Noon.")
    cfg.data_path.mkdir(parents=True)
    cache.persist(cfg.data_path / "cache.json")
    run = lambda *a: cli_main(["--config", str(config_file), "cache", *a])

    assert run("ls") == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("ID") and len(out) == 3
    assert run("rm", a.entry_id) == 0
    assert run("rm", a.entry_id) == 1
    assert run("rm") == 1
    capsys.readouterr()
    run("ls")
    assert len(capsys.readouterr().out.splitlines()) == 2
    assert run("clear") == 0
    run("ls")
    assert len(capsys.readouterr().out.splitlines()) == 1


def test_replay_exit_codes(tmp_path, config_file, capsys):
    assert cli_main(["--config", str(config_file), "replay", "--session", str(SESSION)]) == 0
    assert "steps identical" in capsys.readouterr().out
    lines = SESSION.read_text(encoding="utf-8").splitlines()
    step = json.loads(lines[1])
    step["response"]["reply_text"] = "changed"
    lines[1] = json.dumps(step)
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines) + "\n")
    assert cli_main(["--config", str(config_file), "replay", "--session", str(bad)]) == 1
    assert "step 0: DIFFERENT" in capsys.readouterr().out
    assert cli_main(["--config", str(config_file), "replay", "--session", str(bad), "--rewrite"]) == 0
    assert cli_main(["--config", str(config_file), "replay", "--session", str(bad)]) == 0
    assert cli_main(["--config", str(config_file), "replay", "--session", str(tmp_path / "none.jsonl")]) == 1


def test_bad_config_is_user_error(tmp_path, capsys):
    p = tmp_path / "gw.json"
    p.write_text('{"cache": {"capacity": -1}}')
    assert cli_main(["--config", str(p), "cache", "ls"]) == 1
    assert "gw.json" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "edgeassist", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "process-audio" in proc.stdout
