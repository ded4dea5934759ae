"""Command-line entry point: ``edgeassist <subcommand>``.

Exit codes: 0 success, 1 user error (bad flags, bad input files, failed
replay), 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Sequence

import numpy as np

from edgeassist.asr import MockRegistry, transcribe
from edgeassist.audio.pipeline import STAGES, FrontendConfig, process_utterance
from edgeassist.audio.wav import read_wav, write_wav
from edgeassist.cache import SemanticCache
from edgeassist.errors import EdgeAssistError, EmptySignal, LowConfidence, UnknownEntry
from edgeassist.gateway.config import load_config

STAGE_CHOICES = {"vad": (), "aec": ("aec",), "denoise": ("denoise",), "dereverb": ("dereverb",), "all": STAGES}


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2; user errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="edgeassist", description="Edge voice-assistant gateway.")
    p.add_argument("--config", help="gateway config JSON (default: $IA_CONFIG or built-in defaults)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("serve", help="run the HTTP daemon")
    s.add_argument("--host")
    s.add_argument("--port", type=int)

    s = sub.add_parser("process-audio", help="run front-end stages over a WAV file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--stage", choices=sorted(STAGE_CHOICES), default="all")
    s.add_argument("--reference", help="far-end playback WAV for echo cancellation")
    s.add_argument("--report", help="write the JSON segment report here instead of stdout")

    s = sub.add_parser("transcribe", help="front-end + ASR on a WAV file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--mocks", help="mock-ASR registry JSON (fingerprint -> text)")

    s = sub.add_parser("cache", help="inspect or edit the persisted cache")
    s.add_argument("action", choices=["ls", "clear", "rm"])
    s.add_argument("entry_id", nargs="?")

    s = sub.add_parser("replay", help="replay a recorded session against the mocks")
    s.add_argument("--session", required=True)
    s.add_argument("--rewrite", action="store_true", help="re-record the responses instead of comparing")
    return p


def _read_wav(path: str) -> np.ndarray:
    if not Path(path).is_file():
        raise UserError(f"no such file: {path}")
    return read_wav(path)


def _frontend_for(stage: str, base: FrontendConfig) -> FrontendConfig:
    return FrontendConfig(**{**base.__dict__, "stages": STAGE_CHOICES[stage]})


def cmd_process_audio(args, config) -> int:
    x = _read_wav(args.inp)
    ref = _read_wav(args.reference) if args.reference else None
    if args.stage == "aec" and ref is None:
        raise UserError("--stage aec needs --reference")
    fcfg = _frontend_for(args.stage, config.frontend)
    try:
        utt = process_utterance(x, ref, fcfg)
    except EmptySignal as exc:
        raise UserError(str(exc)) from None
    write_wav(args.out, utt.samples, fcfg.sample_rate)
    report = {"input": args.inp, "output": args.out, "stage": args.stage, **utt.report()}
    text = json.dumps(report, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_transcribe(args, config) -> int:
    from edgeassist.gateway.service import api_front_end

    registry = MockRegistry()
    if args.mocks:
        registry = MockRegistry.from_json(json.loads(Path(args.mocks).read_text(encoding="utf-8")))
    x = _read_wav(args.inp)
    utt = api_front_end(x, config.frontend)
    try:
        t = transcribe(utt, config.asr, registry)
    except LowConfidence as exc:
        print(json.dumps({"text": exc.text, "confidence": exc.confidence, "low_confidence": True}))
        return 1
    print(json.dumps(t.to_dict()))
    return 0


def _open_cache(config) -> tuple[SemanticCache, Path]:
    path = config.data_path / "cache.json"
    cache = SemanticCache(config.cache)
    cache.load(path)
    return cache, path


def cmd_cache(args, config) -> int:
    cache, path = _open_cache(config)
    if args.action == "ls":
        print(f"{'ID':<10} {'HITS':>5} {'TIER':<5} {'STATE':<5} QUERY -> RESPONSE")
        for e in sorted(cache.entries(), key=lambda e: e.entry_id):
            state = "inval" if e.invalidated else "live"
            resp = e.response_text if len(e.response_text) <= 40 else e.response_text[:37] + "..."
            print(f"{e.entry_id:<10} {e.hit_count:>5} {e.source_tier.value:<5} {state:<5} {e.normalized_query} -> {resp}")
        return 0
    if args.action == "clear":
        cache.clear()
    else:
        if not args.entry_id:
            raise UserError("cache rm needs an entry id")
        try:
            cache.remove(args.entry_id)
        except UnknownEntry:
            raise UserError(f"no cache entry {args.entry_id}") from None
    cache.persist(path)
    return 0


def cmd_replay(args, _config) -> int:
    from edgeassist.gateway.replay import read_session, record_session, replay_session

    if not Path(args.session).is_file():
        raise UserError(f"no such file: {args.session}")
    if args.rewrite:
        setup, steps = read_session(args.session)
        record_session(args.session, setup, steps)
        print(f"re-recorded {len(steps)} steps")
        return 0
    report = replay_session(args.session)
    for i, want, got in report.mismatches:
        print(f"step {i}: DIFFERENT\n  recorded: {want}\n  replayed: {got}")
    print(f"{report.total - len(report.mismatches)}/{report.total} steps identical")
    return 0 if report.identical else 1


def cmd_serve(args, config) -> int:
    import uvicorn

    from edgeassist.gateway.http import create_app
    from edgeassist.gateway.service import Gateway

    gateway = Gateway(config)
    uvicorn.run(create_app(gateway), host=args.host or config.listen_host, port=args.port or config.listen_port)
    return 0


COMMANDS = {
    "serve": cmd_serve,
    "process-audio": cmd_process_audio,
    "transcribe": cmd_transcribe,
    "cache": cmd_cache,
    "replay": cmd_replay,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except (UserError, EdgeAssistError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
