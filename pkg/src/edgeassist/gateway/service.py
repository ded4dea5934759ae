"""Per-request orchestration: front-end, ASR, cache, routing, tiers, actions, logging."""

from __future__ import annotations

import base64
import binascii
import dataclasses
import json
import threading
import time
from dataclasses import dataclass, field
from typing import Any

import httpx
import numpy as np

from edgeassist.actions import Action, ActionResult, FeedbackRecord, Origin, apply_feedback, default_registry, DeviceRegistry
from edgeassist.asr import DEFAULT_REGISTRY, MockRegistry, Transcript, fingerprint, transcribe
from edgeassist.audio.pipeline import CleanUtterance, FrontendConfig, process_utterance
from edgeassist.audio.wav import decode_wav, encode_wav
from edgeassist.cache import LookupResult, SemanticCache
from edgeassist.clock import SystemClock
from edgeassist.context import ContextHub, ContextSnapshot, ProfileStore, ReplayProvider, SensorSpec, UserProfile
from edgeassist.controller import SessionStore
from edgeassist.controller.cloud import CloudClient, call_cloud
from edgeassist.controller.edge import FALLBACK_REPLY, EdgeModelAdapter, MockEdgeModel, OpenAICompatEdgeModel, edge_generate
from edgeassist.controller.plans import load_library, run_plan, select_plan_template
from edgeassist.controller.prompt import build_prompt
from edgeassist.controller.routing import Connectivity, Reason, RouteTier, RoutingDecision, route
from edgeassist.controller.tools import ToolContext, ToolRegistry, device_tool, list_devices_tool, sensor_tool
from edgeassist.errors import (
    AdapterFailure,
    AsrError,
    BadRequest,
    CloudError,
    EmptySignal,
    LowConfidence,
    TierUnavailable,
    UnsupportedModality,
    WavFormatError,
)
from edgeassist.gateway.config import GatewayConfig
from edgeassist.interactions import InteractionLog, InteractionRecord

TIMING_KEYS = ("audio", "asr", "cache", "llm", "execute", "total")
INPUT_TYPES = ("text", "audio_wav")
CLARIFY_REPLY = "Sorry, I didn't catch that. Could you repeat it?"
UNAVAILABLE_REPLY = "Sorry, I can't answer right now. Please try again in a moment."


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class InteractRequest:
    session_id: str
    user_id: str
    input_type: str
    payload: str
    force_tier: RouteTier | None = None
    locale: str | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def parse(cls, body: Any) -> "InteractRequest":
        """Validate a decoded JSON body. Raises ``BadRequest`` or ``UnsupportedModality``."""
        if not isinstance(body, dict):
            raise BadRequest("request body must be a JSON object")
        sid, uid = body.get("session_id"), body.get("user_id")
        if not isinstance(sid, str) or not sid:
            raise BadRequest("session_id must be a non-empty string")
        if not isinstance(uid, str) or not uid:
            raise BadRequest("user_id must be a non-empty string")
        inp = body.get("input")
        if not isinstance(inp, dict) or not isinstance(inp.get("type"), str):
            raise BadRequest("input must be an object with a string 'type'")
        kind = inp["type"]
        if kind not in INPUT_TYPES:
            raise UnsupportedModality(f"input type {kind!r} is not supported; use text or audio_wav")
        payload = inp.get("payload")
        if not isinstance(payload, str):
            raise BadRequest("input.payload must be a string")
        opts = body.get("options") or {}
        if not isinstance(opts, dict):
            raise BadRequest("options must be an object")
        force = opts.get("force_tier")
        if force is not None:
            try:
                force = RouteTier(force)
            except ValueError:
                raise BadRequest(f"options.force_tier must be one of {[t.value for t in RouteTier]}") from None
        locale = opts.get("locale")
        if locale is not None and not isinstance(locale, str):
            raise BadRequest("options.locale must be a string")
        samples = None
        if kind == "text":
            if not payload.strip():
                raise BadRequest("text payload is empty")
        else:
            try:
                raw = base64.b64decode(payload, validate=True)
                samples = decode_wav(raw)
            except (binascii.Error, ValueError) as exc:
                raise BadRequest(f"audio payload is not base64: {exc}") from None
            except WavFormatError as exc:
                raise BadRequest(f"audio payload is not a valid WAV: {exc}") from None
        return cls(sid, uid, kind, payload, force, locale, samples)


@dataclass
class InteractResponse:
    interaction_id: str
    source_tier: str
    reply_text: str
    actions: list[ActionResult] = field(default_factory=list)
    timing_ms: dict[str, float] = field(default_factory=dict)
    transcript: Transcript | None = None
    route_reason: str | None = None
    status: int = 200
    error: str | None = None

    def to_json(self) -> dict:
        out = {
            "interaction_id": self.interaction_id,
            "transcript": None if self.transcript is None else self.transcript.to_dict(),
            "source_tier": self.source_tier,
            "route_reason": self.route_reason,
            "reply_text": self.reply_text,
            "actions": [a.to_json() for a in self.actions],
            "timing_ms": dict(self.timing_ms),
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def api_front_end(samples: np.ndarray, config: FrontendConfig) -> CleanUtterance:
    """Front-end for submitted audio: no wake gate, and clips shorter than a frame carry no speech."""
    try:
        return process_utterance(samples, config=config)
    except EmptySignal:
        return CleanUtterance(np.asarray(samples, dtype=np.float64), [], config.sample_rate)


class _Stopwatch:
    def __init__(self, perf):
        self.perf = perf
        self.ms = dict.fromkeys(TIMING_KEYS, 0.0)
        self.t0 = perf()

    def add(self, key: str, since: float) -> float:
        now = self.perf()
        self.ms[key] += max(0.0, (now - since) * 1000.0)
        return now

    def finish(self) -> dict[str, float]:
        self.ms["total"] = max((self.perf() - self.t0) * 1000.0, sum(v for k, v in self.ms.items() if k != "total"))
        return {k: round(v, 6) for k, v in self.ms.items()}


class Gateway:
    """The daemon's core, independent of the HTTP layer.

    Collaborators that touch the outside world (clock, cloud transport, edge
    model, ASR registry, devices) can be injected for tests and replay.
    """

    def __init__(
        self,
        config: GatewayConfig | None = None,
        clock: Any = None,
        cloud_transport: httpx.BaseTransport | None = None,
        edge_adapter: EdgeModelAdapter | None = None,
        asr_registry: MockRegistry | None = None,
        asr_transport: httpx.BaseTransport | None = None,
        devices: DeviceRegistry | None = None,
    ):
        self.config = cfg = config or GatewayConfig()
        self.clock = clock or SystemClock()
        data = cfg.data_path
        data.mkdir(parents=True, exist_ok=True)
        self.cache_path = data / "cache.json"
        self.cache = SemanticCache(cfg.cache, clock=self.clock.now)
        self.cache.load(self.cache_path)
        self.log = InteractionLog(data / "interactions.jsonl")
        self.profiles = ProfileStore(data / "profiles.json")
        self.devices = devices or default_registry(self.clock.perf)
        self.hub = ContextHub(self.clock.now)
        for s in cfg.sensors:
            source = ReplayProvider.from_csv(s.replay_csv, s.unit) if s.replay_csv else None
            self.hub.register_sensor(SensorSpec(s.sensor_id, s.kind, s.unit, s.interval_ms), source)
        self.tools = ToolRegistry()
        self.tools.register(device_tool(self.devices))
        self.tools.register(list_devices_tool(self.devices))
        self.tools.register(sensor_tool(self.hub))
        self.library = load_library(cfg.templates_dir or None)
        if edge_adapter is not None:
            self.edge = edge_adapter
        elif cfg.edge.kind == "openai":
            self.edge = OpenAICompatEdgeModel(cfg.edge.base_url, cfg.edge.model, cfg.edge.max_tokens)
        else:
            self.edge = MockEdgeModel(cfg.seed, cfg.edge.max_tokens)
        self.cloud = CloudClient(cfg.cloud, transport=cloud_transport)
        self.asr_registry = asr_registry if asr_registry is not None else DEFAULT_REGISTRY
        self.asr_transport = asr_transport
        self.sessions = SessionStore()
        self.connectivity = Connectivity(cfg.connectivity)
        self._lock = threading.Lock()
        self._persist_lock = threading.Lock()
        self._seq = len(self.log)
        self._since_persist = 0
        self._started = time.monotonic()
        self.counts = {t.value: 0 for t in RouteTier} | {"error": 0}

    # -- lifecycle ---------------------------------------------------------
    def start(self) -> None:
        self.hub.start()

    def close(self) -> None:
        self.hub.stop()
        self.persist()
        self.cloud.close()

    def persist(self) -> None:
        with self._persist_lock:
            self.cache.persist(self.cache_path)
            self._since_persist = 0

    def _maybe_persist(self, structural: bool) -> None:
        with self._persist_lock:
            self._since_persist += 1
            due = structural or self._since_persist >= self.config.persist_every
        if due:
            self.persist()

    def _next_id(self) -> str:
        with self._lock:
            self._seq += 1
            return f"ix{self.config.seed:x}-{self._seq:08d}"

    # -- helpers -----------------------------------------------------------
    def front_end(self, samples: np.ndarray) -> CleanUtterance:
        return api_front_end(samples, self.config.frontend)

    def register_utterance(self, samples: np.ndarray, text: str, confidence: float = 1.0) -> int:
        """Teach the mock ASR that this audio says ``text``. Returns the fingerprint.

        The samples go through the same 16-bit WAV quantisation as API audio.
        """
        pcm = decode_wav(encode_wav(np.asarray(samples, dtype=np.float64), self.config.frontend.sample_rate))
        fp = fingerprint(self.front_end(pcm))
        self.asr_registry.register(fp, text, confidence)
        return fp

    def _slots(self, query: str, user_id: str, profile: UserProfile | None, snapshot: ContextSnapshot) -> dict[str, str]:
        slots = {
            "query": query,
            "user": profile.display_name if profile is not None and profile.display_name else user_id,
            "time": time.strftime("%H:%M", time.gmtime(snapshot.wall_time)),
        }
        for sid, view in snapshot.sensors.items():
            slots[f"sensor.{sid}"] = "absent" if view.reading is None else f"{view.reading.value:.1f}{view.reading.unit}"
        return slots

    def _decide(self, req: InteractRequest, query: str, transcript: Transcript | None, hit: LookupResult | None) -> RoutingDecision:
        decision = route(transcript if transcript is not None else query, hit, self.connectivity,
                         self.config.routing, self.tools.trigger_keywords())
        force = req.force_tier
        if force is None or decision.tier is RouteTier.CLARIFY:
            return decision
        if force is RouteTier.CACHE and hit is None:
            return decision
        if force is RouteTier.CLOUD and self.connectivity is Connectivity.OFFLINE:
            return RoutingDecision(RouteTier.EDGE, Reason.OFFLINE)
        return RoutingDecision(force, decision.reason)

    # -- tiers ---------------------------------------------------------------
    def _run_edge(self, req, query, history, snapshot, profile, watch) -> tuple[str, list[ActionResult]]:
        template = select_plan_template(query, self.library)
        if template is not None:
            ctx = ToolContext(origin=Origin.PLAN)
            t0 = watch.perf()
            reply, _results = run_plan(template, self._slots(query, req.user_id, profile, snapshot), self.tools, ctx)
            watch.add("execute", t0)
            return reply, ctx.actions
        bundle = build_prompt(query, snapshot, profile, history, None, self.config.prompt)
        t0 = watch.perf()
        try:
            reply = edge_generate(bundle, self.edge)
        except AdapterFailure as exc:
            raise TierUnavailable(str(exc), FALLBACK_REPLY) from exc
        finally:
            watch.add("llm", t0)
        return reply, []

    def _run_cloud(self, query, history, snapshot, profile, watch, ctx: ToolContext) -> tuple[str, list[ActionResult]]:
        template = select_plan_template(query, self.library)
        bundle = build_prompt(query, snapshot, profile, history, template, self.config.prompt, self.tools.schemas())
        t0 = watch.perf()
        try:
            reply = call_cloud(bundle, self.cloud, self.tools, ctx).text
        finally:
            now = watch.perf()
            spent = max(0.0, (now - t0) * 1000.0)
            acted = min(spent, sum(a.latency_ms for a in ctx.actions))
            watch.ms["execute"] += acted
            watch.ms["llm"] += spent - acted
        return reply, ctx.actions

    # -- operations ------------------------------------------------------------
    def handle_interact(self, body: Any) -> InteractResponse:
        """Serve one request. Always returns a response and always logs exactly one record."""
        watch = _Stopwatch(self.clock.perf)
        iid = self._next_id()
        try:
            req = InteractRequest.parse(body)
        except (BadRequest, UnsupportedModality) as exc:
            status = 400 if isinstance(exc, BadRequest) else 422
            resp = InteractResponse(iid, "none", "", [], watch.finish(), status=status, error=str(exc))
            self._log(body if isinstance(body, dict) else {}, "", resp)
            return resp
        with self.sessions.lock(req.session_id):
            resp, query, entry_id = self._serve(iid, req, watch)
            if resp.status == 200:
                self.sessions.append(req.session_id, query, resp.reply_text)
        self._log({"session_id": req.session_id, "user_id": req.user_id}, query, resp, entry_id)
        return resp

    def _serve(self, iid: str, req: InteractRequest, watch: _Stopwatch) -> tuple[InteractResponse, str, str | None]:
        transcript: Transcript | None = None
        if req.input_type == "audio_wav":
            t0 = watch.perf()
            utt = self.front_end(req.samples)
            t0 = watch.add("audio", t0)
            try:
                transcript = transcribe(utt, self.config.asr, self.asr_registry, self.asr_transport)
            except LowConfidence as exc:
                transcript = Transcript(exc.text, exc.confidence, (), self.config.asr.kind.value)
            except AsrError as exc:
                watch.add("asr", t0)
                return self._unavailable(iid, watch, None, f"asr failed: {exc}", UNAVAILABLE_REPLY), "", None
            watch.add("asr", t0)
            query = transcript.text
        else:
            query = req.payload

        hit = None
        if transcript is None or transcript.confidence >= self.config.routing.min_asr_confidence:
            t0 = watch.perf()
            hit = self.cache.lookup(query) if query.strip() else None
            watch.add("cache", t0)
        decision = self._decide(req, query, transcript, hit)

        actions: list[ActionResult] = []
        entry_id = None
        tier = decision.tier
        error = None
        if tier is RouteTier.CACHE:
            entry = hit.entry
            entry_id = entry.entry_id
            reply = entry.response_text
            if entry.action is not None:
                t0 = watch.perf()
                actions.append(self.devices.execute(dataclasses.replace(entry.action, origin=Origin.CACHE)))
                watch.add("execute", t0)
        elif tier is RouteTier.CLARIFY:
            reply = CLARIFY_REPLY
        else:
            history = self.sessions.history(req.session_id)
            snapshot = self.hub.snapshot(req.session_id)
            profile = self.profiles.get_profile(req.user_id)
            try:
                if tier is RouteTier.CLOUD:
                    ctx = ToolContext(origin=Origin.CLOUD_TOOL)
                    try:
                        reply, actions = self._run_cloud(query, history, snapshot, profile, watch, ctx)
                    except CloudError as exc:
                        # degrade to the edge tier; actions the cloud already took still count
                        actions = list(ctx.actions)
                        error = f"cloud failed, answered on edge: {type(exc).__name__}: {exc}"
                        tier = RouteTier.EDGE
                        reply, more = self._run_edge(req, query, history, snapshot, profile, watch)
                        actions += more
                else:
                    reply, actions = self._run_edge(req, query, history, snapshot, profile, watch)
            except TierUnavailable as exc:
                resp = self._unavailable(iid, watch, transcript, str(exc), exc.reply, tier, decision.reason, actions)
                return resp, query, None
        self._maybe_persist(structural=False)
        resp = InteractResponse(iid, tier.value, reply, list(actions), watch.finish(), transcript,
                                decision.reason.value, 200, error)
        return resp, query, entry_id

    def _unavailable(self, iid, watch, transcript, message, reply, tier=None, reason=None, actions=()) -> InteractResponse:
        return InteractResponse(iid, tier.value if tier else "none", reply, list(actions), watch.finish(), transcript,
                                reason.value if reason else None, 503, message)

    def _log(self, who: dict, query: str, resp: InteractResponse, entry_id: str | None = None) -> None:
        sid = who.get("session_id") if isinstance(who.get("session_id"), str) else ""
        uid = who.get("user_id") if isinstance(who.get("user_id"), str) else ""
        failed = resp.status != 200
        record = InteractionRecord(
            interaction_id=resp.interaction_id,
            session_id=sid,
            user_id=uid,
            query=query,
            tier=resp.source_tier,
            reply=resp.reply_text,
            actions=[a.to_json() for a in resp.actions],
            timings=dict(resp.timing_ms),
            timestamp=self.clock.now(),
            error=resp.error if failed else None,
            cache_entry_id=entry_id,
        )
        self.log.append(record)
        with self._lock:
            self.counts["error" if failed else resp.source_tier] += 1

    def handle_feedback(self, interaction_id: Any, rating: Any) -> str:
        """Apply a rating. Raises ``BadRequest`` (400) or ``UnknownInteraction`` (404)."""
        if not isinstance(interaction_id, str) or not interaction_id:
            raise BadRequest("interaction_id must be a non-empty string")
        if isinstance(rating, bool) or not isinstance(rating, int) or rating not in (-1, 0, 1):
            raise BadRequest("rating must be -1, 0 or 1")
        record = FeedbackRecord(interaction_id, rating, self.clock.now())
        outcome = apply_feedback(record, self.log, self.cache, self.config.feedback_reinforcement)
        if outcome != "logged":
            self.persist()
        return outcome

    def handle_stats(self) -> dict:
        with self._lock:
            counts = dict(self.counts)
        return {
            "cache": self.cache.stats().to_json(),
            "uptime_s": round(time.monotonic() - self._started, 3),
            "requests": counts,
        }

    def handle_sensors(self) -> dict:
        snap = self.hub.snapshot()
        return {
            sid: {
                "kind": v.spec.kind.value,
                "unit": v.spec.unit,
                "value": None if v.reading is None else v.reading.value,
                "age_s": v.age_s,
                "stale": v.stale,
            }
            for sid, v in snap.sensors.items()
        }
