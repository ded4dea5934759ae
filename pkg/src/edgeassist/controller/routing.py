"""Tier selection for a request."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from edgeassist.asr import Transcript
from edgeassist.cache import LookupResult, normalize_query
from edgeassist.controller.tools import keyword_present


class Connectivity(str, enum.Enum):
    ONLINE = "online"
    OFFLINE = "offline"


class RouteTier(str, enum.Enum):
    CACHE = "cache"
    EDGE = "edge"
    CLOUD = "cloud"
    CLARIFY = "clarify"


class Reason(str, enum.Enum):
    CACHE_HIT = "cache_hit"
    OFFLINE = "offline"
    LOW_COMPLEXITY = "low_complexity"
    TOOL_INTENT = "tool_intent"
    DEFAULT = "default"
    LOW_ASR_CONFIDENCE = "low_asr_confidence"


@dataclass(frozen=True)
class RoutingConfig:
    complexity_threshold: int = 24
    similarity_tau: float = 0.85
    min_asr_confidence: float = 0.5


@dataclass(frozen=True)
class RoutingDecision:
    tier: RouteTier
    reason: Reason


def route(
    query: str | Transcript,
    cache_result: LookupResult | None,
    connectivity: Connectivity,
    config: RoutingConfig = RoutingConfig(),
    tool_keywords: tuple[str, ...] = (),
) -> RoutingDecision:
    """Fixed-priority routing: clarify, cache, offline edge, simple edge, cloud."""
    if isinstance(query, Transcript):
        if query.confidence < config.min_asr_confidence:
            return RoutingDecision(RouteTier.CLARIFY, Reason.LOW_ASR_CONFIDENCE)
        text = query.text
    else:
        text = query
    if cache_result is not None and cache_result.similarity >= config.similarity_tau:
        return RoutingDecision(RouteTier.CACHE, Reason.CACHE_HIT)
    if Connectivity(connectivity) is Connectivity.OFFLINE:
        return RoutingDecision(RouteTier.EDGE, Reason.OFFLINE)
    norm = normalize_query(text)
    tool_intent = any(keyword_present(kw, norm) for kw in tool_keywords)
    if len(norm.split()) <= config.complexity_threshold and not tool_intent:
        return RoutingDecision(RouteTier.EDGE, Reason.LOW_COMPLEXITY)
    return RoutingDecision(RouteTier.CLOUD, Reason.TOOL_INTENT if tool_intent else Reason.DEFAULT)
