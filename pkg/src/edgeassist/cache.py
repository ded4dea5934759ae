"""Semantic response cache: trigram-hash embeddings, cosine lookup, frequency/age eviction, atomic JSON persistence."""

from __future__ import annotations

import enum
import json
import os
import tempfile
import threading
import time
import unicodedata
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from edgeassist.actions import Action
from edgeassist.errors import CorruptCacheFile, EmptyResponse, IoFailure, UnknownEntry
from edgeassist.hashing import fnv1a_64

EMBED_DIM = 256
MERGE_THRESHOLD = 0.98
SIM_DECIMALS = 12  # cosine values are rounded so ties are decided by the stated rule, not float noise
FILE_VERSION = 1


def normalize_query(text: str) -> str:
    """Lowercase, drop punctuation, collapse whitespace."""
    lowered = text.lower()
    kept = "".join(ch for ch in lowered if not unicodedata.category(ch).startswith("P"))
    return " ".join(kept.split())


def trigrams(text: str) -> list[str]:
    padded = f"^{text}$"
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


def trigram_bucket(gram: str, dim: int = EMBED_DIM) -> int:
    return fnv1a_64(gram.encode("utf-8")) % dim


def embed(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Hashed character-trigram counts, L2-normalised. Empty text maps to the zero vector."""
    v = np.zeros(dim)
    if not text:
        return v
    for g in trigrams(text):
        v[trigram_bucket(g, dim)] += 1.0
    return v / np.linalg.norm(v)


class Tier(str, enum.Enum):
    EDGE = "edge"
    CLOUD = "cloud"


@dataclass
class CacheConfig:
    capacity: int = 1000
    similarity_tau: float = 0.85
    ttl_s: float = 7 * 24 * 3600.0
    half_life_h: float = 24.0
    merge_threshold: float = MERGE_THRESHOLD

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0.0 < self.similarity_tau <= 1.0:
            raise ValueError("similarity_tau must lie in (0, 1]")
        if self.ttl_s <= 0 or self.half_life_h <= 0:
            raise ValueError("ttl_s and half_life_h must be positive")


@dataclass
class CacheEntry:
    entry_id: str
    normalized_query: str
    embedding: np.ndarray
    response_text: str
    action: Action | None
    hit_count: int
    created_at: float
    last_hit_at: float
    source_tier: Tier
    invalidated: bool = False

    def priority(self, now: float, half_life_h: float) -> float:
        age_h = max(now - self.last_hit_at, 0.0) / 3600.0
        return self.hit_count * 2.0 ** (-age_h / half_life_h)

    def to_json(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "normalized_query": self.normalized_query,
            "embedding": [float(x) for x in self.embedding],
            "response_text": self.response_text,
            "action": None if self.action is None else self.action.to_json(),
            "hit_count": self.hit_count,
            "created_at": self.created_at,
            "last_hit_at": self.last_hit_at,
            "source_tier": self.source_tier.value,
            "invalidated": self.invalidated,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CacheEntry":
        emb = np.asarray(d["embedding"], dtype=np.float64)
        if emb.ndim != 1:
            raise ValueError("embedding must be a flat list")
        return cls(
            entry_id=str(d["entry_id"]),
            normalized_query=str(d["normalized_query"]),
            embedding=emb,
            response_text=str(d["response_text"]),
            action=None if d["action"] is None else Action.from_json(d["action"]),
            hit_count=int(d["hit_count"]),
            created_at=float(d["created_at"]),
            last_hit_at=float(d["last_hit_at"]),
            source_tier=Tier(d["source_tier"]),
            invalidated=bool(d["invalidated"]),
        )


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    expirations: int = 0
    size: int = 0

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __sub__(self, other: "CacheStats") -> "CacheStats":
        return CacheStats(**{f.name: getattr(self, f.name) - getattr(other, f.name) for f in fields(self)})


@dataclass
class LookupResult:
    entry: CacheEntry
    similarity: float


class SemanticCache:
    """Thread-safe semantic cache. Every public method takes the cache lock.

    Times are epoch seconds; each mutating call accepts ``now`` and falls back
    to the injected clock.
    """

    def __init__(
        self,
        config: CacheConfig | None = None,
        embedder: Callable[[str], np.ndarray] = embed,
        clock: Callable[[], float] = time.time,
    ):
        self.config = config or CacheConfig()
        self.embedder = embedder
        self.clock = clock
        self._entries: dict[str, CacheEntry] = {}
        self._stats = CacheStats()
        self._seq = 0
        self._lock = threading.RLock()

    # -- inspection -------------------------------------------------------
    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def entries(self) -> list[CacheEntry]:
        with self._lock:
            return list(self._entries.values())

    def get(self, entry_id: str) -> CacheEntry:
        with self._lock:
            try:
                return self._entries[entry_id]
            except KeyError:
                raise UnknownEntry(entry_id) from None

    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(**{**self._stats.to_json(), "size": len(self._entries)})

    # -- core operations --------------------------------------------------
    def _live(self, now: float) -> list[CacheEntry]:
        ttl = self.config.ttl_s
        return [e for e in self._entries.values() if not e.invalidated and now - e.last_hit_at <= ttl]

    def _best(self, vec: np.ndarray, candidates: list[CacheEntry]) -> tuple[CacheEntry | None, float]:
        if not candidates or not np.any(vec):
            return None, 0.0
        mat = np.stack([e.embedding for e in candidates])
        sims = np.round(mat @ vec, SIM_DECIMALS)
        best_sim = sims.max()
        tied = [candidates[i] for i in np.flatnonzero(sims == best_sim)]
        # most recent last hit wins; then oldest creation; then id
        tied.sort(key=lambda e: (-e.last_hit_at, e.created_at, e.entry_id))
        return tied[0], float(best_sim)

    def peek(self, query: str, now: float | None = None) -> LookupResult | None:
        """Like :meth:`lookup` but without touching hit counts or stats."""
        with self._lock:
            now = self.clock() if now is None else now
            entry, sim = self._best(self.embedder(normalize_query(query)), self._live(now))
            if entry is None or sim < self.config.similarity_tau:
                return None
            return LookupResult(entry, sim)

    def lookup(self, query: str, now: float | None = None) -> LookupResult | None:
        with self._lock:
            now = self.clock() if now is None else now
            result = self.peek(query, now)
            if result is None:
                self._stats.misses += 1
                return None
            result.entry.hit_count += 1
            result.entry.last_hit_at = now
            self._stats.hits += 1
            return result

    def insert(
        self,
        query: str,
        response: str,
        action: Action | None = None,
        tier: Tier | str = Tier.CLOUD,
        now: float | None = None,
    ) -> CacheEntry:
        """Store a response; near-duplicates (cosine >= merge threshold) are merged in place."""
        if not response or not response.strip():
            raise EmptyResponse("cannot cache an empty response")
        with self._lock:
            now = self.clock() if now is None else now
            norm = normalize_query(query)
            vec = self.embedder(norm)
            twin, sim = self._best(vec, [e for e in self._entries.values() if not e.invalidated])
            if twin is not None and sim >= self.config.merge_threshold:
                twin.response_text = response
                twin.action = action
                twin.source_tier = Tier(tier)
                twin.hit_count += 1
                twin.last_hit_at = now
                entry = twin
            else:
                self._seq += 1
                entry = CacheEntry(
                    entry_id=f"e{self._seq:08d}",
                    normalized_query=norm,
                    embedding=vec,
                    response_text=response,
                    action=action,
                    hit_count=1,
                    created_at=now,
                    last_hit_at=now,
                    source_tier=Tier(tier),
                )
                self._entries[entry.entry_id] = entry
            if len(self._entries) > self.config.capacity:
                self.evict(now)
            return entry

    def evict(self, now: float | None = None) -> list[CacheEntry]:
        """Drop lowest-priority entries until within capacity. Invalidated entries go first."""
        with self._lock:
            now = self.clock() if now is None else now
            evicted: list[CacheEntry] = []
            excess = len(self._entries) - self.config.capacity
            if excess <= 0:
                return evicted
            hl = self.config.half_life_h
            order = sorted(
                self._entries.values(),
                key=lambda e: (
                    not e.invalidated,
                    e.priority(now, hl),
                    e.created_at,
                    e.entry_id,
                ),
            )
            for e in order[:excess]:
                del self._entries[e.entry_id]
                evicted.append(e)
            self._stats.evictions += len(evicted)
            return evicted

    def maintain(self, now: float | None = None) -> CacheStats:
        """Expire stale entries, purge invalidated ones, re-run eviction. Returns the stats delta."""
        with self._lock:
            now = self.clock() if now is None else now
            before = self.stats()
            for e in list(self._entries.values()):
                if e.invalidated:
                    del self._entries[e.entry_id]
                elif now - e.last_hit_at > self.config.ttl_s:
                    del self._entries[e.entry_id]
                    self._stats.expirations += 1
            self.evict(now)
            return self.stats() - before

    def invalidate(self, entry_id: str) -> None:
        with self._lock:
            self.get(entry_id).invalidated = True

    def reinforce(self, entry_id: str, hits: int) -> None:
        with self._lock:
            self.get(entry_id).hit_count += hits

    def remove(self, entry_id: str) -> None:
        with self._lock:
            self.get(entry_id)
            del self._entries[entry_id]

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    # -- persistence ------------------------------------------------------
    def to_json(self) -> dict:
        with self._lock:
            return {
                "version": FILE_VERSION,
                "next_seq": self._seq,
                "entries": [e.to_json() for e in sorted(self._entries.values(), key=lambda e: e.entry_id)],
                "stats": self.stats().to_json(),
            }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def persist(self, path: str | Path) -> None:
        """Write atomically: temp file in the target directory, fsync, rename."""
        path = Path(path)
        data = self.dumps().encode("utf-8")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        except OSError as exc:
            raise IoFailure(f"cannot write cache file {path}: {exc}") from exc

    def load(self, path: str | Path) -> None:
        """Replace contents from ``path``. A missing file yields an empty cache;
        a corrupt one raises ``CorruptCacheFile`` and leaves the cache as it was."""
        path = Path(path)
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            with self._lock:
                self._entries.clear()
                self._stats = CacheStats()
                self._seq = 0
            return
        except OSError as exc:
            raise IoFailure(f"cannot read cache file {path}: {exc}") from exc
        try:
            doc = json.loads(raw.decode("utf-8"))
            if doc.get("version") != FILE_VERSION:
                raise ValueError(f"unsupported cache file version {doc.get('version')!r}")
            entries = [CacheEntry.from_json(d) for d in doc["entries"]]
            stats = CacheStats(**doc["stats"])
            seq = int(doc["next_seq"])
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise CorruptCacheFile(f"{path}: {exc}") from exc
        with self._lock:
            self._entries = {e.entry_id: e for e in entries}
            self._stats = stats
            self._seq = seq

