from __future__ import annotations

import json
import threading

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from edgeassist.actions import Action, Origin
from edgeassist.cache import (
    CacheConfig,
    CacheStats,
    SemanticCache,
    Tier,
    embed,
    normalize_query,
    trigram_bucket,
    trigrams,
)
from edgeassist.errors import CorruptCacheFile, EmptyResponse, UnknownEntry
from oracles import brute_force_lookup, eviction_order, fnv1a64, normalize, trigram_vector

H = 3600.0


# -- normalisation and embedding ---------------------------------------------------------
@pytest.mark.parametrize(
    "raw, norm",
    [("  Turn ON the Lamp!! ", "turn on the lamp"), ("", ""), ("what's   the Weather?", "whats the weather")],
)
def test_normalize_examples(raw, norm):
    assert normalize_query(raw) == norm


@given(st.text(max_size=40))
def test_normalize_matches_oracle(text):
    assert normalize_query(text) == normalize(text)


def test_abc_trigrams_and_buckets():
    assert trigrams("abc") == ["^ab", "abc", "bc$"]
    v = embed("abc")
    counts = np.zeros(256)
    for g in ("^ab", "abc", "bc$"):
        counts[fnv1a64(g.encode()) % 256] += 1
        assert trigram_bucket(g) == fnv1a64(g.encode()) % 256
    np.testing.assert_allclose(v, counts / np.linalg.norm(counts))
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


@given(st.text(min_size=1, max_size=30))
def test_embedding_matches_oracle(text):
    n = normalize(text)
    np.testing.assert_allclose(embed(n), trigram_vector(n), atol=1e-12)
    if n:
        assert abs(np.linalg.norm(embed(n)) - 1.0) < 1e-6


def test_empty_text_never_matches():
    c = SemanticCache()
    c.insert("hello", "hi", now=0)
    assert not embed("").any()
    assert c.lookup("", now=0) is None
    assert c.lookup("!!!", now=0) is None


# -- lookup ------------------------------------------------------------------------------
def test_exact_query_hits_with_similarity_one():
    c = SemanticCache()
    e = c.insert("Turn on the lamp", "ok", now=0)
    r = c.lookup("turn on the LAMP!", now=5)
    assert r.entry is e and r.similarity == 1.0
    assert e.hit_count == 2 and e.last_hit_at == 5
    assert c.stats().hits == 1


def test_empty_cache_misses():
    c = SemanticCache()
    assert c.lookup("anything", now=0) is None
    assert c.stats().misses == 1


def test_near_query_agrees_with_brute_force():
    c = SemanticCache(CacheConfig(similarity_tau=0.85))
    e = c.insert("turn on the lamp", "ok", now=0)
    oracle = brute_force_lookup("turn on lamp", [{"query": "turn on the lamp", "last_hit_at": 0, "created_at": 0, "entry_id": e.entry_id}], 0.85)
    got = c.peek("turn on lamp", now=0)
    assert (got is None) == (oracle is None)
    if got is not None:
        assert got.similarity == pytest.approx(oracle[1], abs=1e-12)


def test_ties_go_to_most_recent_hit():
    c = SemanticCache(CacheConfig(merge_threshold=1.01))  # allow exact duplicates
    a = c.insert("same", "a", now=0)
    b = c.insert("same", "b", now=1)
    assert c.lookup("same", now=2).entry is b
    a.last_hit_at = 10
    assert c.lookup("same", now=11).entry is a


WORDS = ["turn", "on", "off", "the", "lamp", "light", "kitchen", "heat", "set", "to", "what", "is", "weather", "time"]
phrases = st.lists(st.sampled_from(WORDS), min_size=1, max_size=5).map(" ".join)


@settings(max_examples=60)
@given(st.lists(st.tuples(phrases, st.integers(0, 5), st.integers(0, 5)), min_size=0, max_size=100), phrases)
def test_lookup_equals_brute_force_scan(population, query):
    c = SemanticCache(CacheConfig(capacity=1000, merge_threshold=1.01, ttl_s=1e9))
    rows = []
    for q, created, hit in population:
        e = c.insert(q, "r", now=created)
        e.last_hit_at = created + hit
        rows.append({"query": q, "created_at": e.created_at, "last_hit_at": e.last_hit_at, "entry_id": e.entry_id})
    got = c.peek(query, now=100)
    want = brute_force_lookup(query, rows, c.config.similarity_tau)
    if want is None:
        assert got is None
    else:
        assert got.entry.entry_id == want[0]
        assert got.similarity == pytest.approx(want[1], abs=1e-12)


# -- insert ------------------------------------------------------------------------------
def test_insert_and_merge():
    c = SemanticCache()
    c.insert("hello there", "one", now=0)
    assert len(c) == 1
    e = c.insert("Hello there!", "two", now=1)
    assert len(c) == 1 and e.hit_count == 2 and e.response_text == "two"


def test_insert_over_capacity_evicts_one():
    c = SemanticCache(CacheConfig(capacity=3))
    for q in ["alpha", "bravo", "charlie", "delta"]:
        c.insert(q, "r", now=0)
    assert len(c) == 3 and c.stats().evictions == 1


def test_empty_response_rejected():
    with pytest.raises(EmptyResponse):
        SemanticCache().insert("q", "  ")


def test_action_is_stored():
    a = Action("lamp1", "power", {"value": "on"}, Origin.CLOUD_TOOL)
    e = SemanticCache().insert("lamp on", "done", a, Tier.CLOUD, now=0)
    assert e.action == a and e.source_tier is Tier.CLOUD


# -- evict -------------------------------------------------------------------------------
def test_lower_hit_count_evicted():
    c = SemanticCache(CacheConfig(capacity=2))
    a = c.insert("alpha", "r", now=0)
    b = c.insert("bravo", "r", now=0)
    a.hit_count, b.hit_count = 5, 1
    c.config.capacity = 1
    assert [e.entry_id for e in c.evict(now=0)] == [b.entry_id]


def test_older_entry_evicted_at_equal_hits():
    c = SemanticCache(CacheConfig(capacity=2, half_life_h=24))
    a = c.insert("alpha", "r", now=0)
    b = c.insert("bravo", "r", now=0)
    a.last_hit_at = 1000 * H - 1 * H
    b.last_hit_at = 1000 * H - 100 * H
    c.config.capacity = 1
    assert [e.entry_id for e in c.evict(now=1000 * H)] == [b.entry_id]


def test_eviction_order_matches_oracle():
    rng = np.random.default_rng(4)
    c = SemanticCache(CacheConfig(capacity=100, half_life_h=24))
    rows = []
    for i in range(10):
        e = c.insert(f"query number {i} " + "x" * i, "r", now=float(rng.integers(0, 50)) * H)
        e.hit_count = int(rng.integers(1, 6))
        e.last_hit_at = e.created_at + float(rng.integers(0, 100)) * H
        e.invalidated = bool(i == 7)
        rows.append({"entry_id": e.entry_id, "hit_count": e.hit_count, "last_hit_at": e.last_hit_at,
                     "created_at": e.created_at, "invalidated": e.invalidated})
    now = 200 * H
    c.config.capacity = 1
    evicted = [e.entry_id for e in c.evict(now)]
    assert evicted == eviction_order(rows, now, 24)[:9]


# -- maintain ----------------------------------------------------------------------------
def test_maintain_fresh_cache_is_noop():
    c = SemanticCache()
    c.insert("a b c", "r", now=0)
    assert c.maintain(now=10) == CacheStats()


def test_stale_entry_expires():
    c = SemanticCache(CacheConfig(ttl_s=100))
    c.insert("a b c", "r", now=0)
    delta = c.maintain(now=101)
    assert delta.expirations == 1 and delta.size == -1


def test_maintain_matches_expire_then_evict_simulation():
    rng = np.random.default_rng(9)
    cfg = CacheConfig(capacity=30, ttl_s=48 * H, half_life_h=12)
    c = SemanticCache(cfg)
    for i in range(40):
        c.insert(f"item {i} " + "q" * (i % 7), "r", now=0)
    rows = []
    for e in c.entries():
        e.hit_count = int(rng.integers(1, 10))
        e.last_hit_at = float(rng.integers(0, 100)) * H
        rows.append({"entry_id": e.entry_id, "hit_count": e.hit_count, "last_hit_at": e.last_hit_at, "created_at": e.created_at})
    c.config.capacity = 20
    now = 120 * H
    survivors = [r for r in rows if now - r["last_hit_at"] <= cfg.ttl_s]
    order = eviction_order(survivors, now, cfg.half_life_h)
    expected = set(order[max(0, len(order) - 20) :])
    delta = c.maintain(now)
    assert {e.entry_id for e in c.entries()} == expected
    assert delta.expirations == len(rows) - len(survivors)


# -- invalidate --------------------------------------------------------------------------
def test_invalidate_then_lookup_misses():
    c = SemanticCache()
    e = c.insert("lamp on", "ok", now=0)
    c.invalidate(e.entry_id)
    assert c.lookup("lamp on", now=1) is None
    assert c.maintain(now=1).size == -1
    with pytest.raises(UnknownEntry):
        c.invalidate("e99999999")


def test_invalidated_entry_not_merged_into():
    c = SemanticCache()
    e = c.insert("lamp on", "old", now=0)
    c.invalidate(e.entry_id)
    fresh = c.insert("lamp on", "new", now=1)
    assert fresh.entry_id != e.entry_id and fresh.hit_count == 1


# -- capacity property -------------------------------------------------------------------
ops = st.lists(
    st.tuples(st.sampled_from(["insert", "lookup", "invalidate", "reinforce"]), phrases, st.integers(0, 1000)),
    max_size=60,
)


@given(st.integers(1, 8), ops)
def test_capacity_bound_after_maintain(capacity, seq):
    c = SemanticCache(CacheConfig(capacity=capacity, ttl_s=500))
    for op, q, t in seq:
        if op == "insert":
            c.insert(q, "r", now=t)
        elif op == "lookup":
            c.lookup(q, now=t)
        elif c.entries():
            target = c.entries()[t % len(c)].entry_id
            c.invalidate(target) if op == "invalidate" else c.reinforce(target, 2)
        assert len(c) <= capacity
    c.maintain(now=1000)
    assert len(c) <= capacity


@example(["turn turn", "turn turn turn"])
@given(st.lists(phrases, min_size=1, max_size=20))
def test_live_exact_query_always_hits(queries):
    c = SemanticCache(CacheConfig(capacity=1000))
    for q in queries:
        c.insert(q, "r", now=0)
    live = {e.normalized_query for e in c.entries()}
    for q in queries:
        r = c.lookup(q, now=1)
        # a near-duplicate was merged into an earlier entry at cosine >= the merge threshold
        assert r is not None and r.similarity >= c.config.similarity_tau
        if normalize_query(q) in live:
            assert r.similarity == 1.0 and r.entry.normalized_query == normalize_query(q)


# -- persistence -------------------------------------------------------------------------
def populated(n: int = 20) -> SemanticCache:
    c = SemanticCache(CacheConfig(capacity=1000))
    a = Action("lamp1", "brightness", {"value": 40}, Origin.CLOUD_TOOL)
    for i in range(n):
        c.insert(f"question {i} about ünïcode", f"answer {i}", a if i % 3 == 0 else None, Tier.EDGE if i % 2 else Tier.CLOUD, now=i * 1.1)
    c.lookup("question 3 about ünïcode", now=99.5)
    c.lookup("nothing like it", now=99.5)
    return c


def test_round_trip_preserves_everything(tmp_path):
    c = populated()
    path = tmp_path / "cache.json"
    c.persist(path)
    d = SemanticCache()
    d.load(path)
    assert d.to_json() == c.to_json()
    assert d.stats() == c.stats()
    for e in c.entries():
        f = d.get(e.entry_id)
        np.testing.assert_array_equal(f.embedding, e.embedding)
        assert f.action == e.action
    # ids keep counting from where they left off
    assert d.insert("brand new thing", "r", now=200).entry_id == "e00000021"


def test_persist_load_persist_is_byte_identical(tmp_path):
    c = populated(100)
    c.persist(tmp_path / "a.json")
    d = SemanticCache()
    d.load(tmp_path / "a.json")
    d.persist(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_missing_file_loads_empty(tmp_path):
    c = populated(3)
    c.load(tmp_path / "nope.json")
    assert len(c) == 0 and c.stats() == CacheStats()


@pytest.mark.parametrize("mangle", [
    lambda b: b[: len(b) // 2],
    lambda b: b"not json",
    lambda b: json.dumps({"version": 99, "entries": [], "stats": {}, "next_seq": 0}).encode(),
    lambda b: json.dumps({"version": 1, "entries": [{"entry_id": "x"}], "stats": {}, "next_seq": 0}).encode(),
])
def test_corrupt_file_leaves_cache_untouched(tmp_path, mangle):
    path = tmp_path / "cache.json"
    populated(5).persist(path)
    path.write_bytes(mangle(path.read_bytes()))
    c = populated(4)
    before = c.dumps()
    with pytest.raises(CorruptCacheFile):
        c.load(path)
    assert c.dumps() == before


def test_persist_leaves_no_temp_files(tmp_path):
    populated(3).persist(tmp_path / "cache.json")
    assert [p.name for p in tmp_path.iterdir()] == ["cache.json"]


def test_concurrent_lookups_and_inserts():
    c = SemanticCache(CacheConfig(capacity=50))
    errors = []

    def worker(k):
        try:
            for i in range(200):
                c.insert(f"worker {k} item {i % 60}", "r", now=i)
                c.lookup(f"worker {(k + 1) % 4} item {i % 60}", now=i)
        except Exception as exc:  # pragma: no cover - surfaced below
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors and len(c) <= 50
    s = c.stats()
    assert s.hits + s.misses == 800
