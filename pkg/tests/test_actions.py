from __future__ import annotations

import threading

import pytest
from hypothesis import given, strategies as st

from edgeassist.actions import (
    Action,
    CapabilitySpec,
    DeviceRegistry,
    FeedbackRecord,
    MockLamp,
    MockThermostat,
    Origin,
    apply_feedback,
    default_registry,
)
from edgeassist.cache import CacheConfig, SemanticCache
from edgeassist.errors import DuplicateDevice, UnknownInteraction
from edgeassist.interactions import InteractionLog, InteractionRecord


def lamp(capability: str, value, device: str = "lamp1") -> Action:
    return Action(device, capability, {"value": value})


# -- registry ---------------------------------------------------------------------------
def test_registered_lamp_in_inventory():
    reg = DeviceRegistry()
    reg.register_device("lamp1", MockLamp())
    inv = reg.inventory()
    assert inv["lamp1"]["kind"] == "lamp"
    assert inv["lamp1"]["capabilities"]["power"] == {"type": "enum", "values": ["on", "off"]}
    assert inv["lamp1"]["capabilities"]["brightness"] == {"type": "integer", "minimum": 0, "maximum": 100}


def test_duplicate_device_rejected():
    reg = DeviceRegistry()
    reg.register_device("lamp1", MockLamp())
    with pytest.raises(DuplicateDevice):
        reg.register_device("lamp1", MockLamp())


def test_thermostat_spec_queryable():
    reg = DeviceRegistry()
    reg.register_device("t1", MockThermostat())
    assert reg.inventory()["t1"]["capabilities"]["set_target"] == {"type": "number", "minimum": 10.0, "maximum": 30.0}


# -- execute ----------------------------------------------------------------------------
def test_lamp_power_on():
    reg = default_registry()
    res = reg.execute(lamp("power", "on"))
    assert res.ok and res.detail == "ok" and res.latency_ms >= 0
    assert reg.state_dump()["lamp1"]["power"] == "on"


def test_brightness_out_of_range():
    reg = default_registry()
    res = reg.execute(lamp("brightness", 150))
    assert not res.ok and "out of range 0..100" in res.detail
    assert reg.state_dump()["lamp1"]["brightness"] == 100


def test_unknown_device():
    res = default_registry().execute(lamp("power", "on", device="garage"))
    assert not res.ok and res.detail == "unknown device"


@pytest.mark.parametrize(
    "action, fragment",
    [
        (Action("lamp1", "color", {"value": "red"}), "unknown capability"),
        (Action("lamp1", "power", {"value": "dim"}), "must be one of"),
        (Action("lamp1", "brightness", {"value": 5.5}), "integer"),
        (Action("lamp1", "brightness", {"value": True}), "number"),
        (Action("lamp1", "power", {}), "parameters"),
        (Action("lamp1", "power", {"value": "on", "extra": 1}), "parameters"),
        (Action("", "power", {"value": "on"}), "device_id"),
        (Action("lamp1", "", {"value": "on"}), "capability"),
        (Action("lamp1", "power", "on"), "parameters"),  # type: ignore[arg-type]
        (Action(None, None, None), "device_id"),  # type: ignore[arg-type]
    ],
)
def test_invalid_actions_fail_as_data(action, fragment):
    res = default_registry().execute(action)
    assert not res.ok and fragment in res.detail


def test_adapter_exception_is_contained():
    class Broken(MockLamp):
        def apply(self, capability, value):
            raise RuntimeError("bus fault")

    reg = DeviceRegistry()
    reg.register_device("lamp1", Broken())
    res = reg.execute(lamp("power", "on"))
    assert not res.ok and "bus fault" in res.detail


anything = st.one_of(st.none(), st.integers(), st.floats(allow_nan=True), st.text(max_size=5), st.booleans())


@given(
    st.one_of(st.sampled_from(["lamp1", "thermostat1", "switch1", "x"]), st.text(max_size=4)),
    st.one_of(st.sampled_from(["power", "brightness", "set_target"]), st.text(max_size=4)),
    st.one_of(st.dictionaries(st.sampled_from(["value", "v"]), anything, max_size=2), anything),
)
def test_execute_is_total(device, capability, params):
    res = default_registry().execute(Action(device, capability, params))
    assert isinstance(res.ok, bool) and res.latency_ms >= 0


ACTIONS = st.sampled_from(
    [lamp("power", "on"), lamp("power", "off"), lamp("brightness", 30), lamp("brightness", 101),
     Action("thermostat1", "set_target", {"value": 21.5}), Action("thermostat1", "set_target", {"value": 45}),
     Action("switch1", "power", {"value": "on"}), Action("switch1", "power", {"value": "sideways"})]
)


@given(st.lists(ACTIONS, max_size=30))
def test_state_is_fold_of_ok_actions(actions):
    reg = default_registry()
    results = [reg.execute(a) for a in actions]
    expected = default_registry().state_dump()
    for r in results:
        if r.ok:
            expected[r.action.device_id][r.action.capability] = r.action.parameters["value"]
    assert reg.state_dump() == expected
    assert reg.history == results


def test_concurrent_execution_keeps_history_complete():
    reg = default_registry()

    def worker(v):
        for _ in range(100):
            reg.execute(lamp("brightness", v))

    threads = [threading.Thread(target=worker, args=(v,)) for v in (10, 20, 30, 40)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(reg.history) == 400
    assert reg.state_dump()["lamp1"]["brightness"] == reg.history[-1].action.parameters["value"]


def test_action_json_round_trip():
    a = Action("lamp1", "power", {"value": "on"}, Origin.PLAN)
    assert Action.from_json(a.to_json()) == a
    assert a.to_json()["origin"] == "plan"


# -- feedback ---------------------------------------------------------------------------
def record(iid: str, tier: str, **kw) -> InteractionRecord:
    return InteractionRecord(iid, "s", "u", kw.pop("query", "turn on the lamp"), tier, kw.pop("reply", "Lamp is on."), **kw)


def test_rating_must_be_in_set():
    for bad in (2, -2, True, 0.5):
        with pytest.raises(ValueError):
            FeedbackRecord("x", bad)


def test_positive_on_cloud_answer_inserts_entry():
    log, cache = InteractionLog(), SemanticCache()
    ok = {"action": lamp("power", "on").to_json(), "ok": True, "detail": "ok", "latency_ms": 0.1}
    log.append(record("i1", "cloud", actions=[ok]))
    assert apply_feedback(FeedbackRecord("i1", 1, 10.0), log, cache) == "cached"
    hit = cache.lookup("turn on the lamp", now=11)
    assert hit.entry.response_text == "Lamp is on."
    assert hit.entry.action == Action("lamp1", "power", {"value": "on"}, Origin.CLOUD_TOOL)
    assert hit.entry.source_tier.value == "cloud"


def test_failed_actions_not_cached():
    log, cache = InteractionLog(), SemanticCache()
    bad = {"action": lamp("brightness", 200).to_json(), "ok": False, "detail": "range", "latency_ms": 0.1}
    log.append(record("i1", "edge", actions=[bad]))
    apply_feedback(FeedbackRecord("i1", 1, 0.0), log, cache)
    assert cache.entries()[0].action is None


def test_negative_on_cache_answer_invalidates():
    log, cache = InteractionLog(), SemanticCache()
    e = cache.insert("turn on the lamp", "Lamp is on.", now=0)
    log.append(record("i1", "cache", cache_entry_id=e.entry_id))
    assert apply_feedback(FeedbackRecord("i1", -1, 1.0), log, cache) == "invalidated"
    assert cache.lookup("turn on the lamp", now=2) is None


def test_positive_on_cache_answer_reinforces():
    log, cache = InteractionLog(), SemanticCache()
    e = cache.insert("q q q", "a", now=0)
    log.append(record("i1", "cache", cache_entry_id=e.entry_id))
    apply_feedback(FeedbackRecord("i1", 1, 1.0), log, cache, reinforcement=2)
    assert e.hit_count == 3


def test_neutral_and_error_records_only_logged():
    log, cache = InteractionLog(), SemanticCache()
    log.append(record("i1", "cloud"))
    log.append(record("i2", "cloud", error="cloud unreachable"))
    assert apply_feedback(FeedbackRecord("i1", 0), log, cache) == "logged"
    assert apply_feedback(FeedbackRecord("i2", 1), log, cache) == "logged"
    assert len(cache) == 0 and len(log.feedback) == 2


def test_unknown_interaction():
    with pytest.raises(UnknownInteraction):
        apply_feedback(FeedbackRecord("nope", 1), InteractionLog(), SemanticCache())


def test_negative_feedback_is_idempotent():
    log, cache = InteractionLog(), SemanticCache(CacheConfig())
    e = cache.insert("turn on the lamp", "Lamp is on.", now=0)
    cache.insert("something else entirely", "x", now=0)
    log.append(record("i1", "cache", cache_entry_id=e.entry_id))
    apply_feedback(FeedbackRecord("i1", -1, 1.0), log, cache)
    once = cache.dumps()
    apply_feedback(FeedbackRecord("i1", -1, 2.0), log, cache)
    assert cache.dumps() == once
    cache.maintain(now=3)
    assert apply_feedback(FeedbackRecord("i1", -1, 3.0), log, cache) == "logged"


# -- capability validation -----------------------------------------------------------------
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_range_spec_accepts_exactly_its_interval(v):
    spec = CapabilitySpec("t", minimum=10.0, maximum=30.0)
    assert (spec.validate(v) is None) == (10.0 <= v <= 30.0)
