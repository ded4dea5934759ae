"""Write the chat-completions wire goldens under tests/fixtures/wire/.

Bodies are spelled out as literal dicts and encoded with plain ``json``; this
script deliberately imports nothing from the package so the goldens stay an
independent statement of the protocol.
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "wire"
MODEL = "gpt-4o-mini"
SYSTEM = "You are a home assistant under test."
WEATHER_TOOL = {
    "type": "function",
    "function": {
        "name": "get_weather",
        "description": "Current weather for a city.",
        "parameters": {
            "type": "object",
            "properties": {"city": {"type": "string"}},
            "required": ["city"],
            "additionalProperties": False,
        },
    },
}


def enc(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def response(n: int, message: dict, finish: str, prompt_tokens: int) -> dict:
    return {
        "id": f"chatcmpl-golden{n}",
        "object": "chat.completion",
        "created": 1718000000 + n,
        "model": "gpt-4o-mini-2024-07-18",
        "choices": [{"index": 0, "message": message, "logprobs": None, "finish_reason": finish}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": 9, "total_tokens": prompt_tokens + 9},
        "system_fingerprint": "fp_golden",
    }


def tool_call(call_id: str, city: str) -> dict:
    return {"id": call_id, "type": "function", "function": {"name": "get_weather", "arguments": enc({"city": city})}}


def assistant_calls(*calls: dict) -> dict:
    return {"role": "assistant", "content": None, "tool_calls": list(calls), "refusal": None}


def weather(city: str) -> str:
    return f"Sunny in {city}, 22C"


def plain_reply() -> dict:
    user = "What is a good name for a cat?"
    msgs = [{"role": "system", "content": SYSTEM}, {"role": "user", "content": user}]
    answer = {"role": "assistant", "content": "How about Miso? Short, sweet, and easy to call.", "refusal": None}
    return {
        "user": user,
        "tools": False,
        "exchanges": [
            {"request": enc({"model": MODEL, "messages": msgs}), "response": enc(response(1, answer, "stop", 31))},
        ],
        "final_text": answer["content"],
        "dispatched": [],
    }


def single_tool_call() -> dict:
    user = "What's the weather in Zürich?"
    call = tool_call("call_Zx1", "Zürich")
    msgs = [{"role": "system", "content": SYSTEM}, {"role": "user", "content": user}]
    first = assistant_calls(call)
    final = {"role": "assistant", "content": "It is sunny in Zürich at 22°C.", "refusal": None}
    msgs2 = msgs + [first, {"role": "tool", "content": weather("Zürich"), "tool_call_id": "call_Zx1"}]
    body = {"tools": [WEATHER_TOOL], "tool_choice": "auto"}
    return {
        "user": user,
        "tools": True,
        "exchanges": [
            {"request": enc({"model": MODEL, "messages": msgs, **body}), "response": enc(response(2, first, "tool_calls", 64))},
            {"request": enc({"model": MODEL, "messages": msgs2, **body}), "response": enc(response(3, final, "stop", 90))},
        ],
        "final_text": final["content"],
        "dispatched": [["get_weather", {"city": "Zürich"}, weather("Zürich")]],
    }


def multi_turn_loop() -> dict:
    user = "Compare the weather in Paris and Oslo, then check Rome."
    body = {"tools": [WEATHER_TOOL], "tool_choice": "auto"}
    m0 = [{"role": "system", "content": SYSTEM}, {"role": "user", "content": user}]
    a1 = assistant_calls(tool_call("call_P1", "Paris"), tool_call("call_O2", "Oslo"))
    m1 = m0 + [
        a1,
        {"role": "tool", "content": weather("Paris"), "tool_call_id": "call_P1"},
        {"role": "tool", "content": weather("Oslo"), "tool_call_id": "call_O2"},
    ]
    a2 = assistant_calls(tool_call("call_R3", "Rome"))
    m2 = m1 + [a2, {"role": "tool", "content": weather("Rome"), "tool_call_id": "call_R3"}]
    final = {"role": "assistant", "content": "All three cities are sunny at 22C today.", "refusal": None}
    return {
        "user": user,
        "tools": True,
        "exchanges": [
            {"request": enc({"model": MODEL, "messages": m0, **body}), "response": enc(response(4, a1, "tool_calls", 70))},
            {"request": enc({"model": MODEL, "messages": m1, **body}), "response": enc(response(5, a2, "tool_calls", 120))},
            {"request": enc({"model": MODEL, "messages": m2, **body}), "response": enc(response(6, final, "stop", 150))},
        ],
        "final_text": final["content"],
        "dispatched": [
            ["get_weather", {"city": "Paris"}, weather("Paris")],
            ["get_weather", {"city": "Oslo"}, weather("Oslo")],
            ["get_weather", {"city": "Rome"}, weather("Rome")],
        ],
    }


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    common = {"model": MODEL, "system": SYSTEM, "weather_tool": WEATHER_TOOL}
    for name, build in (("plain_reply", plain_reply), ("single_tool_call", single_tool_call), ("multi_turn_loop", multi_turn_loop)):
        doc = {**common, **build()}
        (OUT / f"{name}.json").write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {OUT / (name + '.json')}")


if __name__ == "__main__":
    main()
