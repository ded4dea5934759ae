from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from edgeassist.gateway.http import create_app
from helpers import make_gateway, text_request


@pytest.fixture
def client(tmp_path):
    gw = make_gateway(tmp_path)
    with TestClient(create_app(gw)) as c:
        yield c


def test_healthz(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_interact_and_feedback(client):
    r = client.post("/v1/interact", json=text_request("turn on the lamp"))
    assert r.status_code == 200
    body = r.json()
    assert body["source_tier"] == "cloud" and body["actions"][0]["ok"]
    fb = client.post("/v1/feedback", json={"interaction_id": body["interaction_id"], "rating": 1})
    assert fb.status_code == 204 and fb.content == b""
    again = client.post("/v1/interact", json=text_request("turn on the lamp")).json()
    assert again["source_tier"] == "cache"
    stats = client.get("/v1/cache/stats").json()
    assert stats["cache"]["hits"] == 1 and stats["requests"]["cloud"] == 1


def test_error_statuses(client):
    assert client.post("/v1/interact", content=b"{not json").status_code == 400
    img = {"session_id": "s", "user_id": "u", "input": {"type": "image", "payload": ""}}
    assert client.post("/v1/interact", json=img).status_code == 422
    assert client.post("/v1/feedback", content=b"[]").status_code == 400
    assert client.post("/v1/feedback", json={"interaction_id": "ix0-00000009", "rating": 1}).status_code == 404
    r = client.post("/v1/interact", json=text_request("hi")).json()
    assert client.post("/v1/feedback", json={"interaction_id": r["interaction_id"], "rating": 2}).status_code == 400


def test_sensors_endpoint(client):
    assert isinstance(client.get("/v1/sensors").json(), dict)
