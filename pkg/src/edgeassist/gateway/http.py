"""FastAPI routes over a :class:`Gateway`."""

from __future__ import annotations

import json
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, Response
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from edgeassist.errors import BadRequest, UnknownInteraction
from edgeassist.gateway.service import Gateway


async def _json_body(request: Request):
    raw = await request.body()
    try:
        return json.loads(raw) if raw else None
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None


def create_app(gateway: Gateway, manage_lifecycle: bool = True) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        if manage_lifecycle:
            gateway.start()
        try:
            yield
        finally:
            if manage_lifecycle:
                gateway.close()

    app = FastAPI(title="edgeassist gateway", lifespan=lifespan)
    app.state.gateway = gateway

    @app.post("/v1/interact")
    async def interact(request: Request) -> JSONResponse:
        body = await _json_body(request)
        resp = await run_in_threadpool(gateway.handle_interact, body)
        return JSONResponse(resp.to_json(), status_code=resp.status)

    @app.post("/v1/feedback")
    async def feedback(request: Request) -> Response:
        body = await _json_body(request)
        if not isinstance(body, dict):
            return JSONResponse({"error": "request body must be a JSON object"}, status_code=400)
        try:
            await run_in_threadpool(gateway.handle_feedback, body.get("interaction_id"), body.get("rating"))
        except BadRequest as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        except UnknownInteraction as exc:
            return JSONResponse({"error": f"unknown interaction {exc}"}, status_code=404)
        return Response(status_code=204)

    @app.get("/v1/cache/stats")
    def cache_stats() -> dict:
        return gateway.handle_stats()

    @app.get("/v1/sensors")
    def sensors() -> dict:
        return gateway.handle_sensors()

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    return app
