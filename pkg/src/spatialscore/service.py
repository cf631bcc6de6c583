"""HTTP scoring service: the engine behind three small endpoints.

POST /v1/score takes ``{"prompt": ...}`` or ``{"constraints": {...}}`` plus
an ``"image"`` reference and returns the same canonical JSON bytes the CLI
emits for identical inputs — the response body is rendered by the exact
code path, so equality is structural, not coincidental.

GET /v1/health reports the backend as "unavailable" until the first scoring
request completes a handshake; health checks never trigger one themselves.
GET /v1/config echoes the score-relevant settings.

Request bodies are parsed by hand (no framework models) so a malformed body
produces a 400 carrying the schema path that failed.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import Response

from .backends.base import PerceptionBackend, validate_image_ref
from .backends.wire import PROTOCOL_VERSION
from .config import EngineConfig
from .errors import (
    BackendUnavailable,
    DanglingRelationId,
    SchemaViolation,
    SpatialScoreError,
    UnrecognizedTemplate,
)
from .reasoner import score_image
from .reporting import render_report_json
from .serialize import canonical_json

log = logging.getLogger(__name__)

_BODY_KEYS = {"prompt", "constraints", "image"}


def _json_bytes(payload: dict) -> bytes:
    return (canonical_json(payload) + "\n").encode("utf-8")


def _error(status: int, code: str, message: str, path: str | None = None) -> Response:
    body: dict = {"error": {"code": code, "message": message}}
    if path is not None:
        body["error"]["path"] = path
    return Response(_json_bytes(body), status_code=status, media_type="application/json")


def create_app(backend: PerceptionBackend, config: EngineConfig | None = None) -> FastAPI:
    config = config or EngineConfig()
    app = FastAPI(title="spatialscore", docs_url=None, redoc_url=None, openapi_url=None)

    request_seq = itertools.count(1)
    gate = threading.Semaphore(max(1, config.jobs))
    handshake_lock = threading.Lock()
    state = {"ready": False}

    def ensure_handshake() -> None:
        if state["ready"]:
            return
        with handshake_lock:
            if not state["ready"]:
                backend.handshake()
                state["ready"] = True

    def score_sync(body: bytes, rid: str) -> Response:
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as e:
            return _error(400, "schema_violation", f"invalid JSON: {e}", path="$")
        if not isinstance(doc, dict):
            return _error(400, "schema_violation", "body must be a JSON object", path="$")
        unknown = set(doc) - _BODY_KEYS
        if unknown:
            return _error(400, "schema_violation",
                          f"unknown fields: {sorted(unknown)}", path="$")
        has_prompt = "prompt" in doc
        has_constraints = "constraints" in doc
        if has_prompt == has_constraints:
            return _error(400, "schema_violation",
                          'exactly one of "prompt" or "constraints" is required',
                          path="$")
        if has_prompt and not isinstance(doc["prompt"], str):
            return _error(400, "schema_violation", "must be a string", path="prompt")
        source = doc["prompt"] if has_prompt else doc["constraints"]

        try:
            image = validate_image_ref(doc.get("image"))
            with gate:
                ensure_handshake()
                report = score_image(source, image, backend, config)
        except SchemaViolation as e:
            return _error(400, "schema_violation",
                          str(e).removeprefix(e.path + ": "), path=e.path)
        except UnrecognizedTemplate as e:
            return _error(400, "unrecognized_template", str(e))
        except DanglingRelationId as e:
            return _error(400, "dangling_relation_id", str(e))
        except BackendUnavailable as e:
            return _error(503, "backend_unavailable", str(e))
        except SpatialScoreError as e:
            return _error(502, "scoring_failed", f"{type(e).__name__}: {e}")
        except OSError as e:
            return _error(400, "unreadable_image", str(e))

        log.info("request %s: verdict=%s normalized=%.9f",
                 rid, report.verdict, report.normalized_total)
        return Response(render_report_json(report, config).encode("utf-8"),
                        media_type="application/json")

    @app.post("/v1/score")
    async def score(request: Request) -> Response:
        rid = f"s{next(request_seq)}"
        body = await request.body()
        return await run_in_threadpool(score_sync, body, rid)

    @app.get("/v1/health")
    def health() -> Response:
        payload = {
            "ok": True,
            "protocol_version": PROTOCOL_VERSION,
            "backend": "ready" if state["ready"] else "unavailable",
        }
        return Response(_json_bytes(payload), media_type="application/json")

    @app.get("/v1/config")
    def config_echo() -> Response:
        return Response(_json_bytes(config.echo()), media_type="application/json")

    return app
