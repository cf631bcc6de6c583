"""Protocol server: envelope handling plus the stdio and HTTP transports.

Every response goes through the same funnel regardless of transport:
``handle_request`` validates the envelope, routes to the bound model,
clamps confidence values into ``[0, 1]``, and validates the outgoing
envelope against the wire schemas before it is emitted.  A model result
that fails validation never reaches the wire — it is replaced by an
``internal`` error envelope.

Error-code policy: a structurally bad envelope or params document is
``malformed_params``; a method the protocol does not know, or one with no
model bound, is ``not_implemented`` (the scoring engine maps it to its
fallback paths); a model that cannot serve an otherwise valid call —
missing file, undecodable image — reports through :class:`ModelError`;
anything unexpected is ``internal``.

With ``concurrency: "single"`` (the default) a lock serializes model
dispatch even on the threaded HTTP transport; the handshake advertises
whichever mode the config declares.
"""

from __future__ import annotations

import contextlib
import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Mapping, TextIO

from .config import BridgeConfig, default_bridge_config
from .models import MethodBinder, ModelError
from .schemas import (
    PROTOCOL_VERSION,
    WIRE_METHODS,
    SchemaViolation,
    validate_params,
    validate_request,
    validate_response,
)


def dumps_envelope(envelope: Mapping[str, Any]) -> str:
    """Canonical single-line rendering used on every transport and in
    recorded transcripts (sorted keys, no whitespace)."""
    return json.dumps(envelope, sort_keys=True, separators=(",", ":"))


def clamp_confidences(doc: Any) -> Any:
    """Copy of ``doc`` with every numeric ``confidence`` value clamped to
    [0, 1] — applied to each result before emission."""
    if isinstance(doc, dict):
        return {
            key: (
                min(1.0, max(0.0, value))
                if key == "confidence" and isinstance(value, (int, float)) and not isinstance(value, bool)
                else clamp_confidences(value)
            )
            for key, value in doc.items()
        }
    if isinstance(doc, list):
        return [clamp_confidences(v) for v in doc]
    return doc


class BridgeServer:
    def __init__(self, config: BridgeConfig | None = None, binder: MethodBinder | None = None):
        self.config = config if config is not None else default_bridge_config()
        self._binder = binder if binder is not None else MethodBinder(self.config.bindings)
        self._gate = (
            threading.Lock() if self.config.concurrency == "single" else contextlib.nullcontext()
        )

    def handshake_result(self) -> dict:
        return {
            "protocol_version": PROTOCOL_VERSION,
            "concurrency": self.config.concurrency,
            "name": self.config.name,
            "methods": list(self._binder.methods),
        }

    def _error(self, rid: str, code: str, message: str) -> dict:
        envelope = {"id": rid, "ok": False, "error": {"code": code, "message": message}}
        validate_response(envelope)  # a failure here is a bridge bug, not a model bug
        return envelope

    def _finish(self, rid: str, method: str, params: Mapping[str, Any], result: dict) -> dict:
        envelope = {"id": rid, "ok": True, "result": clamp_confidences(result)}
        try:
            validate_response(envelope, method=method, request_params=params)
        except SchemaViolation as e:
            return self._error(rid, "internal", f"model response failed protocol validation: {e}")
        return envelope

    def handle_request(self, envelope: Any) -> dict:
        rid = envelope.get("id") if isinstance(envelope, dict) else None
        rid = rid if isinstance(rid, str) else ""
        try:
            method, rid, params = validate_request(envelope)
        except SchemaViolation as e:
            return self._error(rid, "malformed_params", str(e))
        if method != "handshake" and method not in WIRE_METHODS:
            return self._error(rid, "not_implemented", f"unknown method {method!r}")
        try:
            validate_params(method, params)
        except SchemaViolation as e:
            return self._error(rid, "malformed_params", str(e))
        if method == "handshake":
            return self._finish(rid, method, params, self.handshake_result())
        try:
            with self._gate:
                result = self._binder.dispatch(method, params)
        except ModelError as e:
            return self._error(rid, e.code, str(e))
        except Exception as e:  # a model bug must not kill the transport
            return self._error(rid, "internal", f"{type(e).__name__}: {e}")
        return self._finish(rid, method, params, result)

    def handle_line(self, line: str) -> str:
        try:
            envelope = json.loads(line)
        except json.JSONDecodeError as e:
            return dumps_envelope(self._error("", "malformed_params", f"request is not valid JSON: {e}"))
        return dumps_envelope(self.handle_request(envelope))


def serve_stdio(
    config: BridgeConfig | None = None,
    *,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
) -> int:
    """One request per line in, one response per line out, until EOF."""
    bridge = BridgeServer(config)
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(bridge.handle_line(line) + "\n")
        stdout.flush()
    return 0


class _BridgeHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], bridge: BridgeServer):
        super().__init__(address, _BridgeHTTPHandler)
        self.bridge = bridge


class _BridgeHTTPHandler(BaseHTTPRequestHandler):
    server: _BridgeHTTPServer

    def log_message(self, format: str, *args: Any) -> None:  # keep the wire quiet
        pass

    def _respond(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        self._respond(405, b'{"error": "POST envelopes to /v1/<method>"}')

    def do_POST(self) -> None:
        if not self.path.startswith("/v1/") or "/" in self.path[4:]:
            self._respond(404, b'{"error": "unknown path; POST to /v1/<method>"}')
            return
        endpoint_method = self.path[4:]
        bridge = self.server.bridge
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = 0
        raw = self.rfile.read(length)
        try:
            envelope = json.loads(raw)
        except json.JSONDecodeError as e:
            response = bridge._error("", "malformed_params", f"request is not valid JSON: {e}")
        else:
            if isinstance(envelope, dict) and envelope.get("method") != endpoint_method:
                rid = envelope.get("id")
                response = bridge._error(
                    rid if isinstance(rid, str) else "",
                    "malformed_params",
                    f"envelope method {envelope.get('method')!r} does not match endpoint /v1/{endpoint_method}",
                )
            else:
                response = bridge.handle_request(envelope)
        self._respond(200, dumps_envelope(response).encode("utf-8"))


def make_http_server(
    config: BridgeConfig | None = None,
    *,
    host: str = "127.0.0.1",
    port: int = 0,
) -> _BridgeHTTPServer:
    """Bound but not yet serving — callers run ``serve_forever`` themselves
    (tests bind port 0 and read back the allocated port)."""
    return _BridgeHTTPServer((host, port), BridgeServer(config))


def serve_http(config: BridgeConfig | None = None, *, host: str = "127.0.0.1", port: int = 8591) -> int:
    httpd = make_http_server(config, host=host, port=port)
    address = httpd.server_address
    print(f"percbridge: serving on http://{address[0]}:{address[1]}/v1/<method>", file=sys.stderr)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0
