"""Serve any in-process backend over the stdio wire protocol.

Runs the newline-delimited JSON loop on stdin/stdout, which turns the
fixture backend into a real child-process backend for transport tests:

    python -m spatialscore.backends.stdio_server --scene scene.json

Logs go to stderr; stdout carries protocol frames only.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import BinaryIO, Callable

from ..constraints import constraint_set_to_dict
from ..errors import BackendUnavailable, MalformedResponse, SpatialScoreError
from ..scene import load_scene
from ..serialize import canonical_json
from . import wire
from .base import PerceptionBackend, validate_image_ref
from .fixture import FixtureBackend

log = logging.getLogger(__name__)


def _image(params: dict) -> dict:
    try:
        return validate_image_ref(params.get("image"), "params.image")
    except SpatialScoreError as e:
        raise MalformedResponse("params.image", str(e)) from None


def _boxes(params: dict):
    raw = params.get("boxes")
    if not isinstance(raw, list):
        raise MalformedResponse("params.boxes", "must be a list")
    return [wire.parse_wire_box(b, f"params.boxes[{i}]") for i, b in enumerate(raw)]


def _handle_handshake(backend: PerceptionBackend, params: dict) -> dict:
    return backend.handshake()


def _handle_detect(backend: PerceptionBackend, params: dict) -> dict:
    image, category, threshold = wire.validate_detect_params(params)
    return wire.detections_to_wire(backend.detect_objects(image, category, threshold))


def _handle_ocr(backend: PerceptionBackend, params: dict) -> dict:
    return wire.texts_to_wire(backend.recognize_text(_image(params)))


def _handle_depth(backend: PerceptionBackend, params: dict) -> dict:
    return wire.depths_to_wire(backend.estimate_depth(_image(params), _boxes(params)))


def _handle_orientation(backend: PerceptionBackend, params: dict) -> dict:
    box = wire.parse_wire_box(params.get("box"), "params.box")
    return wire.orientation_to_wire(backend.classify_orientation(_image(params), box))


def _handle_color(backend: PerceptionBackend, params: dict) -> dict:
    box = wire.parse_wire_box(params.get("box"), "params.box")
    category = params.get("category")
    if not isinstance(category, str) or not category:
        raise MalformedResponse("params.category", "must be a non-empty string")
    return wire.color_to_wire(backend.classify_color(_image(params), box, category))


def _handle_decompose(backend: PerceptionBackend, params: dict) -> dict:
    prompt = params.get("prompt")
    if not isinstance(prompt, str) or not prompt:
        raise MalformedResponse("params.prompt", "must be a non-empty string")
    return {"constraints": constraint_set_to_dict(backend.decompose(prompt))}


def _handle_cot(backend: PerceptionBackend, params: dict) -> dict:
    payload = params.get("payload")
    if not isinstance(payload, dict):
        raise MalformedResponse("params.payload", "must be an object")
    return wire.cot_to_wire(backend.cot_score(payload))


_HANDLERS: dict[str, Callable[[PerceptionBackend, dict], dict]] = {
    "handshake": _handle_handshake,
    "detect": _handle_detect,
    "ocr": _handle_ocr,
    "depth": _handle_depth,
    "orientation": _handle_orientation,
    "color": _handle_color,
    "decompose": _handle_decompose,
    "cot": _handle_cot,
}


def handle_request(backend: PerceptionBackend, doc: dict) -> dict:
    req_id = doc.get("id")
    if not isinstance(req_id, str) or not req_id:
        return wire.error_response("", "malformed_params", "id: must be a non-empty string")
    params = doc.get("params")
    if not isinstance(params, dict):
        return wire.error_response(req_id, "malformed_params", "params: must be an object")
    handler = _HANDLERS.get(doc.get("method"))
    if handler is None:
        return wire.error_response(
            req_id, "not_implemented", f"unknown method {doc.get('method')!r}"
        )
    try:
        return wire.ok_response(req_id, handler(backend, params))
    except MalformedResponse as e:
        return wire.error_response(req_id, "malformed_params", str(e))
    except BackendUnavailable as e:
        return wire.error_response(req_id, "unavailable", str(e))
    except SpatialScoreError as e:
        return wire.error_response(req_id, "internal", str(e))
    except Exception as e:  # pragma: no cover - defensive catch-all
        log.exception("handler crashed")
        return wire.error_response(req_id, "internal", f"{type(e).__name__}: {e}")


def serve(backend: PerceptionBackend, stdin: BinaryIO, stdout: BinaryIO) -> None:
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            doc = wire.decode_line(line)
        except MalformedResponse as e:
            response = wire.error_response("", "malformed_params", str(e))
        else:
            response = handle_request(backend, doc)
        stdout.write(canonical_json(response).encode("utf-8") + b"\n")
        stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spatialscore-fixture-server",
        description="serve a fixture backend over stdio",
    )
    parser.add_argument("--scene", help="default scene-graph JSON file")
    parser.add_argument(
        "--cot",
        action="append",
        default=[],
        metavar="NAME=SCORE",
        help="scripted CoT score for a non-canonical relation (repeatable)",
    )
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO)

    scripted: dict[str, float] = {}
    for entry in args.cot:
        name, sep, value = entry.partition("=")
        if not sep:
            parser.error(f"--cot expects NAME=SCORE, got {entry!r}")
        scripted[name] = float(value)

    backend = FixtureBackend(
        default_scene=load_scene(args.scene) if args.scene else None,
        scripted_cot=scripted,
    )
    serve(backend, sys.stdin.buffer, sys.stdout.buffer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
