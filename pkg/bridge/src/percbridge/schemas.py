"""Wire-protocol schemas and validators (protocol version 1).

One schema per request-params shape and one per result shape, plus the two
envelope schemas.  The bridge validates in both directions:

- incoming requests are checked before dispatch, so models only ever see
  well-formed params (violations become ``malformed_params`` envelopes);
- every outgoing response is checked before emission — an invalid result is
  replaced by an ``internal`` error rather than put on the wire.

Request-side validation is lenient where the scoring client is known to send
more than the documented minimum (``color`` params carry the requested
category); response-side validation is strict.

JSON Schema cannot express cross-field arithmetic, so box ordering
(``x0 < x1``, ``y0 < y1``) and request/response pairing rules (detect echoes
the requested category, depth returns one value per requested box) are
checked by hand after the schema pass.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from typing import Any

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

PROTOCOL_VERSION = 1

WIRE_METHODS = ("detect", "ocr", "depth", "orientation", "color", "decompose", "cot")
METHODS = ("handshake",) + WIRE_METHODS
ERROR_CODES = ("unavailable", "not_implemented", "malformed_params", "internal")
CONCURRENCY_MODES = ("single", "parallel")

COLOR_VOCAB = (
    "red", "orange", "yellow", "green", "blue", "purple",
    "pink", "brown", "black", "white", "gray",
)

CONSTRAINT_TAGS = (
    "counting", "color", "position", "orientation",
    "depth3d", "text_position", "text_count", "complex",
)


class SchemaViolation(ValueError):
    """A JSON document does not match the wire protocol."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# --- building blocks -----------------------------------------------------------

_BOX = {
    "type": "array",
    "items": {"type": "number", "minimum": 0.0, "maximum": 1.0},
    "minItems": 4,
    "maxItems": 4,
}

_IMAGE_REF = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"path": {"type": "string", "minLength": 1}},
            "required": ["path"],
            "additionalProperties": False,
        },
        {
            "properties": {"base64": {"type": "string", "minLength": 1}},
            "required": ["base64"],
            "additionalProperties": False,
        },
    ],
}

_CONFIDENCE = {"type": "number", "minimum": 0.0, "maximum": 1.0}

_DETECTION = {
    "type": "object",
    "properties": {
        "category": {"type": "string", "minLength": 1},
        "box": _BOX,
        "confidence": _CONFIDENCE,
    },
    "required": ["category", "box", "confidence"],
    "additionalProperties": False,
}

_TEXT_DETECTION = {
    "type": "object",
    "properties": {
        "text": {"type": "string"},
        "box": _BOX,
        "confidence": _CONFIDENCE,
    },
    "required": ["text", "box", "confidence"],
    "additionalProperties": False,
}

_RELATION = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "subject": {"type": "string", "minLength": 1},
        "object": {"type": "string", "minLength": 1},
    },
    "required": ["name", "subject", "object"],
    "additionalProperties": False,
}

_CONSTRAINT = {
    "type": "object",
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "category": {"type": "string", "minLength": 1},
        "count": {"type": "integer", "minimum": 1},
        "color": {"enum": list(COLOR_VOCAB)},
        "orientation": {
            "type": "object",
            "properties": {
                "degrees": {"type": "number", "minimum": 0.0, "exclusiveMaximum": 360.0},
                "mode": {"enum": ["cat8", "cont"]},
            },
            "required": ["degrees", "mode"],
            "additionalProperties": False,
        },
        "depth_rank": {"type": "integer", "minimum": 1},
        "text": {"type": "string", "minLength": 1},
        "relation": _RELATION,
    },
    "required": ["id", "category"],
    "additionalProperties": False,
}

_CONSTRAINT_SET = {
    "type": "object",
    "properties": {
        "tag": {"enum": list(CONSTRAINT_TAGS)},
        "prompt": {"type": "string"},
        "inclusions": {"type": "array", "items": _CONSTRAINT},
        "exclusions": {"type": "array", "items": _CONSTRAINT},
    },
    "required": ["tag", "prompt", "inclusions", "exclusions"],
    "additionalProperties": False,
}

_COT_PAYLOAD = {
    "type": "object",
    "properties": {
        "relation": _RELATION,
        "boxes": {
            "type": "object",
            "properties": {"subject": _BOX, "object": _BOX},
            "required": ["subject", "object"],
            "additionalProperties": False,
        },
        "facets": {
            "type": "object",
            "properties": {
                "subject": {"type": "object", "additionalProperties": {"type": "number"}},
                "object": {"type": "object", "additionalProperties": {"type": "number"}},
            },
            "required": ["subject", "object"],
            "additionalProperties": False,
        },
        "image": _IMAGE_REF,
    },
    "required": ["relation", "boxes", "facets", "image"],
    "additionalProperties": False,
}


# --- per-method params and results ----------------------------------------------

REQUEST_PARAMS: dict[str, dict] = {
    "handshake": {
        "type": "object",
        "properties": {},
        "additionalProperties": False,
    },
    "detect": {
        "type": "object",
        "properties": {
            "image": _IMAGE_REF,
            "category": {"type": "string", "minLength": 1},
            "threshold": {"type": "number", "minimum": 0.0, "maximum": 1.0},
        },
        "required": ["image", "category", "threshold"],
        "additionalProperties": False,
    },
    "ocr": {
        "type": "object",
        "properties": {"image": _IMAGE_REF},
        "required": ["image"],
        "additionalProperties": False,
    },
    "depth": {
        "type": "object",
        "properties": {
            "image": _IMAGE_REF,
            "boxes": {"type": "array", "items": _BOX, "minItems": 1},
        },
        "required": ["image", "boxes"],
        "additionalProperties": False,
    },
    "orientation": {
        "type": "object",
        "properties": {"image": _IMAGE_REF, "box": _BOX},
        "required": ["image", "box"],
        "additionalProperties": False,
    },
    # The engine sends the requested category along with the crop; the
    # protocol documents it as optional context, so accept it.
    "color": {
        "type": "object",
        "properties": {
            "image": _IMAGE_REF,
            "box": _BOX,
            "category": {"type": "string", "minLength": 1},
        },
        "required": ["image", "box"],
        "additionalProperties": False,
    },
    "decompose": {
        "type": "object",
        "properties": {"prompt": {"type": "string", "minLength": 1}},
        "required": ["prompt"],
        "additionalProperties": False,
    },
    "cot": {
        "type": "object",
        "properties": {"payload": _COT_PAYLOAD},
        "required": ["payload"],
        "additionalProperties": False,
    },
}

RESULT_SCHEMAS: dict[str, dict] = {
    "handshake": {
        "type": "object",
        "properties": {
            "protocol_version": {"const": PROTOCOL_VERSION},
            "concurrency": {"enum": list(CONCURRENCY_MODES)},
            "name": {"type": "string", "minLength": 1},
            "methods": {"type": "array", "items": {"enum": list(WIRE_METHODS)}},
        },
        "required": ["protocol_version", "concurrency", "name", "methods"],
        "additionalProperties": False,
    },
    "detect": {
        "type": "object",
        "properties": {"detections": {"type": "array", "items": _DETECTION}},
        "required": ["detections"],
        "additionalProperties": False,
    },
    "ocr": {
        "type": "object",
        "properties": {"texts": {"type": "array", "items": _TEXT_DETECTION}},
        "required": ["texts"],
        "additionalProperties": False,
    },
    "depth": {
        "type": "object",
        "properties": {
            "depths": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0.0},
            },
        },
        "required": ["depths"],
        "additionalProperties": False,
    },
    "orientation": {
        "type": "object",
        "properties": {
            "degrees": {"type": "number", "minimum": 0.0, "exclusiveMaximum": 360.0},
        },
        "required": ["degrees"],
        "additionalProperties": False,
    },
    "color": {
        "type": "object",
        "properties": {"color": {"enum": list(COLOR_VOCAB)}},
        "required": ["color"],
        "additionalProperties": False,
    },
    "decompose": {
        "type": "object",
        "properties": {"constraint_set": _CONSTRAINT_SET},
        "required": ["constraint_set"],
        "additionalProperties": False,
    },
    "cot": {
        "type": "object",
        "properties": {
            "score": {"type": "number", "minimum": 0.0, "maximum": 1.0},
            "reasoning": {"type": "string"},
        },
        "required": ["score", "reasoning"],
        "additionalProperties": False,
    },
}

REQUEST_ENVELOPE = {
    "type": "object",
    "properties": {
        "method": {"type": "string", "minLength": 1},
        "id": {"type": "string", "minLength": 1},
        "params": {"type": "object"},
    },
    "required": ["method", "id", "params"],
    "additionalProperties": False,
}

RESPONSE_ENVELOPE = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "id": {"type": "string"},
                "ok": {"const": True},
                "result": {"type": "object"},
            },
            "required": ["id", "ok", "result"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "id": {"type": "string"},
                "ok": {"const": False},
                "error": {
                    "type": "object",
                    "properties": {
                        "code": {"enum": list(ERROR_CODES)},
                        "message": {"type": "string"},
                    },
                    "required": ["code", "message"],
                    "additionalProperties": False,
                },
            },
            "required": ["id", "ok", "error"],
            "additionalProperties": False,
        },
    ],
}


def _compile(schema: dict) -> Draft202012Validator:
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


_REQUEST_ENVELOPE_V = _compile(REQUEST_ENVELOPE)
_RESPONSE_ENVELOPE_V = _compile(RESPONSE_ENVELOPE)
_PARAMS_V = {m: _compile(s) for m, s in REQUEST_PARAMS.items()}
_RESULT_V = {m: _compile(s) for m, s in RESULT_SCHEMAS.items()}


def _json_path(root: str, segments: Iterable[Any]) -> str:
    out = root
    for seg in segments:
        out += f"[{seg}]" if isinstance(seg, int) else f".{seg}"
    return out


def _run(validator: Draft202012Validator, doc: Any, root: str) -> None:
    error = best_match(validator.iter_errors(doc))
    if error is not None:
        raise SchemaViolation(_json_path(root, error.absolute_path), error.message)


# --- hand checks JSON Schema cannot express --------------------------------------

def check_box(box: Sequence[float], path: str) -> None:
    """Ordering check on an already schema-valid box."""
    x0, y0, x1, y1 = box
    if not x0 < x1:
        raise SchemaViolation(path, f"x0 must be < x1, got [{x0}, {x1}]")
    if not y0 < y1:
        raise SchemaViolation(path, f"y0 must be < y1, got [{y0}, {y1}]")


def _check_param_boxes(method: str, params: Mapping[str, Any], root: str) -> None:
    if method == "depth":
        for i, box in enumerate(params["boxes"]):
            check_box(box, f"{root}.boxes[{i}]")
    elif method in ("orientation", "color"):
        check_box(params["box"], f"{root}.box")
    elif method == "cot":
        boxes = params["payload"]["boxes"]
        check_box(boxes["subject"], f"{root}.payload.boxes.subject")
        check_box(boxes["object"], f"{root}.payload.boxes.object")


def _check_result_boxes(method: str, result: Mapping[str, Any]) -> None:
    if method == "detect":
        for i, det in enumerate(result["detections"]):
            check_box(det["box"], f"result.detections[{i}].box")
    elif method == "ocr":
        for i, det in enumerate(result["texts"]):
            check_box(det["box"], f"result.texts[{i}].box")


def _check_pairing(method: str, result: Mapping[str, Any], request_params: Mapping[str, Any]) -> None:
    if method == "detect":
        want = request_params["category"]
        for i, det in enumerate(result["detections"]):
            if det["category"] != want:
                raise SchemaViolation(
                    f"result.detections[{i}].category",
                    f"must echo the requested category {want!r}, got {det['category']!r}",
                )
    elif method == "depth":
        want, got = len(request_params["boxes"]), len(result["depths"])
        if got != want:
            raise SchemaViolation(
                "result.depths", f"expected {want} depths (one per requested box), got {got}"
            )


# --- public validators ------------------------------------------------------------

def validate_request(envelope: Any) -> tuple[str, str, dict]:
    """Envelope-level request check; returns ``(method, id, params)``.

    Whether ``method`` is known or implemented is the server's routing
    concern, not a schema question — an unknown method must produce
    ``not_implemented``, not ``malformed_params``.
    """
    _run(_REQUEST_ENVELOPE_V, envelope, "$")
    return envelope["method"], envelope["id"], envelope["params"]


def validate_params(method: str, params: Any) -> None:
    """Per-method params check (schema plus box ordering)."""
    if method not in REQUEST_PARAMS:
        raise SchemaViolation("$.method", f"unknown method {method!r}")
    _run(_PARAMS_V[method], params, "params")
    _check_param_boxes(method, params, "params")


def validate_response(
    envelope: Any,
    *,
    method: str | None = None,
    request_params: Mapping[str, Any] | None = None,
) -> None:
    """Full response check: envelope, per-method result shape, box ordering,
    and (when the request is supplied) request/response pairing rules."""
    _run(_RESPONSE_ENVELOPE_V, envelope, "$")
    if not envelope["ok"]:
        return
    if method is None:
        return
    if method not in RESULT_SCHEMAS:
        raise SchemaViolation("$.method", f"unknown method {method!r}")
    result = envelope["result"]
    _run(_RESULT_V[method], result, "result")
    _check_result_boxes(method, result)
    if request_params is not None:
        _check_pairing(method, result, request_params)
