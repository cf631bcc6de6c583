"""Wire codec for the perception protocol.

Envelope shapes (one JSON object per line over pipes, the same object as an
HTTP POST body):

    request:  {"method": str, "id": str, "params": {...}}
    response: {"id": str, "ok": true,  "result": {...}}
              {"id": str, "ok": false, "error": {"code": str, "message": str}}

This module owns both directions: building/validating envelopes and
converting between wire dicts and the typed results in
:mod:`spatialscore.backends.base`. Every validation failure carries the
schema path of the offending field.
"""

from __future__ import annotations

import json
import logging
import math
from typing import Sequence

from ..errors import BackendUnavailable, MalformedResponse, SchemaViolation, UnparseableScore
from ..geometry import BBox
from .base import CotReply, Detection, TextDetection, validate_image_ref

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1

METHODS = (
    "handshake",
    "detect",
    "ocr",
    "depth",
    "orientation",
    "color",
    "decompose",
    "cot",
)

# HTTP transport posts the same envelope to one path per method.
METHOD_PATHS = {m: f"/v1/{m}" for m in METHODS}

CONCURRENCY_MODES = ("single", "parallel")

# Error codes a backend may emit; anything else is treated like "internal".
ERROR_CODES = ("unavailable", "not_implemented", "malformed_params", "internal")


# --- envelopes ----------------------------------------------------------------

def encode_request(method: str, req_id: str, params: dict) -> dict:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    return {"method": method, "id": req_id, "params": params}


def ok_response(req_id: str, result: dict) -> dict:
    return {"id": req_id, "ok": True, "result": result}


def error_response(req_id: str, code: str, message: str) -> dict:
    return {"id": req_id, "ok": False, "error": {"code": code, "message": message}}


def decode_line(line: str | bytes) -> dict:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedResponse("$", f"invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise MalformedResponse("$", "envelope must be an object")
    return doc


def validate_request(doc: dict) -> tuple[str, str, dict]:
    """Server-side request check; returns (method, id, params)."""
    if not isinstance(doc.get("id"), str) or not doc["id"]:
        raise MalformedResponse("id", "must be a non-empty string")
    method = doc.get("method")
    if method not in METHODS:
        raise MalformedResponse("method", f"unknown method {method!r}")
    params = doc.get("params")
    if not isinstance(params, dict):
        raise MalformedResponse("params", "must be an object")
    extra = set(doc) - {"method", "id", "params"}
    if extra:
        raise MalformedResponse("$", f"unknown envelope fields: {sorted(extra)}")
    return method, doc["id"], params


def unwrap_response(doc: dict, expect_id: str) -> dict:
    """Client-side envelope check; returns the result object.

    ``ok: false`` raises :class:`BackendUnavailable` carrying the backend's
    error code and message.
    """
    if doc.get("id") != expect_id:
        raise MalformedResponse("id", f"expected {expect_id!r}, got {doc.get('id')!r}")
    ok = doc.get("ok")
    if not isinstance(ok, bool):
        raise MalformedResponse("ok", "must be a boolean")
    if not ok:
        err = doc.get("error")
        if not isinstance(err, dict) or not isinstance(err.get("message"), str) \
                or not isinstance(err.get("code"), str):
            raise MalformedResponse("error", "must be {code, message}")
        raise BackendUnavailable(f"backend error [{err['code']}]: {err['message']}")
    result = doc.get("result")
    if not isinstance(result, dict):
        raise MalformedResponse("result", "must be an object")
    return result


# --- scalar field helpers -----------------------------------------------------

def _num(value: object, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedResponse(path, f"must be a number, got {type(value).__name__}")
    if math.isnan(value) or math.isinf(value):
        raise MalformedResponse(path, "must be finite")
    return float(value)


def _str(value: object, path: str) -> str:
    if not isinstance(value, str):
        raise MalformedResponse(path, f"must be a string, got {type(value).__name__}")
    return value


def parse_wire_box(value: object, path: str) -> BBox:
    if not isinstance(value, list) or len(value) != 4:
        raise MalformedResponse(path, "must be a 4-element [x0,y0,x1,y1] list")
    coords = [_num(v, f"{path}[{i}]") for i, v in enumerate(value)]
    try:
        return BBox(*coords)
    except ValueError as e:
        raise MalformedResponse(path, str(e)) from None


# --- per-method result parsing (client side) ----------------------------------

def parse_handshake(result: dict) -> dict:
    version = result.get("protocol_version")
    if version != PROTOCOL_VERSION:
        raise MalformedResponse(
            "result.protocol_version",
            f"expected {PROTOCOL_VERSION}, got {version!r}",
        )
    mode = result.get("concurrency")
    if mode not in CONCURRENCY_MODES:
        raise MalformedResponse(
            "result.concurrency", f"must be one of {CONCURRENCY_MODES}, got {mode!r}"
        )
    return result


def parse_detections(result: dict) -> list[Detection]:
    entries = result.get("detections")
    if not isinstance(entries, list):
        raise MalformedResponse("result.detections", "must be a list")
    out: list[Detection] = []
    for i, entry in enumerate(entries):
        path = f"result.detections[{i}]"
        if not isinstance(entry, dict):
            raise MalformedResponse(path, "must be an object")
        try:
            out.append(Detection(
                category=_str(entry.get("category"), f"{path}.category"),
                box=parse_wire_box(entry.get("box"), f"{path}.box"),
                confidence=_num(entry.get("confidence"), f"{path}.confidence"),
            ))
        except ValueError as e:
            raise MalformedResponse(f"{path}.confidence", str(e)) from None
    return out


def parse_texts(result: dict) -> list[TextDetection]:
    entries = result.get("texts")
    if not isinstance(entries, list):
        raise MalformedResponse("result.texts", "must be a list")
    out: list[TextDetection] = []
    for i, entry in enumerate(entries):
        path = f"result.texts[{i}]"
        if not isinstance(entry, dict):
            raise MalformedResponse(path, "must be an object")
        text = _str(entry.get("text"), f"{path}.text")
        if not text:
            raise MalformedResponse(f"{path}.text", "must be non-empty")
        try:
            out.append(TextDetection(
                text=text,
                box=parse_wire_box(entry.get("box"), f"{path}.box"),
                confidence=_num(entry.get("confidence"), f"{path}.confidence"),
            ))
        except ValueError as e:
            raise MalformedResponse(f"{path}.confidence", str(e)) from None
    return out


def parse_depths(result: dict, expect_n: int) -> list[float]:
    entries = result.get("depths")
    if not isinstance(entries, list):
        raise MalformedResponse("result.depths", "must be a list")
    if len(entries) != expect_n:
        raise MalformedResponse(
            "result.depths", f"expected {expect_n} values, got {len(entries)}"
        )
    out: list[float] = []
    for i, v in enumerate(entries):
        depth = _num(v, f"result.depths[{i}]")
        if depth <= 0:
            raise MalformedResponse(f"result.depths[{i}]", f"must be > 0, got {depth}")
        out.append(depth)
    return out


def parse_orientation(result: dict) -> float:
    degrees = _num(result.get("degrees"), "result.degrees")
    if not (0.0 <= degrees < 360.0):
        raise MalformedResponse("result.degrees", f"must be in [0, 360), got {degrees}")
    return degrees


def parse_color(result: dict) -> str:
    color = _str(result.get("color"), "result.color")
    if not color:
        raise MalformedResponse("result.color", "must be non-empty")
    return color


def parse_decompose(result: dict) -> dict:
    constraints = result.get("constraints")
    if not isinstance(constraints, dict):
        raise MalformedResponse("result.constraints", "must be an object")
    return constraints


def parse_cot(result: dict) -> CotReply:
    """Parse a chain-of-thought reply.

    Documented leniency: a numeric string score (e.g. ``"1.0"``) is accepted,
    and out-of-range scores are clamped into [0,1] with a logged warning.
    A missing or non-numeric score raises :class:`UnparseableScore`.
    """
    if "score" not in result:
        raise UnparseableScore("cot reply has no score field")
    raw = result["score"]
    if isinstance(raw, bool):
        raise UnparseableScore(f"cot score is not numeric: {raw!r}")
    if isinstance(raw, str):
        try:
            score = float(raw)
        except ValueError:
            raise UnparseableScore(f"cot score is not numeric: {raw!r}") from None
        log.warning("cot score arrived as string %r; parsed leniently", raw)
    elif isinstance(raw, (int, float)):
        score = float(raw)
    else:
        raise UnparseableScore(f"cot score is not numeric: {raw!r}")
    if math.isnan(score):
        raise UnparseableScore("cot score is NaN")
    if score < 0.0 or score > 1.0:
        clamped = min(max(score, 0.0), 1.0)
        log.warning("cot score %s outside [0,1]; clamped to %s", score, clamped)
        score = clamped
    reasoning = result.get("reasoning", "")
    if not isinstance(reasoning, str):
        raise MalformedResponse("result.reasoning", "must be a string")
    return CotReply(reasoning=reasoning, score=score)


# --- wire building (server side) ----------------------------------------------

def detections_to_wire(dets: Sequence[Detection]) -> dict:
    return {
        "detections": [
            {"category": d.category, "box": d.box.to_list(), "confidence": d.confidence}
            for d in dets
        ]
    }


def texts_to_wire(texts: Sequence[TextDetection]) -> dict:
    return {
        "texts": [
            {"text": t.text, "box": t.box.to_list(), "confidence": t.confidence}
            for t in texts
        ]
    }


def depths_to_wire(depths: Sequence[float]) -> dict:
    return {"depths": list(depths)}


def orientation_to_wire(degrees: float) -> dict:
    return {"degrees": degrees}


def color_to_wire(color: str) -> dict:
    return {"color": color}


def cot_to_wire(reply: CotReply) -> dict:
    return {"reasoning": reply.reasoning, "score": reply.score}


def handshake_result(concurrency: str, name: str, methods: Sequence[str]) -> dict:
    if concurrency not in CONCURRENCY_MODES:
        raise ValueError(f"bad concurrency mode {concurrency!r}")
    return {
        "protocol_version": PROTOCOL_VERSION,
        "concurrency": concurrency,
        "name": name,
        "methods": list(methods),
    }


# --- per-method request params ------------------------------------------------

def detect_params(image: dict, category: str, threshold: float) -> dict:
    return {"image": image, "category": category, "threshold": threshold}


def ocr_params(image: dict) -> dict:
    return {"image": image}


def depth_params(image: dict, boxes: Sequence[BBox]) -> dict:
    return {"image": image, "boxes": [b.to_list() for b in boxes]}


def orientation_params(image: dict, box: BBox) -> dict:
    return {"image": image, "box": box.to_list()}


def color_params(image: dict, box: BBox, category: str) -> dict:
    return {"image": image, "box": box.to_list(), "category": category}


def decompose_params(prompt: str) -> dict:
    return {"prompt": prompt}


def cot_params(payload: dict) -> dict:
    return {"payload": payload}


def validate_detect_params(params: dict) -> tuple[dict, str, float]:
    """Server-side parameter check for the detect method."""
    try:
        image = validate_image_ref(params.get("image"), "params.image")
    except SchemaViolation as e:
        raise MalformedResponse(e.path, str(e).removeprefix(e.path + ": ")) from None
    category = _str(params.get("category"), "params.category")
    threshold = _num(params.get("threshold"), "params.threshold")
    if not (0.0 <= threshold <= 1.0):
        raise MalformedResponse("params.threshold", f"must be in [0,1], got {threshold}")
    return image, category, threshold
