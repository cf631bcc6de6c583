"""Canonical JSON writer shared by reports, scenes, and the wire codec.

One serialization to rule them all: dict insertion order is preserved, every
real number is written with exactly nine decimal digits, and non-finite
floats are rejected. Two equal payloads therefore always serialize to
identical bytes, which is what the determinism and transcript-replay tests
lean on.
"""

from __future__ import annotations

import json
import math
from typing import Any

FLOAT_DIGITS = 9


def fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite float cannot be serialized: {x!r}")
    s = f"{x:.{FLOAT_DIGITS}f}"
    # -0.0 and 0.0 are the same reading; never emit the sign.
    if s == f"-0.{'0' * FLOAT_DIGITS}":
        s = s[1:]
    return s


def _write(value: Any, out: list[str]) -> None:
    if value is None or value is True or value is False:
        out.append("null" if value is None else ("true" if value else "false"))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(fmt_float(value))
    elif isinstance(value, dict):
        out.append("{")
        for i, (k, v) in enumerate(value.items()):
            if not isinstance(k, str):
                raise TypeError(f"non-string key: {k!r}")
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _write(v, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            if i:
                out.append(",")
            _write(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(value: Any) -> str:
    """Serialize to compact JSON with fixed-precision reals."""
    out: list[str] = []
    _write(value, out)
    return "".join(out)


def canonical_json_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")


def round_real(x: float) -> float:
    """Quantize a real to the serialized precision.

    Values produced by generators pass through here so that a
    serialize/parse round trip is the identity.
    """
    return float(fmt_float(x))
