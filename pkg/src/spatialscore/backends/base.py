"""Backend interface and the perception result types it returns."""

from __future__ import annotations

import base64 as _b64
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from ..constraints import ConstraintSet
from ..errors import SchemaViolation
from ..geometry import BBox

# An image reference is {"path": "..."} or {"base64": "..."}. The fixture
# backend treats the path as a scene-graph JSON file; real backends decode
# actual image bytes.
ImageRef = dict


def path_ref(path: str) -> ImageRef:
    return {"path": str(path)}


def bytes_ref(data: bytes) -> ImageRef:
    return {"base64": _b64.b64encode(data).decode("ascii")}


def validate_image_ref(ref: object, path: str = "image") -> ImageRef:
    if not isinstance(ref, dict):
        raise SchemaViolation(path, "must be an object")
    keys = set(ref)
    if keys not in ({"path"}, {"base64"}):
        raise SchemaViolation(path, 'must have exactly one of "path" or "base64"')
    key = next(iter(keys))
    if not isinstance(ref[key], str) or not ref[key]:
        raise SchemaViolation(f"{path}.{key}", "must be a non-empty string")
    return ref


@dataclass(frozen=True, slots=True)
class Detection:
    category: str
    box: BBox
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")


@dataclass(frozen=True, slots=True)
class TextDetection:
    text: str
    box: BBox
    confidence: float

    def __post_init__(self):
        if not self.text:
            raise ValueError("text must be non-empty")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")


@dataclass(frozen=True, slots=True)
class CotReply:
    """A chain-of-thought verdict: free-text reasoning plus a score in [0,1]."""

    reasoning: str
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score out of [0,1]: {self.score}")


def sort_detections(dets: Sequence[Detection]) -> list[Detection]:
    """Deterministic order: confidence descending, then x0, then y0."""
    return sorted(dets, key=lambda d: (-d.confidence, d.box.x0, d.box.y0))


def sort_texts(dets: Sequence[TextDetection]) -> list[TextDetection]:
    return sorted(dets, key=lambda d: (-d.confidence, d.box.x0, d.box.y0))


def apply_threshold(dets: Sequence[Detection], threshold: float) -> list[Detection]:
    """Filter below-threshold detections (boundary inclusive) and sort."""
    return sort_detections([d for d in dets if d.confidence >= threshold])


@runtime_checkable
class PerceptionBackend(Protocol):
    """What the engine needs from a perception stack.

    Implementations must be deterministic for identical inputs wherever the
    underlying models allow it, and must order result lists by
    (confidence desc, x0, y0).
    """

    def handshake(self) -> dict: ...

    def detect_objects(self, image: ImageRef, category: str, threshold: float) -> list[Detection]: ...

    def recognize_text(self, image: ImageRef) -> list[TextDetection]: ...

    def estimate_depth(self, image: ImageRef, boxes: Sequence[BBox]) -> list[float]: ...

    def classify_orientation(self, image: ImageRef, box: BBox) -> float: ...

    def classify_color(self, image: ImageRef, box: BBox, category: str) -> str: ...

    def decompose(self, prompt: str) -> ConstraintSet: ...

    def cot_score(self, payload: dict) -> CotReply: ...

    def close(self) -> None: ...
