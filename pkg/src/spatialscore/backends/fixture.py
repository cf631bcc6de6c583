"""Deterministic in-process backend answering from a scene graph.

The image reference's ``path`` is read as scene-graph JSON (a per-call
default scene can be supplied instead); image bytes are never touched.
All confidences are 1.0 and every reply is a pure function of the scene,
which makes this backend the test oracle for the whole engine.
"""

from __future__ import annotations

import os
from typing import Sequence

from ..constraints import CANONICAL_RELATIONS, ConstraintSet
from ..errors import BackendUnavailable
from ..geometry import BBox, center_distance, iou
from ..relations import evaluate_relation_geometric
from ..scene import SceneGraph, SceneObject, load_scene
from ..serialize import fmt_float
from .base import CotReply, Detection, TextDetection, sort_detections, sort_texts
from .wire import handshake_result, parse_wire_box

_METHODS = ("detect", "ocr", "depth", "orientation", "color", "cot")


class FixtureBackend:
    """Scene-graph oracle backend; see the module docstring."""

    def __init__(
        self,
        default_scene: SceneGraph | None = None,
        scripted_cot: dict[str, float] | None = None,
    ):
        self._default = default_scene
        # Relation name -> scripted score, for exercising the CoT path in
        # tests without a real reasoning model.
        self._scripted_cot = dict(scripted_cot or {})
        self._cache: dict[tuple[str, int], SceneGraph] = {}

    # -- scene resolution --------------------------------------------------

    def _scene(self, image: dict) -> SceneGraph:
        path = image.get("path") if isinstance(image, dict) else None
        if path and os.path.exists(path):
            key = (os.path.abspath(path), os.stat(path).st_mtime_ns)
            if key not in self._cache:
                self._cache.clear()  # scenes are small; keep at most a handful
                self._cache[key] = load_scene(path)
            return self._cache[key]
        if self._default is not None:
            return self._default
        raise BackendUnavailable(
            f"fixture backend has no scene for image ref {image!r}"
        )

    def _match(self, scene: SceneGraph, box: BBox, category: str | None = None) -> SceneObject:
        """The scene object a query box refers to: best IoU, then nearest center."""
        pool = scene.by_category(category) if category else scene.objects
        if not pool:
            pool = scene.objects
        if not pool:
            raise BackendUnavailable("fixture scene contains no objects")
        return max(pool, key=lambda o: (iou(o.box, box), -center_distance(o.box, box)))

    # -- protocol methods ----------------------------------------------------

    def handshake(self) -> dict:
        return handshake_result("parallel", "fixture", _METHODS)

    def detect_objects(self, image: dict, category: str, threshold: float) -> list[Detection]:
        scene = self._scene(image)
        dets = [
            Detection(category=o.category, box=o.box, confidence=1.0)
            for o in scene.by_category(category)
        ]
        return sort_detections([d for d in dets if d.confidence >= threshold])

    def recognize_text(self, image: dict) -> list[TextDetection]:
        scene = self._scene(image)
        return sort_texts(
            TextDetection(text=t.text, box=t.box, confidence=1.0) for t in scene.texts
        )

    def estimate_depth(self, image: dict, boxes: Sequence[BBox]) -> list[float]:
        scene = self._scene(image)
        return [self._match(scene, b).depth for b in boxes]

    def classify_orientation(self, image: dict, box: BBox) -> float:
        return self._match(self._scene(image), box).orientation_degrees

    def classify_color(self, image: dict, box: BBox, category: str) -> str:
        return self._match(self._scene(image), box, category).color

    def decompose(self, prompt: str) -> ConstraintSet:
        raise BackendUnavailable("fixture backend does not decompose prompts")

    def cot_score(self, payload: dict) -> CotReply:
        """Re-derive the geometric verdict from the payload, as a stand-in
        for a reasoning model. Non-canonical relations take the scripted
        score (default 0.5: the fixture cannot reason about them)."""
        try:
            name = payload["relation"]["name"]
            subject = parse_wire_box(payload["boxes"]["subject"], "payload.boxes.subject")
            object_ = parse_wire_box(payload["boxes"]["object"], "payload.boxes.object")
        except (KeyError, TypeError) as e:
            raise BackendUnavailable(f"fixture cot: malformed payload ({e!r})") from None

        if name not in CANONICAL_RELATIONS:
            score = self._scripted_cot.get(name, 0.5)
            return CotReply(
                reasoning=f"no geometric rule for {name!r}; scripted score", score=score
            )

        depths = None
        if name in ("behind", "in_front_of"):
            scene = self._scene(payload.get("image", {}))
            depths = (
                self._match(scene, subject).depth,
                self._match(scene, object_).depth,
            )
        score = evaluate_relation_geometric(name, subject, object_, depths)
        reasoning = (
            f"checked {name}: subject center ({fmt_float(subject.cx)}, {fmt_float(subject.cy)}), "
            f"object center ({fmt_float(object_.cx)}, {fmt_float(object_.cy)})"
            + (f", depths ({fmt_float(depths[0])}, {fmt_float(depths[1])})" if depths else "")
            + f" -> {fmt_float(score)}"
        )
        return CotReply(reasoning=reasoning, score=score)

    def close(self) -> None:
        self._cache.clear()
