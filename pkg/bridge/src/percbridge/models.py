"""Model registry and the method → model binder.

Three deterministic built-ins cover the protocol surface without downloads:

``scenegraph``
    Reads the answer out of scene-graph JSON instead of pixels: the image
    ref either is a scene file (or decodes to one), or has a ``.json``
    sidecar next to it.  Serves detect/ocr/depth/orientation/color.

``colorbox``
    A real pixel detector for rasterized scenes: exact palette-color
    segmentation plus connected-component bounding boxes.  Needs a config
    ``legend`` mapping category → color name.  Serves detect.

``scripted``
    A stand-in for a VLM relation judge: multiplies the attribute evidence
    the engine already computed and zeroes it when box centers contradict
    the named relation.  Deliberately cruder than the engine's geometric
    rules — it exists to exercise the cot path over the wire, not to
    duplicate the other route.  Serves cot.

Real models slot in as further registry entries with the same shape: a
``methods`` tuple, a ``from_options`` constructor, and one method per wire
method taking schema-valid params and returning the result document.
"""

from __future__ import annotations

import base64
import binascii
import io
import json
import math
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .config import BridgeConfigError, MethodBinding
from .raster import palette_color

_OCR_CONFIDENCE = 0.9
_DETECT_CONFIDENCE = 0.95
_DEFAULT_DEPTH = 1.0
_DEFAULT_ORIENTATION = 0.0
_DEFAULT_COLOR = "gray"

_SPELLING_FOLDS = {"grey": "gray", "violet": "purple"}


class ModelError(RuntimeError):
    """A model could not serve a schema-valid request; ``code`` is the wire
    error code the server should emit."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# --- image-ref resolution ---------------------------------------------------------

def _decode_base64(data: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as e:
        raise ModelError("malformed_params", f"image.base64 does not decode: {e}") from None


def load_pixels(image: Mapping[str, Any]) -> np.ndarray:
    """ImageRef → HxWx3 uint8 array."""
    if "path" in image:
        path = Path(image["path"])
        if not path.is_file():
            raise ModelError("unavailable", f"image file not found: {path}")
        source: Any = path
    else:
        source = io.BytesIO(_decode_base64(image["base64"]))
    try:
        with Image.open(source) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as e:
        raise ModelError("unavailable", f"cannot read image: {e}") from None


def _iou(a: Sequence[float], b: Sequence[float]) -> float:
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    if ix0 >= ix1 or iy0 >= iy1:
        return 0.0
    inter = (ix1 - ix0) * (iy1 - iy0)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


# --- scenegraph --------------------------------------------------------------------

def _is_box(v: Any) -> bool:
    return (
        isinstance(v, list)
        and len(v) == 4
        and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)
        and v[0] < v[2]
        and v[1] < v[3]
    )


def _parse_scene(raw: bytes | str, origin: str) -> dict:
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelError("unavailable", f"{origin}: not JSON: {e}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("objects"), list):
        raise ModelError("unavailable", f"{origin}: not scene-graph JSON (no objects list)")
    for i, obj in enumerate(doc["objects"]):
        if not isinstance(obj, dict) or not isinstance(obj.get("category"), str):
            raise ModelError("unavailable", f"{origin}: objects[{i}] has no category")
        if not _is_box(obj.get("box")):
            raise ModelError("unavailable", f"{origin}: objects[{i}].box is not an ordered box")
    for i, txt in enumerate(doc.get("texts", [])):
        if not isinstance(txt, dict) or not isinstance(txt.get("text"), str) or not _is_box(txt.get("box")):
            raise ModelError("unavailable", f"{origin}: texts[{i}] is malformed")
    return doc


class SceneGraphModel:
    """Sidecar oracle: answers come from scene JSON, not pixels."""

    methods = ("detect", "ocr", "depth", "orientation", "color")

    def __init__(self):
        self._cache: dict[Path, tuple[int, int, dict]] = {}

    @classmethod
    def from_options(cls, options: Mapping[str, Any]) -> "SceneGraphModel":
        unknown = set(options) - {"device"}
        if unknown:
            raise ValueError(f"unknown scenegraph options {sorted(unknown)}")
        return cls()

    def _scene_from_path(self, path: Path) -> dict:
        candidates = [path]
        if path.suffix.lower() != ".json":
            candidates.append(path.with_suffix(".json"))
        first_error: ModelError | None = None
        for cand in candidates:
            if not cand.is_file():
                continue
            stat = cand.stat()
            cached = self._cache.get(cand)
            if cached is not None and cached[:2] == (stat.st_mtime_ns, stat.st_size):
                return cached[2]
            try:
                scene = _parse_scene(cand.read_bytes(), str(cand))
            except ModelError as e:
                # e.g. the rendered image itself — fall through to its sidecar
                first_error = first_error or e
                continue
            self._cache[cand] = (stat.st_mtime_ns, stat.st_size, scene)
            return scene
        if first_error is not None:
            raise first_error
        tried = ", ".join(str(c) for c in candidates)
        raise ModelError("unavailable", f"no scene-graph JSON at {tried}")

    def _scene(self, image: Mapping[str, Any]) -> dict:
        if "path" in image:
            return self._scene_from_path(Path(image["path"]))
        return _parse_scene(_decode_base64(image["base64"]), "image.base64")

    def _best_object(self, scene: dict, box: Sequence[float]) -> dict | None:
        best, best_iou = None, 0.0
        for obj in scene["objects"]:
            iou = _iou(box, obj["box"])
            if iou > best_iou:
                best, best_iou = obj, iou
        return best

    def detect(self, params: Mapping[str, Any]) -> dict:
        scene = self._scene(params["image"])
        threshold = params["threshold"]
        dets = [
            {"category": params["category"], "box": list(obj["box"]), "confidence": _DETECT_CONFIDENCE}
            for obj in scene["objects"]
            if obj["category"] == params["category"]
        ]
        dets = [d for d in dets if d["confidence"] >= threshold]
        dets.sort(key=lambda d: (d["box"][0], d["box"][1]))
        return {"detections": dets}

    def ocr(self, params: Mapping[str, Any]) -> dict:
        scene = self._scene(params["image"])
        texts = [
            {"text": t["text"], "box": list(t["box"]), "confidence": _OCR_CONFIDENCE}
            for t in scene.get("texts", [])
        ]
        texts.sort(key=lambda t: (t["box"][0], t["box"][1]))
        return {"texts": texts}

    def depth(self, params: Mapping[str, Any]) -> dict:
        scene = self._scene(params["image"])
        depths = []
        for box in params["boxes"]:
            obj = self._best_object(scene, box)
            depths.append(float(obj.get("depth", _DEFAULT_DEPTH)) if obj else _DEFAULT_DEPTH)
        return {"depths": depths}

    def orientation(self, params: Mapping[str, Any]) -> dict:
        obj = self._best_object(self._scene(params["image"]), params["box"])
        degrees = float(obj.get("orientation_degrees", _DEFAULT_ORIENTATION)) if obj else _DEFAULT_ORIENTATION
        return {"degrees": degrees % 360.0}

    def color(self, params: Mapping[str, Any]) -> dict:
        obj = self._best_object(self._scene(params["image"]), params["box"])
        color = str(obj.get("color", _DEFAULT_COLOR)) if obj else _DEFAULT_COLOR
        return {"color": _SPELLING_FOLDS.get(color, color)}


# --- colorbox ----------------------------------------------------------------------

def _row_runs(row: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate(([0], row.astype(np.int8), [0]))
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def connected_boxes(mask: np.ndarray, *, min_area: int = 4) -> list[tuple[int, int, int, int, int]]:
    """4-connected components of a boolean mask via row-run union-find.

    Returns ``(px0, py0, px1, py1, area)`` per blob (inclusive pixel
    coords), sorted by top-left corner.
    """
    parent: dict[int, int] = {}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> int:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
        return ra

    labeled_runs: list[tuple[int, int, int, int]] = []  # (y, start, end, label)
    prev: list[tuple[int, int, int]] = []
    next_label = 0
    for y in range(mask.shape[0]):
        cur: list[tuple[int, int, int]] = []
        for start, end in _row_runs(mask[y]):
            label = -1
            for p_start, p_end, p_label in prev:
                if p_start < end and start < p_end:
                    label = find(p_label) if label < 0 else union(label, p_label)
            if label < 0:
                label = next_label
                parent[label] = label
                next_label += 1
            cur.append((start, end, label))
            labeled_runs.append((y, start, end, label))
        prev = cur

    blobs: dict[int, list[int]] = {}
    for y, start, end, label in labeled_runs:
        root = find(label)
        bb = blobs.get(root)
        if bb is None:
            blobs[root] = [start, y, end - 1, y, end - start]
        else:
            bb[0] = min(bb[0], start)
            bb[2] = max(bb[2], end - 1)
            bb[3] = y
            bb[4] += end - start
    out = [
        (bb[0], bb[1], bb[2], bb[3], bb[4])
        for bb in blobs.values()
        if bb[4] >= min_area
    ]
    out.sort(key=lambda b: (b[0], b[1]))
    return out


class ColorBoxModel:
    """Exact palette-color segmentation over rasterized scenes."""

    methods = ("detect",)

    def __init__(self, legend: Mapping[str, str], min_area: int = 4):
        self._legend = {cat: palette_color(color) for cat, color in legend.items()}
        self._min_area = min_area

    @classmethod
    def from_options(cls, options: Mapping[str, Any]) -> "ColorBoxModel":
        unknown = set(options) - {"legend", "min_area", "device"}
        if unknown:
            raise ValueError(f"unknown colorbox options {sorted(unknown)}")
        legend = options.get("legend")
        if not isinstance(legend, dict) or not legend:
            raise ValueError("colorbox needs a non-empty legend (category -> color name)")
        for cat, color in legend.items():
            if not isinstance(color, str):
                raise ValueError(f"legend[{cat!r}] must be a color name")
            palette_color(color)
        min_area = options.get("min_area", 4)
        if not isinstance(min_area, int) or min_area < 1:
            raise ValueError("min_area must be a positive integer")
        return cls(legend, min_area)

    def detect(self, params: Mapping[str, Any]) -> dict:
        rgb = self._legend.get(params["category"])
        if rgb is None:
            return {"detections": []}
        pixels = load_pixels(params["image"])
        height, width = pixels.shape[:2]
        mask = np.all(pixels == np.array(rgb, dtype=np.uint8), axis=-1)
        dets = []
        for px0, py0, px1, py1, area in connected_boxes(mask, min_area=self._min_area):
            fill = area / ((px1 - px0 + 1) * (py1 - py0 + 1))
            if fill < params["threshold"]:
                continue
            dets.append(
                {
                    "category": params["category"],
                    "box": [px0 / width, py0 / height, (px1 + 1) / width, (py1 + 1) / height],
                    "confidence": fill,
                }
            )
        return {"detections": dets}


# --- scripted cot ------------------------------------------------------------------

def _center(box: Sequence[float]) -> tuple[float, float]:
    return (box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0


def _half_diag(box: Sequence[float]) -> float:
    return math.hypot(box[2] - box[0], box[3] - box[1]) / 2.0


class ScriptedCotModel:
    """Deterministic stand-in for a VLM relation judge.

    Score = product of the attribute evidence in the payload, zeroed when
    the box centers contradict the named relation.  Center-only geometry —
    coarser on purpose than the engine's rule table.
    """

    methods = ("cot",)

    @classmethod
    def from_options(cls, options: Mapping[str, Any]) -> "ScriptedCotModel":
        unknown = set(options) - {"device"}
        if unknown:
            raise ValueError(f"unknown scripted options {sorted(unknown)}")
        return cls()

    def _judge(self, name: str, subject: Sequence[float], obj: Sequence[float]) -> tuple[bool, str]:
        scx, scy = _center(subject)
        ocx, ocy = _center(obj)
        if name == "left_of":
            return scx < ocx, f"subject center x {scx:.3f} vs object {ocx:.3f}"
        if name == "right_of":
            return scx > ocx, f"subject center x {scx:.3f} vs object {ocx:.3f}"
        if name == "above":
            return scy < ocy, f"subject center y {scy:.3f} vs object {ocy:.3f}"
        if name == "below":
            return scy > ocy, f"subject center y {scy:.3f} vs object {ocy:.3f}"
        if name == "on":
            lateral = abs(scx - ocx) <= ((subject[2] - subject[0]) + (obj[2] - obj[0])) / 2.0
            ok = scy < ocy and lateral
            cue = "subject rests over the object" if ok else "subject is not resting over the object"
            return ok, cue
        if name == "inside":
            contained = (
                subject[0] >= obj[0] and subject[1] >= obj[1]
                and subject[2] <= obj[2] and subject[3] <= obj[3]
            )
            return contained, "subject box is contained" if contained else "subject box extends outside the object"
        if name == "next_to":
            dist = math.hypot(scx - ocx, scy - ocy)
            near = dist <= 1.5 * (_half_diag(subject) + _half_diag(obj))
            return near, f"center distance {dist:.3f}"
        if name in ("behind", "in_front_of"):
            return True, "no depth cue in the boxes; deferring to attribute evidence"
        return True, f"unfamiliar relation {name!r}; deferring to attribute evidence"

    def cot(self, params: Mapping[str, Any]) -> dict:
        payload = params["payload"]
        name = payload["relation"]["name"]
        subject = payload["boxes"]["subject"]
        obj = payload["boxes"]["object"]
        evidence = 1.0
        for side in ("subject", "object"):
            for _, value in sorted(payload["facets"][side].items()):
                evidence *= min(1.0, max(0.0, float(value)))
        plausible, cue = self._judge(name, subject, obj)
        score = evidence if plausible else 0.0
        reasoning = f"{name}: {cue}; attribute evidence {evidence:.3f} -> score {score:.3f}"
        return {"score": score, "reasoning": reasoning}


# --- registry and binder -----------------------------------------------------------

MODEL_REGISTRY: dict[str, type] = {
    "scenegraph": SceneGraphModel,
    "colorbox": ColorBoxModel,
    "scripted": ScriptedCotModel,
}


def build_model(model_id: str, options: Mapping[str, Any], *, where: str = "") -> Any:
    cls = MODEL_REGISTRY.get(model_id)
    if cls is None:
        raise BridgeConfigError(
            f"{where}: unknown model {model_id!r} (available: {', '.join(sorted(MODEL_REGISTRY))})"
        )
    try:
        return cls.from_options(options)
    except ValueError as e:
        raise BridgeConfigError(f"{where}: {e}") from None


class MethodBinder:
    """Instantiates one model per distinct binding and routes methods.

    Identical bindings share an instance (so, e.g., every scenegraph method
    shares one sidecar cache).  Unbound methods raise a ``not_implemented``
    :class:`ModelError`; the server turns that into the wire error the
    engine maps to its fallback paths.
    """

    def __init__(self, bindings: Mapping[str, MethodBinding]):
        instances: dict[str, Any] = {}
        self._impl: dict[str, Any] = {}
        for method, binding in bindings.items():
            where = f"methods.{method}"
            key = binding.model + json.dumps(dict(binding.options), sort_keys=True)
            if key not in instances:
                instances[key] = build_model(binding.model, binding.options, where=where)
            model = instances[key]
            if method not in model.methods:
                raise BridgeConfigError(
                    f"{where}: model {binding.model!r} does not implement it "
                    f"(implements: {', '.join(model.methods)})"
                )
            self._impl[method] = model

    @property
    def methods(self) -> tuple[str, ...]:
        return tuple(sorted(self._impl))

    def dispatch(self, method: str, params: Mapping[str, Any]) -> dict:
        model = self._impl.get(method)
        if model is None:
            raise ModelError("not_implemented", f"no model bound for method {method!r}")
        return getattr(model, method)(params)
