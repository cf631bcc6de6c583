"""Symbolic scene graphs: the ground truth behind the fixture backend.

A scene graph stands in for an image. Objects carry category, box, color,
orientation and depth; texts carry a string and a box. The fixture backend
answers every perception query straight from this structure, which keeps
the whole engine testable without touching pixels.

Depth convention: larger value = farther from the camera (rank 1 = nearest).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemaViolation
from .geometry import BBox
from .serialize import canonical_json

_OBJECT_KEYS = {"id", "category", "box", "color", "orientation_degrees", "depth"}
_TEXT_KEYS = {"text", "box"}
_SCENE_KEYS = {"seed", "objects", "texts"}


@dataclass(frozen=True, slots=True)
class SceneObject:
    id: str
    category: str
    box: BBox
    color: str
    orientation_degrees: float
    depth: float

    def __post_init__(self):
        if not self.id:
            raise SchemaViolation("objects[].id", "must be non-empty")
        if not self.category:
            raise SchemaViolation("objects[].category", "must be non-empty")
        if not (0.0 <= self.orientation_degrees < 360.0):
            raise SchemaViolation(
                "objects[].orientation_degrees",
                f"must be in [0, 360), got {self.orientation_degrees}",
            )
        if not self.depth > 0:
            raise SchemaViolation("objects[].depth", f"must be > 0, got {self.depth}")


@dataclass(frozen=True, slots=True)
class SceneText:
    text: str
    box: BBox

    def __post_init__(self):
        if not self.text:
            raise SchemaViolation("texts[].text", "must be non-empty")


@dataclass(frozen=True, slots=True)
class SceneGraph:
    seed: int
    objects: tuple[SceneObject, ...] = ()
    texts: tuple[SceneText, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "texts", tuple(self.texts))
        seen: set[str] = set()
        for obj in self.objects:
            if obj.id in seen:
                raise SchemaViolation("objects[].id", f"duplicate id {obj.id!r}")
            seen.add(obj.id)

    def by_category(self, category: str) -> tuple[SceneObject, ...]:
        return tuple(o for o in self.objects if o.category == category)


def scene_to_dict(scene: SceneGraph) -> dict:
    return {
        "seed": scene.seed,
        "objects": [
            {
                "id": o.id,
                "category": o.category,
                "box": o.box.to_list(),
                "color": o.color,
                "orientation_degrees": o.orientation_degrees,
                "depth": o.depth,
            }
            for o in scene.objects
        ],
        "texts": [{"text": t.text, "box": t.box.to_list()} for t in scene.texts],
    }


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise SchemaViolation(path, message)


def _parse_box(value: object, path: str) -> BBox:
    _require(isinstance(value, list) and len(value) == 4, path, "must be a 4-element list")
    _require(all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value),
             path, "coordinates must be numbers")
    try:
        return BBox(*[float(v) for v in value])
    except ValueError as e:
        raise SchemaViolation(path, str(e)) from None


def scene_from_dict(doc: object) -> SceneGraph:
    _require(isinstance(doc, dict), "$", "must be an object")
    unknown = set(doc) - _SCENE_KEYS
    _require(not unknown, "$", f"unknown fields: {sorted(unknown)}")
    _require(isinstance(doc.get("seed"), int) and not isinstance(doc.get("seed"), bool),
             "seed", "must be an integer")

    objects: list[SceneObject] = []
    for i, entry in enumerate(doc.get("objects", [])):
        path = f"objects[{i}]"
        _require(isinstance(entry, dict), path, "must be an object")
        unknown = set(entry) - _OBJECT_KEYS
        _require(not unknown, path, f"unknown fields: {sorted(unknown)}")
        for key in _OBJECT_KEYS:
            _require(key in entry, f"{path}.{key}", "required")
        _require(isinstance(entry["id"], str), f"{path}.id", "must be a string")
        _require(isinstance(entry["category"], str), f"{path}.category", "must be a string")
        _require(isinstance(entry["color"], str), f"{path}.color", "must be a string")
        for key in ("orientation_degrees", "depth"):
            v = entry[key]
            _require(isinstance(v, (int, float)) and not isinstance(v, bool),
                     f"{path}.{key}", "must be a number")
        try:
            objects.append(SceneObject(
                id=entry["id"],
                category=entry["category"],
                box=_parse_box(entry["box"], f"{path}.box"),
                color=entry["color"],
                orientation_degrees=float(entry["orientation_degrees"]),
                depth=float(entry["depth"]),
            ))
        except SchemaViolation as e:
            if e.path.startswith("objects[]."):
                msg = str(e).removeprefix(e.path + ": ")
                raise SchemaViolation(path + e.path.removeprefix("objects[]"), msg) from None
            raise

    texts: list[SceneText] = []
    for i, entry in enumerate(doc.get("texts", [])):
        path = f"texts[{i}]"
        _require(isinstance(entry, dict), path, "must be an object")
        unknown = set(entry) - _TEXT_KEYS
        _require(not unknown, path, f"unknown fields: {sorted(unknown)}")
        _require(isinstance(entry.get("text"), str) and entry["text"], f"{path}.text",
                 "must be a non-empty string")
        texts.append(SceneText(text=entry["text"], box=_parse_box(entry.get("box"), f"{path}.box")))

    return SceneGraph(seed=doc["seed"], objects=tuple(objects), texts=tuple(texts))


def dump_scene(scene: SceneGraph, path: str | Path) -> None:
    """Write canonical scene JSON; identical scenes produce identical bytes."""
    Path(path).write_text(canonical_json(scene_to_dict(scene)) + "\n", encoding="utf-8")


def load_scene(path: str | Path) -> SceneGraph:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaViolation("$", f"cannot read scene file {path}: {e}") from None
    return scene_from_dict(doc)
