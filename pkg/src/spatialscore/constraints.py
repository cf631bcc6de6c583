"""Structured constraint sets parsed from prompts.

A :class:`ConstraintSet` carries an evaluation tag plus ordered inclusion
and exclusion constraints. Each :class:`AtomicConstraint` names an object
category and optionally pins a count, color, orientation, depth rank,
rendered text, or a spatial relation to another entity.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from enum import Enum

from .errors import DanglingRelationId, SchemaViolation

COLOR_VOCAB = (
    "red", "orange", "yellow", "green", "blue", "purple",
    "pink", "brown", "black", "white", "gray",
)

COLOR_SYNONYMS = {"grey": "gray", "violet": "purple"}

CANONICAL_RELATIONS = (
    "left_of", "right_of", "above", "below", "on",
    "inside", "next_to", "behind", "in_front_of",
)

ORIENTATION_MODES = ("cat8", "cont")


class Tag(str, Enum):
    COUNTING = "counting"
    COLOR = "color"
    POSITION = "position"
    ORIENTATION = "orientation"
    DEPTH3D = "depth3d"
    TEXT_POSITION = "text_position"
    TEXT_COUNT = "text_count"
    COMPLEX = "complex"
    SINGLE_OBJECT = "single_object"
    TWO_OBJECT = "two_object"


def normalize_color(name: str) -> str:
    """Lowercase and map synonyms onto the fixed 11-color vocabulary."""
    low = name.strip().lower()
    return COLOR_SYNONYMS.get(low, low)


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True, slots=True)
class RelationSpec:
    """A spatial relation between two entities of the same constraint set.

    ``name`` is one of :data:`CANONICAL_RELATIONS` or free text, in which
    case only the chain-of-thought path can score it.
    """

    name: str
    subject: str
    object: str

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise SchemaViolation("relation.name", "must be non-empty")
        if self.subject == self.object:
            raise SchemaViolation("relation", "subject and object ids must differ")

    @property
    def is_canonical(self) -> bool:
        return self.name in CANONICAL_RELATIONS


@dataclass(frozen=True, slots=True)
class OrientationTarget:
    degrees: float
    mode: str = "cat8"

    def __post_init__(self):
        if not 0.0 <= self.degrees < 360.0:
            raise SchemaViolation("orientation.degrees", f"{self.degrees} outside [0, 360)")
        if self.mode not in ORIENTATION_MODES:
            raise SchemaViolation("orientation.mode", f"must be one of {ORIENTATION_MODES}")


@dataclass(frozen=True, slots=True)
class AtomicConstraint:
    """One entity with its required facets. A constraint with no facet set
    is a pure presence check."""

    entity_id: str
    category: str
    count_target: int | None = None
    color_target: str | None = None
    orientation_target: OrientationTarget | None = None
    depth_rank_target: int | None = None
    text_target: str | None = None
    relation: RelationSpec | None = None

    def __post_init__(self):
        if not self.entity_id:
            raise SchemaViolation("id", "must be non-empty")
        if not self.category or not self.category.strip():
            raise SchemaViolation("category", "must be non-empty after whitespace normalization")
        if self.count_target is not None and self.count_target < 1:
            raise SchemaViolation("count", f"must be >= 1, got {self.count_target}")
        if self.depth_rank_target is not None and self.depth_rank_target < 1:
            raise SchemaViolation("depth_rank", f"must be >= 1, got {self.depth_rank_target}")
        if self.text_target is not None and self.text_target == "":
            raise SchemaViolation("text", "must be non-empty when present")

    @property
    def is_pure_presence(self) -> bool:
        return all(
            v is None
            for v in (
                self.count_target, self.color_target, self.orientation_target,
                self.depth_rank_target, self.text_target, self.relation,
            )
        )


@dataclass(frozen=True, slots=True)
class ConstraintSet:
    tag: Tag
    inclusions: tuple[AtomicConstraint, ...]
    exclusions: tuple[AtomicConstraint, ...] = ()
    source_prompt: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inclusions", tuple(self.inclusions))
        object.__setattr__(self, "exclusions", tuple(self.exclusions))
        if not self.inclusions:
            raise SchemaViolation("inclusions", "must be non-empty")
        seen: set[str] = set()
        for c in self.inclusions + self.exclusions:
            if c.entity_id in seen:
                raise SchemaViolation("id", f"duplicate entity id {c.entity_id!r}")
            seen.add(c.entity_id)
        for group, items in (("inclusions", self.inclusions), ("exclusions", self.exclusions)):
            for i, c in enumerate(items):
                if c.relation is None:
                    continue
                for ref in (c.relation.subject, c.relation.object):
                    if ref not in seen:
                        raise DanglingRelationId(f"{group}[{i}].relation", ref)

    @property
    def constraints(self) -> tuple[AtomicConstraint, ...]:
        return self.inclusions + self.exclusions

    def entity(self, entity_id: str) -> AtomicConstraint:
        for c in self.constraints:
            if c.entity_id == entity_id:
                return c
        raise KeyError(entity_id)


def canonicalize(cs: ConstraintSet) -> ConstraintSet:
    """Normalize a set into its canonical form.

    Lowercases categories and colors (mapping color synonyms), NFC-normalizes
    all strings, and sorts exclusions by entity id. Text targets keep their
    case; similarity is case-folded at scoring time. Idempotent.
    """

    def fix(c: AtomicConstraint) -> AtomicConstraint:
        return replace(
            c,
            category=_nfc(c.category).strip().lower(),
            color_target=None if c.color_target is None else normalize_color(_nfc(c.color_target)),
            text_target=None if c.text_target is None else _nfc(c.text_target),
        )

    return ConstraintSet(
        tag=cs.tag,
        inclusions=tuple(fix(c) for c in cs.inclusions),
        exclusions=tuple(sorted((fix(c) for c in cs.exclusions), key=lambda c: c.entity_id)),
        source_prompt=_nfc(cs.source_prompt),
    )


# --- JSON schema (see docs/templates.md for the grammar that feeds it) ----

_CONSTRAINT_KEYS = {"id", "category", "count", "color", "orientation", "depth_rank", "text", "relation"}
_RELATION_KEYS = {"name", "subject", "object"}
_ORIENTATION_KEYS = {"degrees", "mode"}
_TOP_KEYS = {"tag", "prompt", "inclusions", "exclusions"}


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise SchemaViolation(path, message)


def _parse_constraint(doc: dict, path: str) -> AtomicConstraint:
    _require(isinstance(doc, dict), path, "must be an object")
    unknown = set(doc) - _CONSTRAINT_KEYS
    _require(not unknown, path, f"unknown fields: {sorted(unknown)}")
    _require("id" in doc, f"{path}.id", "required")
    _require(isinstance(doc["id"], str), f"{path}.id", "must be a string")
    _require("category" in doc, f"{path}.category", "required")
    _require(isinstance(doc["category"], str), f"{path}.category", "must be a string")

    count = doc.get("count")
    if count is not None:
        _require(isinstance(count, int) and not isinstance(count, bool), f"{path}.count", "must be an integer")
        _require(count >= 1, f"{path}.count", f"must be >= 1, got {count}")
    color = doc.get("color")
    if color is not None:
        _require(isinstance(color, str), f"{path}.color", "must be a string")
        norm = normalize_color(color)
        _require(norm in COLOR_VOCAB, f"{path}.color", f"{color!r} not in the color vocabulary")
        color = norm
    orientation = None
    if doc.get("orientation") is not None:
        o = doc["orientation"]
        _require(isinstance(o, dict), f"{path}.orientation", "must be an object")
        unknown = set(o) - _ORIENTATION_KEYS
        _require(not unknown, f"{path}.orientation", f"unknown fields: {sorted(unknown)}")
        _require("degrees" in o, f"{path}.orientation.degrees", "required")
        deg = o["degrees"]
        _require(isinstance(deg, (int, float)) and not isinstance(deg, bool),
                 f"{path}.orientation.degrees", "must be a number")
        mode = o.get("mode", "cat8")
        _require(mode in ORIENTATION_MODES, f"{path}.orientation.mode", f"must be one of {ORIENTATION_MODES}")
        _require(0.0 <= float(deg) < 360.0, f"{path}.orientation.degrees", f"{deg} outside [0, 360)")
        orientation = OrientationTarget(float(deg), mode)
    depth_rank = doc.get("depth_rank")
    if depth_rank is not None:
        _require(isinstance(depth_rank, int) and not isinstance(depth_rank, bool),
                 f"{path}.depth_rank", "must be an integer")
        _require(depth_rank >= 1, f"{path}.depth_rank", f"must be >= 1, got {depth_rank}")
    text = doc.get("text")
    if text is not None:
        _require(isinstance(text, str) and text != "", f"{path}.text", "must be a non-empty string")
    relation = None
    if doc.get("relation") is not None:
        r = doc["relation"]
        _require(isinstance(r, dict), f"{path}.relation", "must be an object")
        unknown = set(r) - _RELATION_KEYS
        _require(not unknown, f"{path}.relation", f"unknown fields: {sorted(unknown)}")
        for k in _RELATION_KEYS:
            _require(k in r, f"{path}.relation.{k}", "required")
            _require(isinstance(r[k], str) and r[k] != "", f"{path}.relation.{k}", "must be a non-empty string")
        _require(r["subject"] != r["object"], f"{path}.relation", "subject and object ids must differ")
        relation = RelationSpec(r["name"], r["subject"], r["object"])

    _require(doc["category"].strip() != "", f"{path}.category", "must be non-empty")
    return AtomicConstraint(
        entity_id=doc["id"],
        category=doc["category"],
        count_target=count,
        color_target=color,
        orientation_target=orientation,
        depth_rank_target=depth_rank,
        text_target=text,
        relation=relation,
    )


def parse_constraint_set(doc: dict) -> ConstraintSet:
    """Validate a ConstraintSet JSON document; rejects unknown fields.

    Raises :class:`SchemaViolation` with a field-level path, or
    :class:`DanglingRelationId` when a relation references a missing entity.
    """
    _require(isinstance(doc, dict), "$", "must be an object")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, "$", f"unknown fields: {sorted(unknown)}")
    _require("tag" in doc, "tag", "required")
    try:
        tag = Tag(doc["tag"])
    except ValueError:
        raise SchemaViolation("tag", f"{doc.get('tag')!r} is not a known tag") from None
    prompt = doc.get("prompt", "")
    _require(isinstance(prompt, str), "prompt", "must be a string")
    _require("inclusions" in doc, "inclusions", "required")
    _require(isinstance(doc["inclusions"], list), "inclusions", "must be a list")
    exclusions_doc = doc.get("exclusions", [])
    _require(isinstance(exclusions_doc, list), "exclusions", "must be a list")

    inclusions = tuple(
        _parse_constraint(c, f"inclusions[{i}]") for i, c in enumerate(doc["inclusions"])
    )
    exclusions = tuple(
        _parse_constraint(c, f"exclusions[{i}]") for i, c in enumerate(exclusions_doc)
    )
    return ConstraintSet(tag=tag, inclusions=inclusions, exclusions=exclusions, source_prompt=prompt)


def _constraint_to_dict(c: AtomicConstraint) -> dict:
    out: dict = {"id": c.entity_id, "category": c.category}
    if c.count_target is not None:
        out["count"] = c.count_target
    if c.color_target is not None:
        out["color"] = c.color_target
    if c.orientation_target is not None:
        out["orientation"] = {"degrees": c.orientation_target.degrees, "mode": c.orientation_target.mode}
    if c.depth_rank_target is not None:
        out["depth_rank"] = c.depth_rank_target
    if c.text_target is not None:
        out["text"] = c.text_target
    if c.relation is not None:
        out["relation"] = {
            "name": c.relation.name,
            "subject": c.relation.subject,
            "object": c.relation.object,
        }
    return out


def constraint_set_to_dict(cs: ConstraintSet) -> dict:
    return {
        "tag": cs.tag.value,
        "prompt": cs.source_prompt,
        "inclusions": [_constraint_to_dict(c) for c in cs.inclusions],
        "exclusions": [_constraint_to_dict(c) for c in cs.exclusions],
    }
