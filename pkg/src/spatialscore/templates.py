"""Deterministic template grammar turning prompts into constraint sets.

Covers the templated prompt families documented in ``docs/templates.md``:
single/two object, counting, color, positional and depth relations,
orientation, rendered text, multi-clause scenes, and exclusion suffixes.
Free-form prompts outside these families raise
:class:`~spatialscore.errors.UnrecognizedTemplate`; callers may then fall
back to a backend's ``decompose`` method.
"""

from __future__ import annotations

import re
import unicodedata

from .constraints import (
    COLOR_SYNONYMS,
    COLOR_VOCAB,
    AtomicConstraint,
    ConstraintSet,
    OrientationTarget,
    RelationSpec,
    Tag,
    canonicalize,
)
from .errors import UnrecognizedTemplate

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}

# Relation phrases, longest first so e.g. "on top of" wins over "on".
RELATION_PHRASES = [
    ("to the left of", "left_of"),
    ("on the left of", "left_of"),
    ("to the right of", "right_of"),
    ("on the right of", "right_of"),
    ("left of", "left_of"),
    ("right of", "right_of"),
    ("in front of", "in_front_of"),
    ("on top of", "on"),
    ("next to", "next_to"),
    ("beside", "next_to"),
    ("near", "next_to"),
    ("inside", "inside"),
    ("within", "inside"),
    ("above", "above"),
    ("below", "below"),
    ("under", "below"),
    ("beneath", "below"),
    ("behind", "behind"),
    ("on", "on"),
    ("in", "inside"),
]

DEPTH_RELATIONS = {"behind", "in_front_of"}

# Compass bearings, clockwise from north = 0 (away from the camera).
DIRECTION_DEGREES = {
    "north": 0.0, "northeast": 45.0, "east": 90.0, "southeast": 135.0,
    "south": 180.0, "southwest": 225.0, "west": 270.0, "northwest": 315.0,
    "away": 0.0, "away from the camera": 0.0,
    "right": 90.0, "the camera": 180.0, "forward": 180.0, "left": 270.0,
}

IRREGULAR_PLURALS = {
    "people": "person", "men": "man", "women": "woman", "children": "child",
    "geese": "goose", "mice": "mouse", "sheep": "sheep", "scissors": "scissors",
    "knives": "knife", "leaves": "leaf", "wolves": "wolf",
}

_COLOR_ALT = "|".join(sorted(list(COLOR_VOCAB) + list(COLOR_SYNONYMS), key=len, reverse=True))
_NUM_ALT = "|".join(list(NUMBER_WORDS) + [str(n) for n in range(1, 11)])
_REL_ALT = "|".join(re.escape(p) for p, _ in RELATION_PHRASES)
_DIR_ALT = "|".join(
    re.escape(d) for d in sorted(DIRECTION_DEGREES, key=len, reverse=True)
)
# 1-3 word category; words may be hyphenated.
_CAT = r"[a-z][a-z\-]*(?: [a-z][a-z\-]*){0,2}"

_PHOTO = r"(?:a photo of )?"
_Q = "\x00"  # placeholder marking an extracted quoted string


def singularize(word: str) -> str:
    """Deterministic de-pluralization used by counting templates."""
    if word in IRREGULAR_PLURALS:
        return IRREGULAR_PLURALS[word]
    if word.endswith("ies") and len(word) > 3:
        return word[:-3] + "y"
    if re.search(r"(?:x|s|z|ch|sh)es$", word):
        return word[:-2]
    if word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def _parse_number(tok: str) -> int:
    return NUMBER_WORDS.get(tok, 0) or int(tok)


class _Builder:
    """Accumulates entities with e1, e2, ... ids in order of first mention."""

    def __init__(self):
        self.inclusions: list[AtomicConstraint] = []
        self.exclusions: list[AtomicConstraint] = []
        self._n = 0

    def _next_id(self) -> str:
        self._n += 1
        return f"e{self._n}"

    def add(self, exclusion: bool = False, **kwargs) -> str:
        eid = self._next_id()
        target = self.exclusions if exclusion else self.inclusions
        target.append(AtomicConstraint(entity_id=eid, **kwargs))
        return eid

    def find_by_category(self, category: str) -> str | None:
        for c in self.inclusions:
            if c.category == category:
                return c.entity_id
        return None

    def attach_relation(self, eid: str, relation: RelationSpec):
        for lst in (self.inclusions, self.exclusions):
            for i, c in enumerate(lst):
                if c.entity_id == eid:
                    if c.relation is not None:
                        raise UnrecognizedTemplate(
                            f"entity {eid} already carries a relation"
                        )
                    lst[i] = AtomicConstraint(
                        entity_id=c.entity_id, category=c.category,
                        count_target=c.count_target, color_target=c.color_target,
                        orientation_target=c.orientation_target,
                        depth_rank_target=c.depth_rank_target,
                        text_target=c.text_target, relation=relation,
                    )
                    return
        raise KeyError(eid)


def _extract_quotes(prompt: str) -> tuple[str, list[str]]:
    """Replace quoted spans with placeholders, preserving their case."""
    quotes: list[str] = []

    def grab(m: re.Match) -> str:
        quotes.append(m.group(1) or m.group(2))
        return _Q

    cleaned = re.sub(r"\"([^\"]+)\"|'([^']+)'", grab, prompt)
    return cleaned, quotes


_NP = re.compile(
    rf"^(?:(?P<art>a|an|the)|(?P<num>{_NUM_ALT})) (?:(?P<color>{_COLOR_ALT}) )?(?P<cat>{_CAT})$"
)


def _parse_np(text: str, builder: _Builder, exclusion: bool = False) -> str:
    """Parse a noun phrase into an entity; 'the <cat>' binds to an existing one."""
    m = _NP.match(text.strip())
    if m is None:
        raise UnrecognizedTemplate(f"unrecognized noun phrase: {text!r}")
    color = m.group("color")
    cat = m.group("cat")
    if m.group("art") == "the":
        existing = builder.find_by_category(cat)
        if existing is not None:
            return existing
        raise UnrecognizedTemplate(f"'the {cat}' references no earlier entity")
    count = None
    if m.group("num"):
        count = _parse_number(m.group("num"))
        cat = singularize(cat)
        if count == 1:
            count = None
    return builder.add(
        exclusion=exclusion,
        category=cat,
        count_target=count,
        color_target=None if color is None else color,
    )


_TEXT_ON = re.compile(
    rf"^{_PHOTO}(?P<np>.+?) (?:with the (?:word|text) {_Q}(?: written)? on it|that says {_Q}|labeled {_Q})$"
)
_TEXT_COUNT = re.compile(
    rf"^{_PHOTO}(?P<num>{_NUM_ALT}) (?P<cat>{_CAT}),? each labeled {_Q}$"
)
_FACING = re.compile(rf"^{_PHOTO}(?P<np>.+?),? facing (?P<dir>{_DIR_ALT})$")
_WITHOUT = re.compile(r"^(?P<main>.+?)(?:,)? (?:without (?P<wnp>.+)|and no (?P<nonp>[a-z][a-z\- ]*))$")
_CLAUSE = re.compile(rf"^(?P<subj>.+?) (?P<rel>{_REL_ALT}) (?P<obj>.+)$")
_TWO = re.compile(rf"^{_PHOTO}(?P<first>.+?) and (?P<second>(?:a|an|the|{_NUM_ALT}) .+)$")
_SINGLE = re.compile(rf"^{_PHOTO}(?P<np>.+)$")


def _relation_name(phrase: str) -> str:
    for p, name in RELATION_PHRASES:
        if p == phrase:
            return name
    raise UnrecognizedTemplate(f"unknown relation phrase {phrase!r}")


def _split_clauses(body: str) -> list[str]:
    return [part.strip() for part in re.split(r",? and ", body)]


def decompose_template(prompt: str) -> ConstraintSet:
    """Decompose a templated prompt into a canonical constraint set.

    Pure function: identical prompts yield identical sets. Raises
    :class:`UnrecognizedTemplate` when no grammar rule matches.
    """
    original = prompt
    work = unicodedata.normalize("NFC", prompt).strip()
    work, quotes = _extract_quotes(work)
    work = re.sub(r"\s+", " ", work).strip().rstrip(".").lower()
    if not work:
        raise UnrecognizedTemplate("empty prompt")

    # Exclusion suffix peels off first; the remaining body decides the tag.
    excluded: list[tuple[str, str]] = []
    m = _WITHOUT.match(work)
    if m is not None and _Q not in (m.group("wnp") or ""):
        body = m.group("main")
        if m.group("wnp"):
            excluded.append(("np", m.group("wnp")))
        else:
            excluded.append(("bare", m.group("nonp").strip()))
    else:
        body = work

    m = _TEXT_COUNT.match(body)
    if m is not None:
        if len(quotes) != 1:
            raise UnrecognizedTemplate("text template needs exactly one quoted string")
        builder = _Builder()
        builder.add(
            category=singularize(m.group("cat")),
            count_target=_parse_number(m.group("num")),
            text_target=quotes[0],
        )
        return _finish(builder, excluded, Tag.TEXT_COUNT, original)

    m = _TEXT_ON.match(body)
    if m is not None:
        if len(quotes) != 1:
            raise UnrecognizedTemplate("text template needs exactly one quoted string")
        builder = _Builder()
        _parse_np(m.group("np"), builder)
        inc = builder.inclusions[-1]
        builder.inclusions[-1] = AtomicConstraint(
            entity_id=inc.entity_id, category=inc.category,
            count_target=inc.count_target, color_target=inc.color_target,
            text_target=quotes[0],
        )
        return _finish(builder, excluded, Tag.TEXT_POSITION, original)

    if quotes:
        raise UnrecognizedTemplate("quoted text outside a text template")

    m = _FACING.match(body)
    if m is not None:
        builder = _Builder()
        _parse_np(m.group("np"), builder)
        inc = builder.inclusions[-1]
        builder.inclusions[-1] = AtomicConstraint(
            entity_id=inc.entity_id, category=inc.category,
            count_target=inc.count_target, color_target=inc.color_target,
            orientation_target=OrientationTarget(DIRECTION_DEGREES[m.group("dir")], "cat8"),
        )
        return _finish(builder, excluded, Tag.ORIENTATION, original)

    # Relation clauses: strip an optional photo prefix once, split on " and ".
    stripped = re.sub(r"^a photo of ", "", body)
    clauses = _split_clauses(stripped)
    if clauses and all(_CLAUSE.match(c) for c in clauses):
        builder = _Builder()
        rel_tag = _try_relations(clauses, builder)
        if rel_tag is not None:
            return _finish(builder, excluded, rel_tag, original)

    # Plain counting: "a photo of three cups" / "3 cups".
    m = re.match(rf"^{_PHOTO}(?P<num>{_NUM_ALT}) (?P<cat>{_CAT})$", body)
    if m is not None:
        n = _parse_number(m.group("num"))
        builder = _Builder()
        builder.add(category=singularize(m.group("cat")), count_target=None if n == 1 else n)
        return _finish(builder, excluded, Tag.COUNTING if n > 1 else Tag.SINGLE_OBJECT, original)

    # One or two plain noun phrases.
    m = _TWO.match(body)
    if m is not None:
        builder = _Builder()
        try:
            _parse_np(m.group("first"), builder)
            _parse_np(m.group("second"), builder)
        except UnrecognizedTemplate:
            pass
        else:
            has_color = any(c.color_target for c in builder.inclusions)
            has_count = any(c.count_target for c in builder.inclusions)
            tag = Tag.COLOR if has_color else (Tag.COUNTING if has_count else Tag.TWO_OBJECT)
            return _finish(builder, excluded, tag, original)

    m = _SINGLE.match(body)
    if m is not None:
        builder = _Builder()
        _parse_np(m.group("np"), builder)
        only = builder.inclusions[0]
        if only.color_target is not None:
            tag = Tag.COLOR
        elif only.count_target is not None:
            tag = Tag.COUNTING
        else:
            tag = Tag.SINGLE_OBJECT
        return _finish(builder, excluded, tag, original)

    raise UnrecognizedTemplate(f"no template family matches: {original!r}")


def _try_relations(clauses: list[str], builder: _Builder) -> Tag | None:
    """Parse ``<np> <relation> <np>`` clauses; later clauses may say 'the <cat>'."""
    relations: list[str] = []
    for clause in clauses:
        m = _CLAUSE.match(clause)
        if m is None:
            return None
        # The relation regex is greedy-ambiguous for NPs containing relation
        # words; NP parse failures reject the whole reading.
        try:
            subj = _parse_np(m.group("subj"), builder)
            obj = _parse_np(m.group("obj"), builder)
        except UnrecognizedTemplate:
            return None
        rel = _relation_name(m.group("rel"))
        builder.attach_relation(subj, RelationSpec(rel, subj, obj))
        relations.append(rel)
    if not relations:
        return None
    if len(relations) >= 2 or len(builder.inclusions) > 2:
        return Tag.COMPLEX
    if relations[0] in DEPTH_RELATIONS:
        return Tag.DEPTH3D
    return Tag.POSITION


def _finish(builder: _Builder, excluded: list[tuple[str, str | None]], tag: Tag, prompt: str) -> ConstraintSet:
    for kind, text in excluded:
        if kind == "np":
            _parse_np(text, builder, exclusion=True)
        else:
            builder.add(exclusion=True, category=singularize(text))
    cs = ConstraintSet(
        tag=tag,
        inclusions=tuple(builder.inclusions),
        exclusions=tuple(builder.exclusions),
        source_prompt=prompt,
    )
    return canonicalize(cs)
