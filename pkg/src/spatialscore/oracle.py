"""Synthetic scene planting: ground truth the engine must reproduce.

Given a constraint set and a list of requested violations, ``plant_scene``
builds a scene graph that satisfies every untouched facet and breaks every
requested one, always with at least a 2x safety factor beyond the engine's
decision margins (so no test ever rides a tie-break), and returns the
expected scores computed analytically from the planted intent — never by
running the engine.

``random_suite`` stratifies plant specs across the benchmark dimensions;
``materialize_suite`` writes scenes plus a JSON-lines manifest for the
bench harness.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path

from .constraints import (
    COLOR_VOCAB,
    AtomicConstraint,
    ConstraintSet,
    OrientationTarget,
    RelationSpec,
    Tag,
)
from .errors import InfeasiblePlant
from .geometry import BBox
from .scene import SceneGraph, SceneObject, SceneText, dump_scene
from .serialize import canonical_json, round_real

SIZE = 0.12          # default box side
INSIDE_OUTER = 0.30  # container side for "inside" plants

# Subject-center offset from object center, satisfied configuration.
_SAT_OFFSET = {
    "left_of": (-0.45, 0.0),
    "right_of": (0.45, 0.0),
    "above": (0.0, -0.45),
    "below": (0.0, 0.45),
    "on": (0.0, -SIZE),
    "next_to": (-0.08, 0.0),
    "inside": (0.0, 0.0),
    "behind": (-0.35, 0.0),
    "in_front_of": (-0.35, 0.0),
}

# Violated configuration: the mirror (or far) placement for the relation.
_VIO_OFFSET = {
    "left_of": (0.45, 0.0),
    "right_of": (-0.45, 0.0),
    "above": (0.0, 0.45),
    "below": (0.0, -0.45),
    "on": (0.0, -0.40),
    "next_to": (-0.45, 0.0),
    "inside": (-0.35, 0.0),
    "behind": (-0.35, 0.0),       # violated via swapped depths
    "in_front_of": (-0.35, 0.0),
}

# Offsets are shortened inside multi-relation chains so they stay in frame;
# the far next_to violation is the one placement that must stay long.
_CHAIN_SCALE = {"left_of": 0.3 / 0.45, "right_of": 0.3 / 0.45,
                "above": 0.3 / 0.45, "below": 0.3 / 0.45}
_VIO_NEXT_TO_CHAIN = (-0.40, 0.0)

# Depth pairs for depth relations: (subject, object).
_DEPTH_SAT = {"behind": (4.0, 1.0), "in_front_of": (1.0, 4.0)}
_DEPTH_VIO = {"behind": (1.0, 4.0), "in_front_of": (4.0, 1.0)}

_ANCHORS = [
    (0.17, 0.17), (0.50, 0.17), (0.83, 0.17),
    (0.17, 0.50), (0.83, 0.50),
    (0.17, 0.83), (0.50, 0.83), (0.83, 0.83),
]

_FACETS = ("presence", "count", "color", "orientation", "depth", "text", "relation")

FALLBACK_COLOR = "gray"


@dataclass(frozen=True, slots=True)
class PlantSpec:
    constraint_set: ConstraintSet
    violations: tuple[tuple[str, str], ...] = ()
    seed: int = 0


@dataclass(frozen=True, slots=True)
class PlantResult:
    scene: SceneGraph
    facets: dict          # entity_id -> {facet: expected value}
    relation_scores: dict  # entity_id -> expected relation score
    inclusion_composed: dict
    exclusion_composed: dict
    raw_total: float
    normalized_total: float

    def verdict(self, tau_pass: float = 0.8) -> bool:
        return self.normalized_total >= tau_pass


def _check_violations(cset: ConstraintSet, violations) -> dict[str, set[str]]:
    by_id = {c.entity_id: c for c in cset.inclusions + cset.exclusions}
    excl_ids = {c.entity_id for c in cset.exclusions}
    out: dict[str, set[str]] = {}
    for entity_id, facet in violations:
        if entity_id not in by_id:
            raise InfeasiblePlant(f"violation references unknown entity {entity_id!r}")
        if facet not in _FACETS:
            raise InfeasiblePlant(f"unknown facet {facet!r}")
        c = by_id[entity_id]
        if entity_id in excl_ids and facet != "presence":
            raise InfeasiblePlant("exclusion violations support only presence")
        if facet == "count" and c.count_target is None:
            raise InfeasiblePlant(f"{entity_id} has no count target to violate")
        if facet == "color" and c.color_target is None:
            raise InfeasiblePlant(f"{entity_id} has no color target to violate")
        if facet == "orientation" and c.orientation_target is None:
            raise InfeasiblePlant(f"{entity_id} has no orientation target to violate")
        if facet == "depth" and c.depth_rank_target is None:
            raise InfeasiblePlant(f"{entity_id} has no depth rank target to violate")
        if facet == "text" and c.text_target is None:
            raise InfeasiblePlant(f"{entity_id} has no text target to violate")
        if facet == "relation" and c.relation is None:
            raise InfeasiblePlant(f"{entity_id} has no relation to violate")
        violated = out.setdefault(entity_id, set())
        if "presence" in violated or (facet == "presence" and violated):
            raise InfeasiblePlant(
                f"{entity_id}: cannot violate presence together with other facets"
            )
        violated.add(facet)
    return out


def _wrong_color(target: str) -> str:
    idx = COLOR_VOCAB.index(target)
    return COLOR_VOCAB[(idx + 1) % len(COLOR_VOCAB)]


def _box_at(cx: float, cy: float, size: float) -> BBox:
    half = size / 2.0
    return BBox(
        round_real(cx - half), round_real(cy - half),
        round_real(cx + half), round_real(cy + half),
    )


class _Placer:
    """Resolves entity center positions from relation offsets, then shifts
    the whole arrangement into the unit square."""

    def __init__(self, cset: ConstraintSet, violated: dict[str, set[str]]):
        self.cset = cset
        self.violated = violated
        self.sizes: dict[str, float] = {}
        self.centers: dict[str, tuple[float, float]] = {}

    def _offset(self, relation: RelationSpec, chained: bool) -> tuple[float, float]:
        name = relation.name
        is_violated = "relation" in self.violated.get(relation.subject, set())
        if name in ("behind", "in_front_of"):
            return _SAT_OFFSET[name]  # depth relations violate via depth values
        if is_violated:
            if chained and name == "next_to":
                return _VIO_NEXT_TO_CHAIN
            off = _VIO_OFFSET[name]
        else:
            off = _SAT_OFFSET[name]
        if chained and name in _CHAIN_SCALE:
            scale = _CHAIN_SCALE[name]
            off = (off[0] * scale, off[1] * scale)
        return off

    def place(self, placed_ids: list[str]) -> None:
        """Position relation participants relative to one another."""
        relations = [c.relation for c in self.cset.inclusions if c.relation is not None
                     and c.entity_id in placed_ids]
        relations = [r for r in relations if r.subject in placed_ids and r.object in placed_ids]
        chained = len(relations) > 1

        for entity_id in placed_ids:
            self.sizes.setdefault(entity_id, SIZE)
        for r in relations:
            if r.name == "inside" and "relation" not in self.violated.get(r.subject, set()):
                self.sizes[r.object] = INSIDE_OUTER

        # Objects that are never subjects are roots; subjects hang off them.
        subjects = {r.subject for r in relations}
        pending = list(relations)
        root = next((r.object for r in relations if r.object not in subjects), None)
        if relations and root is None:
            raise InfeasiblePlant("relation graph has no root (cycle)")
        if root is not None:
            self.centers[root] = (0.0, 0.0)
        progressed = True
        while pending and progressed:
            progressed = False
            for r in list(pending):
                if r.object in self.centers and r.subject not in self.centers:
                    ox, oy = self.centers[r.object]
                    dx, dy = self._offset(r, chained)
                    self.centers[r.subject] = (ox + dx, oy + dy)
                    pending.remove(r)
                    progressed = True
                elif r.object in self.centers and r.subject in self.centers:
                    pending.remove(r)
                    progressed = True
        if pending:
            raise InfeasiblePlant("relation graph is not a forest reachable from its root")

    def fit(self) -> None:
        """Translate the relative arrangement into [0.02, 0.98]."""
        if not self.centers:
            return
        lo_x = min(cx - self.sizes[e] / 2 for e, (cx, cy) in self.centers.items())
        hi_x = max(cx + self.sizes[e] / 2 for e, (cx, cy) in self.centers.items())
        lo_y = min(cy - self.sizes[e] / 2 for e, (cx, cy) in self.centers.items())
        hi_y = max(cy + self.sizes[e] / 2 for e, (cx, cy) in self.centers.items())
        if hi_x - lo_x > 0.96 or hi_y - lo_y > 0.96:
            raise InfeasiblePlant(
                f"arrangement spans {hi_x - lo_x:.2f} x {hi_y - lo_y:.2f}, "
                "exceeding the unit square"
            )
        shift_x = 0.02 - lo_x + (0.96 - (hi_x - lo_x)) / 2
        shift_y = 0.02 - lo_y + (0.96 - (hi_y - lo_y)) / 2
        self.centers = {
            e: (cx + shift_x, cy + shift_y) for e, (cx, cy) in self.centers.items()
        }


def plant_scene(spec: PlantSpec) -> PlantResult:
    """Build the scene and the analytic expectation for one plant spec."""
    cset = spec.constraint_set
    violated = _check_violations(cset, spec.violations)
    rng = random.Random(spec.seed)

    def is_violated(entity_id: str, facet: str) -> bool:
        return facet in violated.get(entity_id, set())

    # Which entities appear in the scene at all. Inclusions appear unless
    # presence-violated; exclusions appear only when presence-"violated"
    # (the undesired object shows up).
    present: dict[str, bool] = {}
    for c in cset.inclusions:
        present[c.entity_id] = not is_violated(c.entity_id, "presence")
    for c in cset.exclusions:
        present[c.entity_id] = is_violated(c.entity_id, "presence")

    placer = _Placer(cset, violated)
    relation_ids: list[str] = []
    for c in cset.inclusions:
        if c.relation is not None and present.get(c.relation.subject) and present.get(c.relation.object):
            for eid in (c.relation.subject, c.relation.object):
                if eid not in relation_ids:
                    relation_ids.append(eid)
    placer.place(relation_ids)
    placer.fit()

    anchors = list(_ANCHORS)
    rng.shuffle(anchors)
    anchor_iter = iter(anchors)

    def next_anchor() -> tuple[float, float]:
        try:
            return next(anchor_iter)
        except StopIteration:
            raise InfeasiblePlant("ran out of free placement anchors") from None

    # -- depth assignment ------------------------------------------------------
    constraints = list(cset.inclusions) + list(cset.exclusions)
    by_id = {c.entity_id: c for c in constraints}
    depth_of: dict[str, float] = {}

    for c in cset.inclusions:
        r = c.relation
        if r is not None and r.name in _DEPTH_SAT and present.get(r.subject) and present.get(r.object):
            pair = _DEPTH_VIO[r.name] if is_violated(c.entity_id, "relation") else _DEPTH_SAT[r.name]
            depth_of[r.subject], depth_of[r.object] = pair

    rank_form = [c for c in constraints if c.depth_rank_target is not None and present[c.entity_id]]
    depth_violated = [c for c in rank_form if is_violated(c.entity_id, "depth")]
    if depth_violated and len(depth_violated) != 2:
        raise InfeasiblePlant(
            "depth violations must name exactly two entities (a swapped pair)"
        )
    if rank_form:
        # Planted nearest-to-farthest order follows the declared targets;
        # a depth violation swaps the two named entities in that order.
        ordered = sorted(rank_form, key=lambda c: c.depth_rank_target)
        if depth_violated:
            i, j = ordered.index(depth_violated[0]), ordered.index(depth_violated[1])
            ordered[i], ordered[j] = ordered[j], ordered[i]
        for i, c in enumerate(ordered):
            depth_of.setdefault(c.entity_id, 1.0 + 0.75 * i)

    # Entities without any depth role sit behind the ranked ones, spaced so
    # instance jitter can never reorder anything.
    fill_depth = 1.0 + 0.75 * len(rank_form)
    for c in constraints:
        if present[c.entity_id] and c.entity_id not in depth_of:
            fill_depth += 0.5
            depth_of[c.entity_id] = fill_depth

    # -- build scene objects -----------------------------------------------------
    objects: list[SceneObject] = []
    texts: list[SceneText] = []
    actual_count: dict[str, int] = {}

    for c in constraints:
        eid = c.entity_id
        if not present[eid]:
            actual_count[c.category] = actual_count.get(c.category, 0)
            continue

        n = 1
        if c.count_target is not None:
            n = c.count_target
            if is_violated(eid, "count"):
                delta = 2 if len(cset.inclusions) >= 3 else 1
                n = c.count_target - delta if c.count_target - delta >= 1 else c.count_target + delta
        actual_count[c.category] = actual_count.get(c.category, 0) + n

        color = FALLBACK_COLOR
        if c.color_target is not None:
            color = _wrong_color(c.color_target) if is_violated(eid, "color") else c.color_target

        orientation = 0.0
        if c.orientation_target is not None:
            orientation = c.orientation_target.degrees
            if is_violated(eid, "orientation"):
                orientation = (orientation + 180.0) % 360.0

        size = placer.sizes.get(eid, SIZE)
        if eid in placer.centers:
            cx, cy = placer.centers[eid]
        else:
            cx, cy = next_anchor()

        # Instance layout for counted entities: a compact run orthogonal to
        # the relation axis (or across free anchors when unrelated).
        centers: list[tuple[float, float]]
        if n == 1:
            centers = [(cx, cy)]
        elif eid in placer.centers:
            horizontal = c.relation is not None and c.relation.name in ("left_of", "right_of")
            step = [(0.0, 0.13 * i) if horizontal else (0.13 * i, 0.0)
                    for i in range(-(n // 2), n - n // 2)]
            centers = [(cx + sx, cy + sy) for sx, sy in step]
        else:
            centers = [(cx, cy)] + [next_anchor() for _ in range(n - 1)]

        for i, (icx, icy) in enumerate(centers):
            box = _box_at(icx, icy, size)
            objects.append(SceneObject(
                id=eid if n == 1 else f"{eid}_{i}",
                category=c.category,
                box=box,
                color=color,
                orientation_degrees=round_real(orientation),
                depth=round_real(depth_of[eid] + 0.01 * i),
            ))
            if c.text_target is not None and not is_violated(eid, "text"):
                inset = size * 0.25
                texts.append(SceneText(
                    text=c.text_target,
                    box=BBox(
                        round_real(box.x0 + inset), round_real(box.y0 + inset),
                        round_real(box.x1 - inset), round_real(box.y1 - inset),
                    ),
                ))

    scene = SceneGraph(seed=spec.seed, objects=tuple(objects), texts=tuple(texts))

    # -- analytic expectation ------------------------------------------------------
    # The engine binds the (confidence, x0, y0)-first instance; every planted
    # instance satisfies the same facets, so any representative works. Depth
    # ranks: nearest bound box = rank 1, ties by x0 — reimplemented here
    # rather than imported, to stay independent of the engine.
    bound_ids = [c.entity_id for c in constraints if present[c.entity_id]]
    bound_box: dict[str, BBox] = {}
    for eid in bound_ids:
        candidates = [o for o in objects if o.id == eid or o.id.startswith(eid + "_")]
        chosen = min(candidates, key=lambda o: (o.box.x0, o.box.y0))
        bound_box[eid] = chosen.box

    rank_of: dict[str, int] = {}
    order = sorted(bound_ids, key=lambda e: (depth_of[e], bound_box[e].x0))
    for i, eid in enumerate(order, start=1):
        rank_of[eid] = i

    for c in rank_form:
        if not is_violated(c.entity_id, "depth") and rank_of[c.entity_id] != c.depth_rank_target:
            raise InfeasiblePlant(
                f"{c.entity_id}: rank target {c.depth_rank_target} cannot be realized "
                f"(planted rank {rank_of[c.entity_id]}); targets must enumerate 1..n"
            )

    facets: dict[str, dict[str, float]] = {}
    relation_scores: dict[str, float] = {}

    for c in constraints:
        eid = c.entity_id
        f: dict[str, float] = {"presence": 1.0 if present[eid] else 0.0}
        if c.count_target is not None:
            f["count"] = math.exp(-abs(actual_count.get(c.category, 0) - c.count_target))
        if c.color_target is not None:
            f["color"] = 0.0 if (is_violated(eid, "color") or not present[eid]) else 1.0
        if c.orientation_target is not None:
            f["orientation"] = 0.0 if (is_violated(eid, "orientation") or not present[eid]) else 1.0
        if c.depth_rank_target is not None:
            if present[eid]:
                f["depth"] = math.exp(-abs(rank_of[eid] - c.depth_rank_target))
            else:
                f["depth"] = 0.0
        if c.text_target is not None:
            f["text"] = 0.0 if (is_violated(eid, "text") or not present[eid]) else 1.0
        facets[eid] = f

        if c.relation is not None:
            r = c.relation
            if not present.get(r.subject) or not present.get(r.object):
                relation_scores[eid] = 0.0
            else:
                relation_scores[eid] = 0.0 if is_violated(eid, "relation") else 1.0

    def composed(c: AtomicConstraint) -> float:
        f = facets[c.entity_id]
        if f["presence"] == 0.0:
            return 0.0
        value = 1.0
        for v in f.values():
            value *= v
        if c.relation is not None:
            value *= relation_scores[c.entity_id]
        return value

    inclusion_composed = {c.entity_id: composed(c) for c in cset.inclusions}
    exclusion_composed = {c.entity_id: composed(c) for c in cset.exclusions}
    raw = sum(inclusion_composed.values()) - sum(exclusion_composed.values())
    normalized = min(max(raw / max(1, len(cset.inclusions)), 0.0), 1.0)

    return PlantResult(
        scene=scene,
        facets=facets,
        relation_scores=relation_scores,
        inclusion_composed=inclusion_composed,
        exclusion_composed=exclusion_composed,
        raw_total=raw,
        normalized_total=normalized,
    )


# --- randomized suites -----------------------------------------------------------

SUITE_TAGS = (
    Tag.TEXT_POSITION, Tag.TEXT_COUNT, Tag.COMPLEX, Tag.ORIENTATION, Tag.DEPTH3D,
    Tag.SINGLE_OBJECT, Tag.TWO_OBJECT, Tag.COUNTING, Tag.COLOR, Tag.POSITION,
)

_CATS = [
    "cup", "laptop", "dog", "cat", "book", "chair", "lamp", "plant", "ball",
    "mug", "sign", "box", "bird", "car", "tree", "shoe", "bottle", "vase",
    "clock", "bench",
]
_WORDS = ["OPEN", "STOP", "EXIT", "SALE", "MENU", "GO"]
_POSITION_RELS = ["left_of", "right_of", "above", "below", "on", "inside", "next_to"]
_CHAIN_RELS = ["left_of", "right_of", "above", "below", "next_to"]
_DIRECTIONAL = ("left_of", "right_of", "above", "below")
_COMPASS = [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]

Violation = tuple[tuple[str, str], ...]


def _entity(eid: str, category: str, **kwargs) -> AtomicConstraint:
    return AtomicConstraint(entity_id=eid, category=category, **kwargs)


def _maybe_exclusion(rng: random.Random, cats: list[str], next_id: int):
    """Optionally add one presence-only exclusion; returns (exclusions, option)."""
    if rng.random() < 0.35:
        eid = f"e{next_id}"
        return (_entity(eid, cats.pop()),), ((eid, "presence"),)
    return (), None


def _gen_constraints(rng: random.Random, tag: Tag) -> tuple[ConstraintSet, list[Violation]]:
    """One constraint set for the tag plus the legal single-violation options."""
    cats = rng.sample(_CATS, 6)
    options: list[Violation] = []
    exclusions: tuple[AtomicConstraint, ...] = ()

    if tag is Tag.SINGLE_OBJECT:
        inclusions = (_entity("e1", cats.pop()),)
        options.append((("e1", "presence"),))
        exclusions, excl_opt = _maybe_exclusion(rng, cats, 2)
        if excl_opt:
            options.append(excl_opt)

    elif tag is Tag.TWO_OBJECT:
        inclusions = (_entity("e1", cats.pop()), _entity("e2", cats.pop()))
        options += [(("e1", "presence"),), (("e2", "presence"),)]
        exclusions, excl_opt = _maybe_exclusion(rng, cats, 3)
        if excl_opt:
            options.append(excl_opt)

    elif tag is Tag.COUNTING:
        k = rng.choice((1, 2))
        counts = [rng.randint(2, 4)] if k == 1 else [rng.randint(2, 3), rng.randint(2, 3)]
        inclusions = tuple(
            _entity(f"e{i + 1}", cats.pop(), count_target=c) for i, c in enumerate(counts)
        )
        victim = f"e{rng.randint(1, k)}"
        options += [((victim, "count"),), ((victim, "presence"),)]

    elif tag is Tag.COLOR:
        k = rng.choice((1, 2))
        colors = rng.sample(COLOR_VOCAB, k)
        inclusions = tuple(
            _entity(f"e{i + 1}", cats.pop(), color_target=col) for i, col in enumerate(colors)
        )
        victim = f"e{rng.randint(1, k)}"
        options += [((victim, "color"),), ((victim, "presence"),)]

    elif tag is Tag.POSITION:
        rel = rng.choice(_POSITION_RELS)
        count = rng.randint(2, 3) if (rel in _DIRECTIONAL and rng.random() < 0.3) else None
        color_pair = rng.sample(COLOR_VOCAB, 2) if rng.random() < 0.4 else (None, None)
        inclusions = (
            _entity("e1", cats.pop(), count_target=count, color_target=color_pair[0],
                    relation=RelationSpec(rel, "e1", "e2")),
            _entity("e2", cats.pop(), color_target=color_pair[1]),
        )
        options.append((("e1", "relation"),))

    elif tag is Tag.ORIENTATION:
        k = rng.choice((1, 2))
        inclusions = tuple(
            _entity(f"e{i + 1}", cats.pop(),
                    orientation_target=OrientationTarget(rng.choice(_COMPASS), "cat8"))
            for i in range(k)
        )
        victim = f"e{rng.randint(1, k)}"
        options += [((victim, "orientation"),), ((victim, "presence"),)]

    elif tag is Tag.DEPTH3D:
        if rng.random() < 0.5:
            rel = rng.choice(("behind", "in_front_of"))
            inclusions = (
                _entity("e1", cats.pop(), relation=RelationSpec(rel, "e1", "e2")),
                _entity("e2", cats.pop()),
            )
            options.append((("e1", "relation"),))
        else:
            k = rng.choice((2, 3))
            inclusions = tuple(
                _entity(f"e{i + 1}", cats.pop(), depth_rank_target=i + 1) for i in range(k)
            )
            i = rng.randint(1, k - 1)  # swap adjacent ranks i, i+1
            options.append(((f"e{i}", "depth"), (f"e{i + 1}", "depth")))

    elif tag is Tag.TEXT_POSITION:
        inclusions = (_entity("e1", cats.pop(), text_target=rng.choice(_WORDS)),)
        options += [(("e1", "text"),), (("e1", "presence"),)]

    elif tag is Tag.TEXT_COUNT:
        inclusions = (
            _entity("e1", cats.pop(), count_target=rng.randint(2, 3),
                    text_target=rng.choice(_WORDS)),
        )
        options += [(("e1", "text"),), (("e1", "count"),), (("e1", "presence"),)]

    elif tag is Tag.COMPLEX:
        rel1, rel2 = rng.choice(_CHAIN_RELS), rng.choice(_CHAIN_RELS)
        shape = rng.choice(("chain", "fan"))
        second_object = "e1" if shape == "chain" else "e2"
        inclusions = (
            _entity("e1", cats.pop(), relation=RelationSpec(rel1, "e1", "e2")),
            _entity("e2", cats.pop()),
            _entity("e3", cats.pop(), relation=RelationSpec(rel2, "e3", second_object)),
        )
        options += [(("e1", "relation"),), (("e3", "relation"),), (("e2", "presence"),)]

    else:  # pragma: no cover - SUITE_TAGS is exhaustive
        raise ValueError(f"no generator for tag {tag}")

    cset = ConstraintSet(tag=tag, inclusions=inclusions, exclusions=exclusions,
                         source_prompt=f"synthetic {tag.value} item")
    return cset, options


def random_suite(
    n: int,
    seed: int,
    tag_mix: dict[Tag, float] | None = None,
    violated_fraction: float = 0.5,
) -> list[PlantSpec]:
    """n plant specs stratified over the benchmark tags, reproducible in seed.

    Tag counts follow the requested proportions by largest remainder, so each
    tag lands within one item of its exact share.
    """
    if n < 1:
        raise ValueError("suite size must be >= 1")
    mix = tag_mix or {tag: 1.0 for tag in SUITE_TAGS}
    total = sum(mix.values())
    if total <= 0:
        raise ValueError("tag mix proportions must sum to a positive value")

    shares = [(tag, n * weight / total) for tag, weight in mix.items()]
    counts = {tag: int(share) for tag, share in shares}
    remainder = n - sum(counts.values())
    by_fraction = sorted(shares, key=lambda ts: (ts[1] - int(ts[1]), str(ts[0])), reverse=True)
    for tag, _ in by_fraction[:remainder]:
        counts[tag] += 1

    rng = random.Random(seed)
    specs: list[PlantSpec] = []
    for tag in SUITE_TAGS:
        for _ in range(counts.get(tag, 0)):
            cset, options = _gen_constraints(rng, tag)
            violations: Violation = ()
            if options and rng.random() < violated_fraction:
                violations = rng.choice(options)
            specs.append(PlantSpec(
                constraint_set=cset,
                violations=violations,
                seed=rng.randrange(1 << 30),
            ))
    return specs


def materialize_suite(
    specs: list[PlantSpec],
    out_dir: str | Path,
    tau_pass: float = 0.8,
) -> tuple[Path, dict[str, PlantResult]]:
    """Write scenes and a bench manifest; returns (manifest path, expectations).

    Layout: ``<out_dir>/scenes/<item_id>.json`` per scene,
    ``<out_dir>/manifest.jsonl``, and ``<out_dir>/expected.jsonl`` carrying
    the planted verdicts for self-validation.
    """
    from .constraints import constraint_set_to_dict

    out = Path(out_dir)
    (out / "scenes").mkdir(parents=True, exist_ok=True)
    results: dict[str, PlantResult] = {}
    manifest_lines: list[str] = []
    expected_lines: list[str] = []

    for i, spec in enumerate(specs):
        item_id = f"{spec.constraint_set.tag.value}-{i:04d}"
        result = plant_scene(spec)
        results[item_id] = result
        dump_scene(result.scene, out / "scenes" / f"{item_id}.json")
        manifest_lines.append(canonical_json({
            "item_id": item_id,
            "dimension": spec.constraint_set.tag.value,
            "constraints": constraint_set_to_dict(spec.constraint_set),
            "image": {"path": f"scenes/{item_id}.json"},
        }))
        expected_lines.append(canonical_json({
            "item_id": item_id,
            "verdict": result.verdict(tau_pass),
            "normalized_total": result.normalized_total,
        }))

    manifest = out / "manifest.jsonl"
    manifest.write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    (out / "expected.jsonl").write_text("\n".join(expected_lines) + "\n", encoding="utf-8")
    return manifest, results
