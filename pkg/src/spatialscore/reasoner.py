"""Scoring pipeline: bind entities, evaluate relations, compose, aggregate.

The flow for one image:

1. decompose the prompt (templates first, backend fallback) unless a
   constraint set was handed in directly;
2. detect once per distinct category, OCR once if any text is constrained;
3. bind each entity to the detection that best supports its facets, greedy
   over (pair score, confidence, x0, y0, declaration order), inclusions
   before exclusions, same-category entities claiming distinct detections;
4. query depth for all bound boxes when ranks or depth relations are needed;
5. evaluate relations on the geometric rule path, or through the backend's
   chain-of-thought scorer for non-canonical relations (or always, under
   ``relations="cot"``);
6. compose per-constraint scores (product of facets, gated by presence) and
   aggregate the signed total: sum over inclusions minus sum over exclusions.

Counts are per category: every entity constraining a category's count sees
the same detection total. Depth ranks are computed over all bound entities
of the constraint set, nearest = rank 1, ties by x0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .backends.base import Detection, PerceptionBackend, TextDetection
from .config import EngineConfig
from .constraints import (
    CANONICAL_RELATIONS,
    AtomicConstraint,
    ConstraintSet,
    RelationSpec,
    Tag,
    parse_constraint_set,
)
from .errors import BackendUnavailable, UnrecognizedTemplate
from .geometry import BBox
from .relations import evaluate_relation_geometric
from .subrewards import (
    DELTA_CAT8,
    DELTA_CONT,
    SubRewardVector,
    assign_depth_ranks,
    count_reward,
    color_reward,
    depth_reward,
    orientation_reward,
    text_reward,
)
from .templates import decompose_template

GEOMETRIC = "geometric"
COT = "cot"


@dataclass(frozen=True, slots=True)
class RelationVerdict:
    relation: RelationSpec
    score: float
    path: str  # GEOMETRIC or COT
    subject_box: BBox | None
    object_box: BBox | None
    reasoning: str | None = None

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"relation score out of [0,1]: {self.score}")
        if self.path not in (GEOMETRIC, COT):
            raise ValueError(f"unknown relation path {self.path!r}")
        if self.path == COT and self.reasoning is None:
            raise ValueError("cot verdicts must carry reasoning")


@dataclass(frozen=True, slots=True)
class ConstraintScore:
    entity_id: str
    category: str
    facets: SubRewardVector
    relation: RelationVerdict | None
    composed: float


@dataclass(frozen=True, slots=True)
class ScoreReport:
    tag: Tag
    prompt: str
    inclusions: tuple[ConstraintScore, ...]
    exclusions: tuple[ConstraintScore, ...]
    raw_total: float
    normalized_total: float
    exclusion_penalty: float
    verdict: bool


PairScorer = Callable[[AtomicConstraint, Detection], float]


def bind_entities(
    cset: ConstraintSet,
    detections: Mapping[str, Sequence[Detection]],
    pair_scorer: PairScorer,
) -> dict[str, Detection | None]:
    """Assign each entity at most one detection of its category.

    Greedy over descending pair score; ties break by detection confidence,
    x0, y0, then entity declaration order. Inclusions bind before exclusions
    so an undesired entity can never steal a detection a desired one needs.
    Entities left without a candidate map to None (presence 0 downstream).
    """
    binding: dict[str, Detection | None] = {}
    used: set[tuple[str, int]] = set()

    for group in (cset.inclusions, cset.exclusions):
        scored = []
        for order, constraint in enumerate(group):
            for det_idx, det in enumerate(detections.get(constraint.category, ())):
                if (constraint.category, det_idx) in used:
                    continue
                score = pair_scorer(constraint, det)
                scored.append((
                    -score, -det.confidence, det.box.x0, det.box.y0, order, det_idx,
                    constraint.entity_id, det,
                ))
        scored.sort(key=lambda row: row[:6])
        for row in scored:
            _, _, _, _, order, det_idx, entity_id, det = row
            category = group[order].category
            if entity_id in binding or (category, det_idx) in used:
                continue
            binding[entity_id] = det
            used.add((category, det_idx))
        for constraint in group:
            binding.setdefault(constraint.entity_id, None)

    return binding


def orientation_delta(mode: str) -> float:
    return DELTA_CAT8 if mode == "cat8" else DELTA_CONT


def compose_constraint_score(
    facets: SubRewardVector, relation_verdict: RelationVerdict | None = None
) -> float:
    """Product of all present facet scores and the relation score; a missing
    entity (presence 0) gates the whole constraint to 0."""
    if facets.presence == 0.0:
        return 0.0
    score = 1.0
    for value in facets.facets().values():
        score *= value
    if relation_verdict is not None:
        score *= relation_verdict.score
    return score


def build_cot_payload(
    relation: RelationSpec,
    subject_box: BBox,
    object_box: BBox,
    subject_facets: SubRewardVector,
    object_facets: SubRewardVector,
    image: dict,
) -> dict:
    """The reasoning request: target relation, the two detected boxes, the
    attribute rewards already computed, and the image reference. Field
    order is fixed so serialization is byte-stable."""
    if subject_box is None:
        raise ValueError("subject box is required to build a cot payload")
    if object_box is None:
        raise ValueError("object box is required to build a cot payload")
    return {
        "relation": {
            "name": relation.name,
            "subject": relation.subject,
            "object": relation.object,
        },
        "boxes": {
            "subject": subject_box.to_list(),
            "object": object_box.to_list(),
        },
        "facets": {
            "subject": subject_facets.facets(),
            "object": object_facets.facets(),
        },
        "image": image,
    }


def aggregate_total(
    tag: Tag,
    prompt: str,
    inclusions: Sequence[ConstraintScore],
    exclusions: Sequence[ConstraintScore],
    tau_pass: float,
) -> ScoreReport:
    """Signed sum over composed scores, normalized by the inclusion count."""
    gained = float(sum(c.composed for c in inclusions))
    penalty = float(sum(c.composed for c in exclusions))
    raw = gained - penalty
    normalized = min(max(raw / max(1, len(inclusions)), 0.0), 1.0)
    return ScoreReport(
        tag=tag,
        prompt=prompt,
        inclusions=tuple(inclusions),
        exclusions=tuple(exclusions),
        raw_total=raw,
        normalized_total=normalized,
        exclusion_penalty=penalty,
        verdict=normalized >= tau_pass,
    )


def decompose_prompt(prompt: str, backend: PerceptionBackend | None = None) -> ConstraintSet:
    """Template grammar first; fall back to the backend's decomposer.

    When the backend cannot decompose either, the template failure is the
    actionable signal, so that is what propagates (the backend error rides
    along as the cause).
    """
    try:
        return decompose_template(prompt)
    except UnrecognizedTemplate as template_err:
        if backend is None:
            raise
        try:
            return backend.decompose(prompt)
        except BackendUnavailable as backend_err:
            raise UnrecognizedTemplate(
                f"{template_err} (backend fallback unavailable: {backend_err})"
            ) from backend_err


class _Scorer:
    """One scoring pass over one image; keeps the per-image query caches."""

    def __init__(self, cset: ConstraintSet, image: dict, backend: PerceptionBackend,
                 config: EngineConfig):
        self.cset = cset
        self.image = image
        self.backend = backend
        self.config = config
        self.everything = list(cset.inclusions) + list(cset.exclusions)
        self.detections: dict[str, list[Detection]] = {}
        self.texts: list[TextDetection] | None = None
        self._color_cache: dict[tuple, str] = {}
        self._orientation_cache: dict[tuple, float] = {}
        self.depth_by_entity: dict[str, float] = {}
        self.rank_by_entity: dict[str, int] = {}

    # -- perception queries, cached and in deterministic order ---------------

    def _detect_all(self) -> None:
        for constraint in self.everything:
            category = constraint.category
            if category not in self.detections:
                self.detections[category] = self.backend.detect_objects(
                    self.image, category, self.config.tau_det
                )

    def _ocr(self) -> list[tuple[str, BBox]]:
        if self.texts is None:
            self.texts = self.backend.recognize_text(self.image)
        return [(t.text, t.box) for t in self.texts]

    def _color_of(self, box: BBox, category: str) -> str:
        key = (box.x0, box.y0, box.x1, box.y1, category)
        if key not in self._color_cache:
            self._color_cache[key] = self.backend.classify_color(self.image, box, category)
        return self._color_cache[key]

    def _orientation_of(self, box: BBox) -> float:
        key = (box.x0, box.y0, box.x1, box.y1)
        if key not in self._orientation_cache:
            self._orientation_cache[key] = self.backend.classify_orientation(self.image, box)
        return self._orientation_cache[key]

    # -- candidate scoring for binding ---------------------------------------

    def _candidate_facets(self, constraint: AtomicConstraint, det: Detection) -> dict[str, float]:
        out: dict[str, float] = {}
        if constraint.color_target is not None:
            out["color"] = color_reward(
                self._color_of(det.box, constraint.category), constraint.color_target
            )
        if constraint.orientation_target is not None:
            target = constraint.orientation_target
            out["orientation"] = orientation_reward(
                self._orientation_of(det.box), target.degrees, orientation_delta(target.mode)
            )
        if constraint.text_target is not None:
            out["text"] = text_reward(constraint.text_target, det.box, self._ocr())
        return out

    def _pair_score(self, constraint: AtomicConstraint, det: Detection) -> float:
        score = 1.0
        for value in self._candidate_facets(constraint, det).values():
            score *= value
        return score

    # -- depth ----------------------------------------------------------------

    def _need_depth(self) -> bool:
        for c in self.everything:
            if c.depth_rank_target is not None:
                return True
            if c.relation is not None and c.relation.name in ("behind", "in_front_of"):
                return True
        return False

    def _measure_depths(self, binding: Mapping[str, Detection | None]) -> None:
        bound = [(c.entity_id, binding[c.entity_id].box)
                 for c in self.everything if binding[c.entity_id] is not None]
        if not bound:
            return
        depths = self.backend.estimate_depth(self.image, [box for _, box in bound])
        for (entity_id, _), depth in zip(bound, depths):
            self.depth_by_entity[entity_id] = depth
        ranks = assign_depth_ranks([(depth, box.x0) for (_, box), depth
                                    in zip(bound, depths)])
        for (entity_id, _), rank in zip(bound, ranks):
            self.rank_by_entity[entity_id] = rank

    # -- per-constraint assembly ------------------------------------------------

    def _facet_vector(self, constraint: AtomicConstraint,
                      binding: Mapping[str, Detection | None]) -> SubRewardVector:
        det = binding[constraint.entity_id]
        bound = det is not None
        count = color = orientation = depth = text = None

        if constraint.count_target is not None:
            count = count_reward(
                len(self.detections.get(constraint.category, ())), constraint.count_target
            )
        if bound:
            candidate = self._candidate_facets(constraint, det)
            color = candidate.get("color")
            orientation = candidate.get("orientation")
            text = candidate.get("text")
            if constraint.depth_rank_target is not None:
                rank = self.rank_by_entity.get(constraint.entity_id)
                depth = 0.0 if rank is None else depth_reward(rank, constraint.depth_rank_target)
        else:
            # Unobservable facets score 0; count stays category-global.
            color = 0.0 if constraint.color_target is not None else None
            orientation = 0.0 if constraint.orientation_target is not None else None
            text = 0.0 if constraint.text_target is not None else None
            depth = 0.0 if constraint.depth_rank_target is not None else None

        return SubRewardVector(
            presence=1.0 if bound else 0.0,
            count=count,
            color=color,
            orientation=orientation,
            depth=depth,
            text=text,
            bound_boxes=(det.box,) if bound else (),
        )

    def _relation_verdict(
        self,
        constraint: AtomicConstraint,
        binding: Mapping[str, Detection | None],
        vectors: Mapping[str, SubRewardVector],
    ) -> RelationVerdict | None:
        relation = constraint.relation
        if relation is None:
            return None
        subject_det = binding.get(relation.subject)
        object_det = binding.get(relation.object)
        subject_box = subject_det.box if subject_det else None
        object_box = object_det.box if object_det else None
        use_cot = self.config.relations == "cot" or relation.name not in CANONICAL_RELATIONS

        if subject_box is None or object_box is None:
            missing = relation.subject if subject_box is None else relation.object
            return RelationVerdict(
                relation=relation, score=0.0, path=GEOMETRIC,
                subject_box=subject_box, object_box=object_box,
                reasoning=f"entity {missing} is not bound to any detection",
            )

        if use_cot:
            payload = build_cot_payload(
                relation, subject_box, object_box,
                vectors[relation.subject], vectors[relation.object], self.image,
            )
            reply = self.backend.cot_score(payload)
            return RelationVerdict(
                relation=relation, score=reply.score, path=COT,
                subject_box=subject_box, object_box=object_box,
                reasoning=reply.reasoning,
            )

        depths = None
        if relation.name in ("behind", "in_front_of"):
            depths = (
                self.depth_by_entity[relation.subject],
                self.depth_by_entity[relation.object],
            )
        score = evaluate_relation_geometric(
            relation.name, subject_box, object_box, depths,
            theta_pos=self.config.theta_pos,
        )
        return RelationVerdict(
            relation=relation, score=score, path=GEOMETRIC,
            subject_box=subject_box, object_box=object_box,
        )

    # -- driver -----------------------------------------------------------------

    def run(self) -> ScoreReport:
        self._detect_all()
        binding = bind_entities(self.cset, self.detections, self._pair_score)
        if self._need_depth():
            self._measure_depths(binding)

        vectors = {c.entity_id: self._facet_vector(c, binding) for c in self.everything}

        def score_group(group: Sequence[AtomicConstraint]) -> list[ConstraintScore]:
            out = []
            for constraint in group:
                facets = vectors[constraint.entity_id]
                verdict = self._relation_verdict(constraint, binding, vectors)
                out.append(ConstraintScore(
                    entity_id=constraint.entity_id,
                    category=constraint.category,
                    facets=facets,
                    relation=verdict,
                    composed=compose_constraint_score(facets, verdict),
                ))
            return out

        return aggregate_total(
            self.cset.tag,
            self.cset.source_prompt,
            score_group(self.cset.inclusions),
            score_group(self.cset.exclusions),
            self.config.tau_pass,
        )


def score_image(
    source: str | dict | ConstraintSet,
    image: dict,
    backend: PerceptionBackend,
    config: EngineConfig | None = None,
) -> ScoreReport:
    """Score one image against a prompt, a constraint-set JSON document, or
    a ready-made :class:`ConstraintSet`."""
    config = config or EngineConfig()
    if isinstance(source, str):
        cset = decompose_prompt(source, backend)
    elif isinstance(source, dict):
        cset = parse_constraint_set(source)
    else:
        cset = source
    return _Scorer(cset, image, backend, config).run()
