import pytest

from spatialscore.constraints import (
    COLOR_VOCAB,
    AtomicConstraint,
    ConstraintSet,
    OrientationTarget,
    RelationSpec,
    Tag,
    canonicalize,
    constraint_set_to_dict,
    normalize_color,
    parse_constraint_set,
)
from spatialscore.errors import DanglingRelationId, SchemaViolation


def make_set(**kwargs):
    defaults = dict(
        tag=Tag.POSITION,
        inclusions=(
            AtomicConstraint(entity_id="e1", category="cup",
                             relation=RelationSpec("on", "e1", "e2")),
            AtomicConstraint(entity_id="e2", category="table"),
        ),
        exclusions=(),
        source_prompt="a cup on a table",
    )
    defaults.update(kwargs)
    return ConstraintSet(**defaults)


class TestValidation:
    def test_empty_inclusions_rejected(self):
        with pytest.raises(SchemaViolation, match="inclusions"):
            ConstraintSet(tag=Tag.SINGLE_OBJECT, inclusions=())

    def test_duplicate_ids_rejected(self):
        with pytest.raises(SchemaViolation, match="duplicate"):
            ConstraintSet(
                tag=Tag.TWO_OBJECT,
                inclusions=(
                    AtomicConstraint(entity_id="e1", category="cup"),
                    AtomicConstraint(entity_id="e1", category="dog"),
                ),
            )

    def test_duplicate_across_groups_rejected(self):
        with pytest.raises(SchemaViolation, match="duplicate"):
            ConstraintSet(
                tag=Tag.SINGLE_OBJECT,
                inclusions=(AtomicConstraint(entity_id="e1", category="cup"),),
                exclusions=(AtomicConstraint(entity_id="e1", category="dog"),),
            )

    def test_dangling_relation_rejected(self):
        with pytest.raises(DanglingRelationId) as exc:
            ConstraintSet(
                tag=Tag.POSITION,
                inclusions=(
                    AtomicConstraint(entity_id="e1", category="cup",
                                     relation=RelationSpec("on", "e1", "e9")),
                ),
            )
        assert "e9" in str(exc.value)

    def test_relation_self_reference_rejected(self):
        with pytest.raises(SchemaViolation, match="differ"):
            RelationSpec("on", "e1", "e1")

    def test_count_must_be_positive(self):
        with pytest.raises(SchemaViolation, match="count"):
            AtomicConstraint(entity_id="e1", category="cup", count_target=0)

    def test_depth_rank_must_be_positive(self):
        with pytest.raises(SchemaViolation, match="depth_rank"):
            AtomicConstraint(entity_id="e1", category="cup", depth_rank_target=0)

    def test_empty_text_rejected(self):
        with pytest.raises(SchemaViolation, match="text"):
            AtomicConstraint(entity_id="e1", category="cup", text_target="")

    def test_orientation_range(self):
        with pytest.raises(SchemaViolation):
            OrientationTarget(360.0)
        with pytest.raises(SchemaViolation):
            OrientationTarget(-1.0)
        assert OrientationTarget(0.0).mode == "cat8"

    def test_pure_presence(self):
        assert AtomicConstraint(entity_id="e1", category="cup").is_pure_presence
        assert not AtomicConstraint(entity_id="e1", category="cup", count_target=2).is_pure_presence

    def test_entity_lookup(self):
        cs = make_set()
        assert cs.entity("e2").category == "table"
        with pytest.raises(KeyError):
            cs.entity("e9")


class TestCanonicalize:
    def test_lowercases_and_folds_synonyms(self):
        cs = ConstraintSet(
            tag=Tag.COLOR,
            inclusions=(AtomicConstraint(entity_id="e1", category="  Cup ",
                                         color_target="Grey"),),
        )
        out = canonicalize(cs)
        assert out.inclusions[0].category == "cup"
        assert out.inclusions[0].color_target == "gray"

    def test_violet_folds_to_purple(self):
        assert normalize_color("Violet") == "purple"
        assert normalize_color("RED") == "red"

    def test_exclusions_sorted_by_id(self):
        cs = ConstraintSet(
            tag=Tag.SINGLE_OBJECT,
            inclusions=(AtomicConstraint(entity_id="e1", category="cup"),),
            exclusions=(
                AtomicConstraint(entity_id="e3", category="spoon"),
                AtomicConstraint(entity_id="e2", category="fork"),
            ),
        )
        out = canonicalize(cs)
        assert [c.entity_id for c in out.exclusions] == ["e2", "e3"]

    def test_idempotent(self):
        cs = canonicalize(make_set())
        assert canonicalize(cs) == cs

    def test_text_case_preserved(self):
        cs = ConstraintSet(
            tag=Tag.TEXT_POSITION,
            inclusions=(AtomicConstraint(entity_id="e1", category="sign",
                                         text_target="OPEN Now"),),
        )
        assert canonicalize(cs).inclusions[0].text_target == "OPEN Now"


class TestJsonRoundTrip:
    def test_roundtrip(self):
        cs = make_set(
            exclusions=(AtomicConstraint(entity_id="e3", category="spoon"),),
        )
        doc = constraint_set_to_dict(cs)
        assert parse_constraint_set(doc) == cs

    def test_full_feature_roundtrip(self):
        cs = ConstraintSet(
            tag=Tag.COMPLEX,
            inclusions=(
                AtomicConstraint(
                    entity_id="e1", category="cup", count_target=2,
                    color_target="red",
                    orientation_target=OrientationTarget(90.0, "cont"),
                    depth_rank_target=1, text_target="A",
                    relation=RelationSpec("on", "e1", "e2"),
                ),
                AtomicConstraint(entity_id="e2", category="table"),
            ),
            source_prompt="p",
        )
        assert parse_constraint_set(constraint_set_to_dict(cs)) == cs

    def test_unknown_top_field(self):
        with pytest.raises(SchemaViolation, match="unknown"):
            parse_constraint_set({"tag": "color", "inclusions": [], "extra": 1})

    def test_unknown_tag(self):
        with pytest.raises(SchemaViolation, match="tag"):
            parse_constraint_set({"tag": "nope", "inclusions": []})

    def test_unknown_constraint_field_path(self):
        with pytest.raises(SchemaViolation) as exc:
            parse_constraint_set({
                "tag": "color",
                "inclusions": [{"id": "e1", "category": "cup", "hue": "red"}],
            })
        assert exc.value.path == "inclusions[0]"

    def test_color_outside_vocabulary(self):
        with pytest.raises(SchemaViolation, match="vocabulary"):
            parse_constraint_set({
                "tag": "color",
                "inclusions": [{"id": "e1", "category": "cup", "color": "mauve"}],
            })

    def test_color_synonym_accepted_and_folded(self):
        cs = parse_constraint_set({
            "tag": "color",
            "inclusions": [{"id": "e1", "category": "cup", "color": "grey"}],
        })
        assert cs.inclusions[0].color_target == "gray"

    def test_count_bool_rejected(self):
        with pytest.raises(SchemaViolation, match="integer"):
            parse_constraint_set({
                "tag": "counting",
                "inclusions": [{"id": "e1", "category": "cup", "count": True}],
            })

    def test_relation_missing_key_path(self):
        with pytest.raises(SchemaViolation) as exc:
            parse_constraint_set({
                "tag": "position",
                "inclusions": [
                    {"id": "e1", "category": "cup",
                     "relation": {"name": "on", "subject": "e1"}},
                    {"id": "e2", "category": "table"},
                ],
            })
        assert exc.value.path == "inclusions[0].relation.object"

    def test_dangling_relation_through_parse(self):
        with pytest.raises(DanglingRelationId):
            parse_constraint_set({
                "tag": "position",
                "inclusions": [
                    {"id": "e1", "category": "cup",
                     "relation": {"name": "on", "subject": "e1", "object": "e7"}},
                ],
            })

    def test_orientation_validation(self):
        with pytest.raises(SchemaViolation, match="360"):
            parse_constraint_set({
                "tag": "orientation",
                "inclusions": [{"id": "e1", "category": "car",
                                "orientation": {"degrees": 400}}],
            })

    def test_non_canonical_relation_allowed(self):
        cs = parse_constraint_set({
            "tag": "position",
            "inclusions": [
                {"id": "e1", "category": "cup",
                 "relation": {"name": "leaning against", "subject": "e1", "object": "e2"}},
                {"id": "e2", "category": "wall"},
            ],
        })
        assert not cs.inclusions[0].relation.is_canonical


def test_color_vocab_has_eleven_entries():
    assert len(COLOR_VOCAB) == 11
    assert len(set(COLOR_VOCAB)) == 11
