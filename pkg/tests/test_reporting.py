import csv
import io
import json

import pytest

from spatialscore.backends import FixtureBackend
from spatialscore.bench import run_bench
from spatialscore.config import EngineConfig
from spatialscore.constraints import AtomicConstraint, ConstraintSet, RelationSpec, Tag
from spatialscore.oracle import PlantSpec, materialize_suite, plant_scene, random_suite
from spatialscore.reasoner import score_image
from spatialscore.reporting import (
    DIMENSION_LABELS,
    dimension_label,
    bench_report_to_dict,
    render_bench_csv,
    render_bench_figure,
    render_bench_json,
    render_bench_markdown,
    render_report_json,
    render_report_markdown,
    report_to_dict,
)
from spatialscore.serialize import canonical_json


@pytest.fixture(scope="module")
def rich_spec():
    return PlantSpec(
        ConstraintSet(
            tag=Tag.POSITION,
            inclusions=(
                AtomicConstraint(entity_id="e1", category="cup", color_target="red",
                                 relation=RelationSpec("left_of", "e1", "e2")),
                AtomicConstraint(entity_id="e2", category="dog"),
            ),
            exclusions=(AtomicConstraint(entity_id="e3", category="cat"),),
            source_prompt="a red cup left of a dog and no cat",
        ),
        seed=51,
    )


@pytest.fixture(scope="module")
def rich_report(rich_spec):
    backend = FixtureBackend(default_scene=plant_scene(rich_spec).scene)
    config = EngineConfig()
    report = score_image(rich_spec.constraint_set, {"path": "x.json"}, backend, config)
    return report, config


@pytest.fixture(scope="module")
def bench_report(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    manifest, _ = materialize_suite(random_suite(10, seed=52, violated_fraction=0.5), root)
    # append one item that will error (its scene file never exists)
    with manifest.open("a", encoding="utf-8") as fh:
        doc = json.loads(manifest.read_text(encoding="utf-8").splitlines()[0])
        doc["item_id"] = "broken-0000"
        doc["image"] = {"path": "scenes/broken.json"}
        fh.write(canonical_json(doc) + "\n")
    return run_bench(manifest, FixtureBackend())


class TestScoreReportJson:
    def test_round_trip_and_shape(self, rich_report):
        report, config = rich_report
        text = render_report_json(report, config)
        assert text.endswith("\n")
        doc = json.loads(text)
        assert doc["schema_version"] == 1
        assert doc["tag"] == "position"
        assert doc["verdict"] is True
        assert doc["raw_total"] == pytest.approx(2.0)
        assert doc["exclusion_penalty"] == 0.0
        assert [c["entity_id"] for c in doc["inclusions"]] == ["e1", "e2"]
        assert [c["entity_id"] for c in doc["exclusions"]] == ["e3"]
        assert "jobs" not in doc["config"]
        assert doc["config"]["tau_pass"] == 0.8

    def test_key_order_is_stable(self, rich_report):
        report, config = rich_report
        doc = json.loads(render_report_json(report, config))
        assert list(doc) == [
            "schema_version", "tag", "prompt", "verdict", "normalized_total",
            "raw_total", "exclusion_penalty", "inclusions", "exclusions", "config",
        ]

    def test_geometric_relation_has_no_reasoning_key(self, rich_report):
        report, config = rich_report
        doc = report_to_dict(report, config)
        relation = doc["inclusions"][0]["relation"]
        assert relation["path"] == "geometric"
        assert relation["score"] == 1.0
        assert "reasoning" not in relation
        assert doc["inclusions"][1]["relation"] is None

    def test_cot_relation_carries_reasoning(self, rich_spec):
        backend = FixtureBackend(default_scene=plant_scene(rich_spec).scene)
        config = EngineConfig(relations="cot")
        report = score_image(rich_spec.constraint_set, {"path": "x.json"},
                             backend, config)
        doc = report_to_dict(report, config)
        relation = doc["inclusions"][0]["relation"]
        assert relation["path"] == "cot"
        assert isinstance(relation["reasoning"], str)

    def test_same_numbers_same_bytes(self, rich_spec):
        config = EngineConfig()
        texts = set()
        for _ in range(3):
            backend = FixtureBackend(default_scene=plant_scene(rich_spec).scene)
            report = score_image(rich_spec.constraint_set, {"path": "x.json"},
                                 backend, config)
            texts.add(render_report_json(report, config))
        assert len(texts) == 1


class TestScoreReportMarkdown:
    def test_rendering(self, rich_report):
        report, config = rich_report
        text = render_report_markdown(report, config)
        assert "- **Verdict:** PASS" in text
        assert "- **Prompt:** a red cup left of a dog and no cat" in text
        assert "| inclusion | e1 | cup |" in text
        assert "left_of(e1,e2)=1.000 [geometric]" in text
        assert "| exclusion | e3 | cat |" in text
        assert "color=1.000" in text
        # entities without a relation show a dash
        assert "| inclusion | e2 | dog | presence=1.000 | - |" in text

    def test_fail_verdict_and_empty_prompt(self, rich_spec):
        cset = ConstraintSet(tag=rich_spec.constraint_set.tag,
                             inclusions=rich_spec.constraint_set.inclusions,
                             exclusions=rich_spec.constraint_set.exclusions,
                             source_prompt="")
        spec = PlantSpec(cset, violations=(("e1", "color"),), seed=51)
        backend = FixtureBackend(default_scene=plant_scene(spec).scene)
        config = EngineConfig()
        report = score_image(cset, {"path": "x.json"}, backend, config)
        text = render_report_markdown(report, config)
        assert "- **Verdict:** FAIL" in text
        assert "- **Prompt:** (none)" in text
        assert "color=0.000" in text


class TestBenchRendering:
    def test_dict_shape(self, bench_report):
        doc = bench_report_to_dict(bench_report)
        assert doc["item_count"] == 11
        assert doc["error_count"] == 1
        assert doc["overall"]["total"] == 11
        assert doc["config"]["skip_errors"] is False
        assert len(doc["items"]) == 11
        for dim, entry in doc["dimensions"].items():
            assert entry["label"] == dimension_label(dim)
            assert entry["accuracy"] == pytest.approx(
                entry["correct"] / entry["total"] if entry["total"] else 0.0)

    def test_dimensions_presentation_order(self, bench_report):
        text = render_bench_json(bench_report)
        doc = json.loads(text, object_pairs_hook=lambda p: p)
        dims = [k for k, _ in dict(doc)["dimensions"]]
        headline = [d for d in DIMENSION_LABELS if d in dims]
        extras = sorted(d for d in dims if d not in DIMENSION_LABELS)
        assert dims == headline + extras

    def test_markdown_headline_row(self, bench_report):
        text = render_bench_markdown(bench_report)
        header = next(l for l in text.splitlines() if l.startswith("| P-Text"))
        assert header.startswith("| P-Text | C-Text | Cpx | Ori | 3DRel |")
        assert header.rstrip().endswith("| Overall |")
        assert "## Items" in text
        assert "| broken-0000 |" in text
        broken_row = next(l for l in text.splitlines() if "broken-0000" in l)
        assert "| error | - |" in broken_row

    def test_markdown_counts_line(self, bench_report):
        text = render_bench_markdown(bench_report)
        assert f"- **Items:** 11 (1 errored)" in text
        assert (f"- **Judgments:** {bench_report.overall.correct}/11 correct"
                in text)

    def test_csv(self, bench_report):
        text = render_bench_csv(bench_report)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["item_id", "dimension", "verdict", "normalized_total",
                           "correct_judgments", "total_judgments", "failures", "error"]
        assert len(rows) == 12
        by_id = {r[0]: r for r in rows[1:]}
        broken = by_id["broken-0000"]
        assert broken[2] == "error"
        assert broken[3] == ""
        assert "BackendUnavailable" in broken[7]
        ok = next(r for r in rows[1:] if r[2] in ("true", "false"))
        assert len(ok[3].split(".")[1]) == 9  # 9-decimal fixed point

    def test_figure_written(self, bench_report, tmp_path):
        out = render_bench_figure(bench_report, tmp_path / "acc.png")
        assert out == tmp_path / "acc.png"
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestLabels:
    def test_headline_labels(self):
        assert DIMENSION_LABELS == {
            "text_position": "P-Text",
            "text_count": "C-Text",
            "complex": "Cpx",
            "orientation": "Ori",
            "depth3d": "3DRel",
        }

    def test_unknown_dimension_passes_through(self):
        assert dimension_label("counting") == "counting"
