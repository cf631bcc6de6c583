"""Report rendering: canonical JSON, Markdown tables, CSV, and figures.

JSON output goes through :func:`spatialscore.serialize.canonical_json`, so
two runs that compute the same numbers emit the same bytes — that is the
property the service-parity and parallel-determinism guarantees lean on.
Figures are a presentation extra and carry no byte-stability promise.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .bench import BenchReport
from .config import EngineConfig
from .reasoner import ConstraintScore, RelationVerdict, ScoreReport
from .serialize import canonical_json

SCHEMA_VERSION = 1

# Presentation labels for the five headline dimensions, in table order.
DIMENSION_LABELS = {
    "text_position": "P-Text",
    "text_count": "C-Text",
    "complex": "Cpx",
    "orientation": "Ori",
    "depth3d": "3DRel",
}
HEADLINE_ORDER = tuple(DIMENSION_LABELS)


def dimension_label(tag_value: str) -> str:
    return DIMENSION_LABELS.get(tag_value, tag_value)


def _relation_to_dict(v: RelationVerdict) -> dict:
    doc = {
        "name": v.relation.name,
        "subject": v.relation.subject,
        "object": v.relation.object,
        "score": v.score,
        "path": v.path,
    }
    if v.reasoning is not None:
        doc["reasoning"] = v.reasoning
    return doc


def _constraint_to_dict(cs: ConstraintScore) -> dict:
    return {
        "entity_id": cs.entity_id,
        "category": cs.category,
        "facets": cs.facets.facets(),
        "relation": None if cs.relation is None else _relation_to_dict(cs.relation),
        "composed": cs.composed,
    }


def report_to_dict(report: ScoreReport, config: EngineConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tag": report.tag.value,
        "prompt": report.prompt,
        "verdict": report.verdict,
        "normalized_total": report.normalized_total,
        "raw_total": report.raw_total,
        "exclusion_penalty": report.exclusion_penalty,
        "inclusions": [_constraint_to_dict(cs) for cs in report.inclusions],
        "exclusions": [_constraint_to_dict(cs) for cs in report.exclusions],
        "config": config.echo(),
    }


def render_report_json(report: ScoreReport, config: EngineConfig) -> str:
    return canonical_json(report_to_dict(report, config)) + "\n"


def _facet_cell(cs: ConstraintScore) -> str:
    parts = [f"{name}={value:.3f}" for name, value in cs.facets.facets().items()]
    return ", ".join(parts) if parts else "-"


def _relation_cell(cs: ConstraintScore) -> str:
    if cs.relation is None:
        return "-"
    v = cs.relation
    return f"{v.relation.name}({v.relation.subject},{v.relation.object})={v.score:.3f} [{v.path}]"


def render_report_markdown(report: ScoreReport, config: EngineConfig) -> str:
    lines = [
        "# Score report",
        "",
        f"- **Prompt:** {report.prompt}" if report.prompt else "- **Prompt:** (none)",
        f"- **Tag:** {report.tag.value}",
        f"- **Verdict:** {'PASS' if report.verdict else 'FAIL'}",
        f"- **Normalized total:** {report.normalized_total:.6f}",
        f"- **Raw total:** {report.raw_total:.6f}"
        f" (exclusion penalty {report.exclusion_penalty:.6f})",
        f"- **Config:** " + ", ".join(f"{k}={v}" for k, v in config.echo().items()),
        "",
        "| side | entity | category | facets | relation | composed |",
        "| --- | --- | --- | --- | --- | ---: |",
    ]
    for side, group in (("inclusion", report.inclusions),
                        ("exclusion", report.exclusions)):
        for cs in group:
            lines.append(
                f"| {side} | {cs.entity_id} | {cs.category} | {_facet_cell(cs)} "
                f"| {_relation_cell(cs)} | {cs.composed:.6f} |"
            )
    return "\n".join(lines) + "\n"


# --- bench reports ---------------------------------------------------------------


def _presentation_order(report: BenchReport) -> list[str]:
    present = list(report.dimensions)
    headline = [d for d in HEADLINE_ORDER if d in report.dimensions]
    extras = sorted(d for d in present if d not in DIMENSION_LABELS)
    return headline + extras


def bench_report_to_dict(report: BenchReport) -> dict:
    from .bench import result_to_dict

    dims = {}
    for dim in _presentation_order(report):
        score = report.dimensions[dim]
        dims[dim] = {
            "label": dimension_label(dim),
            "correct": score.correct,
            "total": score.total,
            "accuracy": score.accuracy,
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "overall": {
            "correct": report.overall.correct,
            "total": report.overall.total,
            "accuracy": report.overall.accuracy,
        },
        "dimensions": dims,
        "item_count": len(report.items),
        "error_count": report.error_count,
        "config": report.config.bench_echo(),
        "items": [result_to_dict(r) for r in report.items],
    }


def render_bench_json(report: BenchReport) -> str:
    return canonical_json(bench_report_to_dict(report)) + "\n"


def render_bench_markdown(report: BenchReport) -> str:
    order = _presentation_order(report)
    headline = [d for d in HEADLINE_ORDER]
    extras = [d for d in order if d not in DIMENSION_LABELS]

    def cell(dim: str) -> str:
        score = report.dimensions.get(dim)
        if score is None or score.total == 0:
            return "-"
        return f"{score.accuracy:.3f}"

    header = [dimension_label(d) for d in headline + extras] + ["Overall"]
    row = [cell(d) for d in headline + extras] + [f"{report.overall.accuracy:.3f}"]

    lines = [
        "# Benchmark report",
        "",
        f"- **Items:** {len(report.items)} ({report.error_count} errored)",
        f"- **Judgments:** {report.overall.correct}/{report.overall.total} correct",
        "- **Config:** "
        + ", ".join(f"{k}={v}" for k, v in report.config.bench_echo().items()),
        "",
        "| " + " | ".join(header) + " |",
        "|" + "|".join(" ---: " for _ in header) + "|",
        "| " + " | ".join(row) + " |",
        "",
        "## Items",
        "",
        "| item_id | dimension | verdict | normalized | failures |",
        "| --- | --- | --- | ---: | --- |",
    ]
    for r in report.items:
        verdict = "error" if r.verdict is None else ("pass" if r.verdict else "fail")
        norm = "-" if r.normalized_total is None else f"{r.normalized_total:.6f}"
        failures = ", ".join(r.failures) if r.failures else "-"
        lines.append(f"| {r.item_id} | {r.dimension} | {verdict} | {norm} | {failures} |")
    return "\n".join(lines) + "\n"


def render_bench_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item_id", "dimension", "verdict", "normalized_total",
                     "correct_judgments", "total_judgments", "failures", "error"])
    for r in report.items:
        writer.writerow([
            r.item_id,
            r.dimension,
            "error" if r.verdict is None else str(r.verdict).lower(),
            "" if r.normalized_total is None else f"{r.normalized_total:.9f}",
            r.correct_judgments,
            r.total_judgments,
            "|".join(r.failures),
            r.error,
        ])
    return buf.getvalue()


def render_bench_figure(report: BenchReport, path: str | Path) -> Path:
    """Bar chart of per-dimension accuracy, overall drawn last. PNG bytes are
    not covered by any determinism guarantee."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    order = _presentation_order(report)
    labels = [dimension_label(d) for d in order] + ["Overall"]
    values = [report.dimensions[d].accuracy for d in order] + [report.overall.accuracy]
    colors = ["#4878a8"] * len(order) + ["#b8860b"]

    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(labels)), 4.0))
    bars = ax.bar(range(len(labels)), values, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("accuracy")
    ax.set_title("Per-dimension accuracy")
    for bar, value in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, value + 0.02, f"{value:.3f}",
                ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
