"""Benchmark harness: manifest in, per-item binary decisions out.

A manifest is JSON lines, one item per line::

    {"item_id": "...", "dimension": "<tag>", "constraints": {...},
     "image": {"path": "scenes/x.json"}}

Relative image paths resolve against the manifest's directory. Items are
independent, so the harness fans out over a thread pool when ``jobs > 1``
and then merges results back into manifest order — reports are identical
whatever the worker count. A progress file (JSON lines keyed by item_id)
makes interrupted runs resumable; resuming under a different engine config
than the original run is on the caller.

An item is judged correct when its verdict is true (the image satisfies the
prompt). In per-constraint mode every inclusion judges correct at composed
>= tau_pass and every exclusion at composed < tau_pass, and accuracy
normalizes over the judgment count instead of the item count. Items that
error judge incorrect unless ``skip_errors`` drops them from the
denominators.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .backends.base import PerceptionBackend, validate_image_ref
from .config import EngineConfig
from .constraints import ConstraintSet, Tag, parse_constraint_set
from .errors import EmptyManifest, SchemaViolation, SpatialScoreError
from .reasoner import score_image
from .serialize import canonical_json


@dataclass(frozen=True, slots=True)
class BenchItem:
    item_id: str
    dimension: str
    constraints: ConstraintSet
    image: dict


@dataclass(frozen=True, slots=True)
class ItemResult:
    item_id: str
    dimension: str
    verdict: bool | None  # None when the item errored
    normalized_total: float | None
    failures: tuple[str, ...]
    correct_judgments: int
    total_judgments: int
    error: str = ""


@dataclass(frozen=True, slots=True)
class DimensionScore:
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


@dataclass(frozen=True, slots=True)
class BenchReport:
    items: tuple[ItemResult, ...]
    dimensions: dict[str, DimensionScore]
    overall: DimensionScore
    config: EngineConfig

    @property
    def error_count(self) -> int:
        return sum(1 for r in self.items if r.verdict is None)


def load_manifest(path: str | Path) -> list[BenchItem]:
    """Parse a JSONL manifest; blank lines are allowed and skipped."""
    path = Path(path)
    base = path.parent
    items: list[BenchItem] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        where = f"items[{lineno}]"
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaViolation(where, f"invalid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise SchemaViolation(where, "must be an object")
        unknown = set(doc) - {"item_id", "dimension", "constraints", "image"}
        if unknown:
            raise SchemaViolation(where, f"unknown fields: {sorted(unknown)}")

        item_id = doc.get("item_id")
        if not isinstance(item_id, str) or not item_id:
            raise SchemaViolation(f"{where}.item_id", "must be a non-empty string")
        if item_id in seen:
            raise SchemaViolation(f"{where}.item_id", f"duplicate item_id {item_id!r}")
        seen.add(item_id)

        dimension = doc.get("dimension")
        try:
            Tag(dimension)
        except ValueError:
            raise SchemaViolation(
                f"{where}.dimension", f"{dimension!r} is not a known tag"
            ) from None

        try:
            cset = parse_constraint_set(doc.get("constraints"))
        except SchemaViolation as e:
            raise SchemaViolation(f"{where}.constraints.{e.path}",
                                  str(e).removeprefix(e.path + ": ")) from None
        if cset.tag.value != dimension:
            raise SchemaViolation(f"{where}.dimension",
                                  f"{dimension!r} does not match constraint tag "
                                  f"{cset.tag.value!r}")

        image = validate_image_ref(doc.get("image"), path=f"{where}.image")
        if "path" in image and not Path(image["path"]).is_absolute():
            image = {"path": str(base / image["path"])}

        items.append(BenchItem(item_id, dimension, cset, image))
    return items


def _judgment_count(cset: ConstraintSet, config: EngineConfig) -> int:
    if config.per_constraint:
        return len(cset.inclusions) + len(cset.exclusions)
    return 1


def evaluate_item(item: BenchItem, backend: PerceptionBackend,
                  config: EngineConfig) -> ItemResult:
    """Score one item; failures never propagate, they become error results."""
    try:
        report = score_image(item.constraints, item.image, backend, config)
    except (SpatialScoreError, OSError, ValueError) as e:
        return ItemResult(
            item_id=item.item_id,
            dimension=item.dimension,
            verdict=None,
            normalized_total=None,
            failures=(),
            correct_judgments=0,
            total_judgments=_judgment_count(item.constraints, config),
            error=f"{type(e).__name__}: {e}",
        )
    failures = tuple(
        cs.entity_id for cs in report.inclusions if cs.composed < config.tau_pass
    ) + tuple(
        cs.entity_id for cs in report.exclusions if cs.composed >= config.tau_pass
    )
    if config.per_constraint:
        total = _judgment_count(item.constraints, config)
        correct = total - len(failures)
    else:
        total = 1
        correct = 1 if report.verdict else 0
    return ItemResult(
        item_id=item.item_id,
        dimension=item.dimension,
        verdict=report.verdict,
        normalized_total=report.normalized_total,
        failures=failures,
        correct_judgments=correct,
        total_judgments=total,
    )


def result_to_dict(r: ItemResult) -> dict:
    return {
        "item_id": r.item_id,
        "dimension": r.dimension,
        "verdict": "error" if r.verdict is None else r.verdict,
        "normalized_total": r.normalized_total,
        "failures": list(r.failures),
        "correct_judgments": r.correct_judgments,
        "total_judgments": r.total_judgments,
        "error": r.error,
    }


def _result_from_dict(doc: dict) -> ItemResult:
    verdict = doc["verdict"]
    return ItemResult(
        item_id=doc["item_id"],
        dimension=doc["dimension"],
        verdict=None if verdict == "error" else bool(verdict),
        normalized_total=doc["normalized_total"],
        failures=tuple(doc["failures"]),
        correct_judgments=doc["correct_judgments"],
        total_judgments=doc["total_judgments"],
        error=doc.get("error", ""),
    )


def _load_progress(path: Path) -> dict[str, ItemResult]:
    """Completed results from a progress file; errored items are dropped so
    a resumed run retries them (resume exists to recover from flaky
    backends, not to pin their failures)."""
    done: dict[str, ItemResult] = {}
    if not path.exists():
        return done
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            result = _result_from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, TypeError):
            continue  # half-written trailing line from an interrupted run
        if result.verdict is not None:
            done[result.item_id] = result
    return done


def _aggregate(results: list[ItemResult], config: EngineConfig) -> BenchReport:
    dimensions: dict[str, DimensionScore] = {}
    correct = total = 0
    counted: dict[str, list[int]] = {}
    for r in results:
        counted.setdefault(r.dimension, [0, 0])
        if r.verdict is None and config.skip_errors:
            continue
        bucket = counted[r.dimension]
        bucket[0] += r.correct_judgments
        bucket[1] += r.total_judgments
        correct += r.correct_judgments
        total += r.total_judgments
    for dim, (c, t) in counted.items():
        dimensions[dim] = DimensionScore(c, t)
    return BenchReport(
        items=tuple(results),
        dimensions=dimensions,
        overall=DimensionScore(correct, total),
        config=config,
    )


def run_bench(
    manifest: str | Path | list[BenchItem],
    backend: PerceptionBackend,
    config: EngineConfig | None = None,
    progress: str | Path | None = None,
) -> BenchReport:
    """Evaluate a manifest and aggregate accuracies per dimension.

    ``progress`` names a JSONL file: completed items are appended as they
    finish and already-present items are not re-run.
    """
    config = config or EngineConfig()
    items = manifest if isinstance(manifest, list) else load_manifest(manifest)
    if not items:
        raise EmptyManifest("manifest contains no items")

    done: dict[str, ItemResult] = {}
    progress_path = Path(progress) if progress is not None else None
    if progress_path is not None:
        done = _load_progress(progress_path)

    pending = [item for item in items if item.item_id not in done]
    write_lock = threading.Lock()

    def record(result: ItemResult) -> ItemResult:
        if progress_path is not None:
            line = canonical_json(result_to_dict(result)) + "\n"
            with write_lock, progress_path.open("a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
        return result

    fresh: dict[str, ItemResult]
    if config.jobs > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = pool.map(
                lambda it: record(evaluate_item(it, backend, config)), pending
            )
            fresh = {r.item_id: r for r in outcomes}
    else:
        fresh = {
            item.item_id: record(evaluate_item(item, backend, config))
            for item in pending
        }

    merged = [done.get(item.item_id) or fresh[item.item_id] for item in items]
    return _aggregate(merged, config)
