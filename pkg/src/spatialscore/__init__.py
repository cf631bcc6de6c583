"""Verifiable spatial scoring for text-to-image evaluation.

The package decomposes prompts into atomic constraints, queries a pluggable
perception backend, scores each constraint with closed-form sub-rewards,
and aggregates a signed total with a pass/fail verdict. A synthetic scene
oracle plants ground truth the engine must reproduce, and a benchmark
harness rolls per-item decisions into per-dimension accuracies.
"""

from .backends import FixtureBackend, RemoteBackend, make_backend
from .bench import BenchItem, BenchReport, ItemResult, evaluate_item, load_manifest, run_bench
from .config import EngineConfig, load_config
from .constraints import (
    CANONICAL_RELATIONS,
    COLOR_VOCAB,
    AtomicConstraint,
    ConstraintSet,
    OrientationTarget,
    RelationSpec,
    Tag,
    canonicalize,
    constraint_set_to_dict,
    parse_constraint_set,
)
from .errors import (
    BackendUnavailable,
    DanglingRelationId,
    EmptyManifest,
    InfeasiblePlant,
    MalformedResponse,
    MissingDepth,
    SchemaViolation,
    SpatialScoreError,
    UnparseableScore,
    UnrecognizedTemplate,
    UnsupportedRelation,
)
from .geometry import BBox
from .oracle import PlantResult, PlantSpec, materialize_suite, plant_scene, random_suite
from .reasoner import (
    ConstraintScore,
    RelationVerdict,
    ScoreReport,
    decompose_prompt,
    score_image,
)
from .relations import evaluate_relation_geometric
from .reporting import render_report_json, render_report_markdown, report_to_dict
from .scene import SceneGraph, SceneObject, SceneText, load_scene, dump_scene
from .subrewards import SubRewardVector
from .templates import decompose_template

__version__ = "0.1.0"

__all__ = [
    "AtomicConstraint",
    "BBox",
    "BackendUnavailable",
    "BenchItem",
    "BenchReport",
    "CANONICAL_RELATIONS",
    "COLOR_VOCAB",
    "ConstraintScore",
    "ConstraintSet",
    "DanglingRelationId",
    "EmptyManifest",
    "EngineConfig",
    "FixtureBackend",
    "InfeasiblePlant",
    "ItemResult",
    "MalformedResponse",
    "MissingDepth",
    "OrientationTarget",
    "PlantResult",
    "PlantSpec",
    "RelationSpec",
    "RelationVerdict",
    "RemoteBackend",
    "SceneGraph",
    "SceneObject",
    "SceneText",
    "SchemaViolation",
    "ScoreReport",
    "SpatialScoreError",
    "SubRewardVector",
    "Tag",
    "UnparseableScore",
    "UnrecognizedTemplate",
    "UnsupportedRelation",
    "canonicalize",
    "constraint_set_to_dict",
    "decompose_prompt",
    "decompose_template",
    "dump_scene",
    "evaluate_item",
    "evaluate_relation_geometric",
    "load_config",
    "load_manifest",
    "load_scene",
    "make_backend",
    "materialize_suite",
    "parse_constraint_set",
    "plant_scene",
    "random_suite",
    "render_report_json",
    "render_report_markdown",
    "report_to_dict",
    "run_bench",
    "score_image",
    "__version__",
]
