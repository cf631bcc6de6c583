"""Bridge configuration: which model serves which protocol method.

A config is a JSON document::

    {"name": "percbridge",
     "concurrency": "single",
     "methods": {
       "detect":      {"model": "scenegraph"},
       "color":       {"model": "scenegraph"},
       "cot":         {"model": "scripted"},
       ...
     }}

Each ``methods`` entry names a registry model plus its options (``device``
and any model-specific keys — a ``colorbox`` binding carries its category →
color ``legend``).  Methods absent from the map are served as
``not_implemented`` errors, which the scoring engine treats as "fall back to
another path"; that is what lets a deployment bind only the models it has.

Binding structure is validated here; whether a model id exists and supports
the method is checked when the binder instantiates it (`models.MethodBinder`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

from .schemas import CONCURRENCY_MODES, WIRE_METHODS


class BridgeConfigError(ValueError):
    """The bridge config document is unusable."""


@dataclass(frozen=True)
class MethodBinding:
    """One method → model assignment; ``options`` is passed to the factory."""

    model: str
    options: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class BridgeConfig:
    name: str = "percbridge"
    concurrency: str = "single"
    bindings: Mapping[str, MethodBinding] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name:
            raise BridgeConfigError("name must be a non-empty string")
        if self.concurrency not in CONCURRENCY_MODES:
            raise BridgeConfigError(
                f"concurrency must be one of {CONCURRENCY_MODES}, got {self.concurrency!r}"
            )
        for method in self.bindings:
            if method not in WIRE_METHODS:
                raise BridgeConfigError(
                    f"methods.{method}: not a wire method (expected one of {WIRE_METHODS})"
                )
        object.__setattr__(self, "bindings", MappingProxyType(dict(self.bindings)))


def _parse_binding(method: str, raw: Any) -> MethodBinding:
    where = f"methods.{method}"
    if not isinstance(raw, dict):
        raise BridgeConfigError(f"{where}: expected an object, got {type(raw).__name__}")
    model = raw.get("model")
    if not isinstance(model, str) or not model:
        raise BridgeConfigError(f"{where}.model: expected a non-empty string")
    options = {k: v for k, v in raw.items() if k != "model"}
    device = options.get("device")
    if device is not None and not isinstance(device, str):
        raise BridgeConfigError(f"{where}.device: expected a string")
    return MethodBinding(model=model, options=options)


def parse_bridge_config(doc: Any, *, source: str = "<config>") -> BridgeConfig:
    if not isinstance(doc, dict):
        raise BridgeConfigError(f"{source}: expected a JSON object at the top level")
    unknown = set(doc) - {"name", "concurrency", "methods"}
    if unknown:
        raise BridgeConfigError(f"{source}: unknown keys {sorted(unknown)}")
    name = doc.get("name", "percbridge")
    if not isinstance(name, str):
        raise BridgeConfigError(f"{source}: name must be a string")
    concurrency = doc.get("concurrency", "single")
    if not isinstance(concurrency, str):
        raise BridgeConfigError(f"{source}: concurrency must be a string")
    methods = doc.get("methods", {})
    if not isinstance(methods, dict):
        raise BridgeConfigError(f"{source}: methods must be an object")
    bindings = {m: _parse_binding(m, raw) for m, raw in methods.items()}
    try:
        return BridgeConfig(name=name, concurrency=concurrency, bindings=bindings)
    except BridgeConfigError as e:
        raise BridgeConfigError(f"{source}: {e}") from None


def load_bridge_config(path: str | Path) -> BridgeConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise BridgeConfigError(f"{path}: invalid JSON: {e}") from None
    return parse_bridge_config(doc, source=str(path))


def default_bridge_config() -> BridgeConfig:
    """Scene-graph fixtures on every perception method, scripted relation
    judgments, no decomposer (the engine's template grammar is the primary
    decomposition path)."""
    scenegraph = MethodBinding(model="scenegraph")
    return BridgeConfig(
        name="percbridge",
        concurrency="single",
        bindings={
            "detect": scenegraph,
            "ocr": scenegraph,
            "depth": scenegraph,
            "orientation": scenegraph,
            "color": scenegraph,
            "cot": MethodBinding(model="scripted"),
        },
    )
