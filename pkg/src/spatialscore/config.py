"""Engine configuration with flags > environment > config file precedence.

Environment variables use the ``SPATRWD_`` prefix (``SPATRWD_TAU_PASS=0.9``).
Config files are plain JSON with the same keys as :class:`EngineConfig`.
The effective configuration is echoed into every report; fields that cannot
change scores (like ``jobs``) are excluded from the echo so reports stay
byte-identical across execution strategies.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import SchemaViolation

ENV_PREFIX = "SPATRWD_"

RELATION_PATHS = ("geo", "cot")


@dataclass(frozen=True, slots=True)
class EngineConfig:
    tau_det: float = 0.30        # detection confidence threshold
    tau_pass: float = 0.80       # verdict threshold on the normalized total
    theta_pos: float = 0.05      # directional margin vs. mean box diagonal
    relations: str = "geo"       # geo: rule path for canonical relations; cot: force backend
    jobs: int = 1                # bench parallelism (never affects results)
    skip_errors: bool = False    # bench: drop errored items from denominators
    per_constraint: bool = False # bench: one judgment per constraint, not per item

    def __post_init__(self):
        if not (0.0 <= self.tau_det <= 1.0):
            raise ValueError(f"tau_det must be in [0,1], got {self.tau_det}")
        if not (0.0 <= self.tau_pass <= 1.0):
            raise ValueError(f"tau_pass must be in [0,1], got {self.tau_pass}")
        if self.theta_pos < 0:
            raise ValueError(f"theta_pos must be >= 0, got {self.theta_pos}")
        if self.relations not in RELATION_PATHS:
            raise ValueError(f"relations must be one of {RELATION_PATHS}, got {self.relations!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    def echo(self) -> dict:
        """Score-relevant settings, embedded in every report."""
        return {
            "tau_det": self.tau_det,
            "tau_pass": self.tau_pass,
            "theta_pos": self.theta_pos,
            "relations": self.relations,
        }

    def bench_echo(self) -> dict:
        out = self.echo()
        out["skip_errors"] = self.skip_errors
        out["per_constraint"] = self.per_constraint
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, value: object) -> object:
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            low = value.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
        raise ValueError(f"{name}: cannot read {value!r} as a boolean")
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ValueError(f"{name}: cannot read {value!r} as an integer")
        try:
            return int(value)
        except ValueError:
            raise ValueError(f"{name}: cannot read {value!r} as an integer") from None
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ValueError(f"{name}: cannot read {value!r} as a number")
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"{name}: cannot read {value!r} as a number") from None
    return str(value)


def config_from_env(environ: dict | None = None) -> dict:
    """Pick up SPATRWD_* overrides; returns a partial settings dict."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for name in _FIELD_TYPES:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            out[name] = _coerce(name, raw)
    return out


def config_from_file(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaViolation("$", f"cannot read config file {path}: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "config file must hold a JSON object")
    unknown = set(doc) - set(_FIELD_TYPES)
    if unknown:
        raise SchemaViolation("$", f"unknown config fields: {sorted(unknown)}")
    return {name: _coerce(name, value) for name, value in doc.items()}


def load_config(
    file: str | Path | None = None,
    environ: dict | None = None,
    **overrides,
) -> EngineConfig:
    """Defaults, then config file, then environment, then explicit overrides."""
    config = EngineConfig()
    if file is not None:
        config = replace(config, **config_from_file(file))
    config = replace(config, **config_from_env(environ))
    live = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **live) if live else config
