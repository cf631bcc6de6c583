"""Perception backends: the engine's only window onto an image.

Every perception question (detection, OCR, depth, orientation, color,
decomposition, chain-of-thought scoring) goes through the
:class:`~spatialscore.backends.base.PerceptionBackend` interface. The
in-process fixture backend answers from a symbolic scene graph; remote
backends speak the newline-delimited JSON wire protocol over a child
process pipe or HTTP.
"""

from __future__ import annotations

import shlex

from .base import CotReply, Detection, PerceptionBackend, TextDetection
from .fixture import FixtureBackend
from .remote import HttpTransport, RemoteBackend, SubprocessTransport

__all__ = [
    "CotReply",
    "Detection",
    "FixtureBackend",
    "HttpTransport",
    "PerceptionBackend",
    "RemoteBackend",
    "SubprocessTransport",
    "TextDetection",
    "make_backend",
]


def make_backend(spec: str) -> PerceptionBackend:
    """Build a backend from a CLI-style spec string.

    ``fixture`` or ``fixture:SCENE.json`` — in-process scene-graph oracle;
    ``cmd:EXECUTABLE ARGS...`` — spawn a wire-protocol child process;
    ``http:URL`` / ``https:URL`` — wire protocol over HTTP.
    """
    if spec == "fixture":
        return FixtureBackend()
    kind, sep, rest = spec.partition(":")
    if kind == "fixture" and sep:
        from ..scene import load_scene

        return FixtureBackend(default_scene=load_scene(rest))
    if kind == "cmd" and sep and rest.strip():
        return RemoteBackend(SubprocessTransport(shlex.split(rest)))
    if kind in ("http", "https") and sep:
        return RemoteBackend(HttpTransport(spec))
    raise ValueError(
        f"unrecognized backend spec {spec!r} "
        "(expected fixture[:SCENE], cmd:EXEC, or http(s)://URL)"
    )
