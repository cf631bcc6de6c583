"""Reference perception backend for the scoring engine's wire protocol.

The scoring engine talks to perception backends over a small JSON protocol
(see the engine's ``docs/protocol.md``); this package sits on the other end
of that wire.  It binds each protocol method to a concrete model via a
config file, serves the result over stdio or HTTP, and records paired
request/response transcripts for golden-file tests.

The built-in models are deterministic fixtures — a scene-graph sidecar
reader, a color-segmentation detector for rasterized scenes, and a scripted
relation judge — so the full protocol surface can be exercised without
downloading anything.  Real detectors slot in as additional registry
entries; the serving and validation layers do not change.
"""

from .config import BridgeConfig, BridgeConfigError, default_bridge_config, load_bridge_config
from .models import MethodBinder, ModelError
from .raster import rasterize_scene, write_scene_image
from .recorder import (
    RecordedSession,
    TranscriptMismatch,
    record_transcripts,
    replay_transcripts,
    verify_transcripts,
)
from .schemas import SchemaViolation
from .server import BridgeServer, serve_http, serve_stdio

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "BridgeConfigError",
    "BridgeServer",
    "MethodBinder",
    "ModelError",
    "RecordedSession",
    "SchemaViolation",
    "TranscriptMismatch",
    "default_bridge_config",
    "load_bridge_config",
    "rasterize_scene",
    "record_transcripts",
    "replay_transcripts",
    "serve_http",
    "serve_stdio",
    "verify_transcripts",
    "write_scene_image",
    "__version__",
]
