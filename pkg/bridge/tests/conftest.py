"""Shared fixtures: a three-object scene in the engine's fixture format,
reachable by path, by base64, and as a live default server."""

from __future__ import annotations

import base64
import json
from pathlib import Path

import pytest

from percbridge.server import BridgeServer

CUP_BOX = [0.1, 0.55, 0.28, 0.8]
GREEN_CUP_BOX = [0.4, 0.5, 0.6, 0.82]
DOG_BOX = [0.65, 0.4, 0.92, 0.85]
TEXT_BOX = [0.66, 0.45, 0.84, 0.55]


@pytest.fixture
def scene() -> dict:
    return {
        "seed": 7,
        "objects": [
            {"id": "e1", "category": "cup", "box": list(CUP_BOX),
             "color": "red", "orientation_degrees": 0.0, "depth": 2.0},
            {"id": "e2", "category": "cup", "box": list(GREEN_CUP_BOX),
             "color": "green", "orientation_degrees": 45.0, "depth": 3.0},
            {"id": "e3", "category": "dog", "box": list(DOG_BOX),
             "color": "blue", "orientation_degrees": 90.0, "depth": 5.0},
        ],
        "texts": [{"text": "OPEN", "box": list(TEXT_BOX)}],
    }


@pytest.fixture
def scene_file(tmp_path: Path, scene: dict) -> Path:
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(scene), encoding="utf-8")
    return path


@pytest.fixture
def scene_b64(scene: dict) -> dict:
    raw = json.dumps(scene, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return {"base64": base64.b64encode(raw).decode("ascii")}


@pytest.fixture
def server() -> BridgeServer:
    return BridgeServer()
