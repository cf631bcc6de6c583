"""Regenerate the committed golden transcripts under tests/data/golden/.

Run from the bridge root::

    python3 scripts/record_goldens.py

Two sessions against the default model binding, every image ref embedded as
base64 so the files carry no machine paths:

- ``fixture``: one request per implemented method (plus an absent-category
  detect, a decompose that lands in not_implemented, and one deliberately
  malformed detect) against a three-object scene;
- ``errors``: the envelope-level failure surface — unknown method, missing
  id, bad params, undecodable base64, a path ref that resolves nowhere.

Everything the bridge emits is deterministic, so reruns only change these
files when behavior changes — which is exactly what the golden tests are
for.
"""

from __future__ import annotations

import base64
import json
import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from percbridge.config import default_bridge_config  # noqa: E402
from percbridge.recorder import record_transcripts  # noqa: E402

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "tests" / "data" / "golden"

SCENE = {
    "seed": 7,
    "objects": [
        {"id": "e1", "category": "cup", "box": [0.1, 0.55, 0.28, 0.8],
         "color": "red", "orientation_degrees": 0.0, "depth": 2.0},
        {"id": "e2", "category": "cup", "box": [0.4, 0.5, 0.6, 0.82],
         "color": "green", "orientation_degrees": 45.0, "depth": 3.0},
        {"id": "e3", "category": "dog", "box": [0.65, 0.4, 0.92, 0.85],
         "color": "blue", "orientation_degrees": 90.0, "depth": 5.0},
    ],
    "texts": [{"text": "OPEN", "box": [0.66, 0.45, 0.84, 0.55]}],
}


def _b64(doc: dict) -> str:
    raw = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return base64.b64encode(raw).decode("ascii")


def _req(method: str, rid: str, params: dict) -> dict:
    return {"method": method, "id": rid, "params": params}


def fixture_session(image: dict) -> list[dict]:
    cup_box = SCENE["objects"][0]["box"]
    dog_box = SCENE["objects"][2]["box"]
    return [
        _req("handshake", "r1", {}),
        _req("detect", "r2", {"image": image, "category": "cup", "threshold": 0.3}),
        _req("detect", "r3", {"image": image, "category": "bird", "threshold": 0.3}),
        _req("ocr", "r4", {"image": image}),
        _req("depth", "r5", {"image": image, "boxes": [cup_box, dog_box]}),
        _req("orientation", "r6", {"image": image, "box": dog_box}),
        _req("color", "r7", {"image": image, "box": cup_box, "category": "cup"}),
        _req("cot", "r8", {"payload": {
            "relation": {"name": "left_of", "subject": "e1", "object": "e3"},
            "boxes": {"subject": cup_box, "object": dog_box},
            "facets": {"subject": {"presence": 1.0, "color": 1.0}, "object": {"presence": 1.0}},
            "image": image,
        }}),
        _req("decompose", "r9", {"prompt": "a red cup left of a dog"}),
        _req("detect", "r10", {"image": {"path": "x.json", "base64": "eyJ9"},
                               "category": "cup", "threshold": 0.3}),
    ]


def errors_session(image: dict) -> list[dict]:
    bad_b64 = {"base64": "!!not-base64!!"}
    junk_b64 = {"base64": base64.b64encode(b"not a scene").decode("ascii")}
    return [
        _req("handshake", "r1", {}),
        _req("fly", "r2", {}),
        {"method": "detect", "params": {"image": image, "category": "cup", "threshold": 0.3}},
        _req("detect", "r4", {"image": image, "category": "cup", "threshold": 1.5}),
        _req("detect", "r5", {"image": bad_b64, "category": "cup", "threshold": 0.3}),
        _req("detect", "r6", {"image": junk_b64, "category": "cup", "threshold": 0.3}),
        _req("detect", "r7", {"image": {"path": "/nonexistent/scene.json"},
                              "category": "cup", "threshold": 0.3}),
        _req("depth", "r8", {"image": image, "boxes": []}),
    ]


def main() -> int:
    if GOLDEN_DIR.exists():
        shutil.rmtree(GOLDEN_DIR)
    GOLDEN_DIR.mkdir(parents=True)
    config = default_bridge_config()
    image = {"base64": _b64(SCENE)}
    config_doc = {
        "name": config.name,
        "concurrency": config.concurrency,
        "methods": {m: {"model": b.model, **dict(b.options)} for m, b in sorted(config.bindings.items())},
    }
    (GOLDEN_DIR / "config.json").write_text(
        json.dumps(config_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for basename, requests in [
        ("fixture", fixture_session(image)),
        ("errors", errors_session(image)),
    ]:
        session = record_transcripts(config, requests, GOLDEN_DIR, basename=basename)
        print(f"{basename}: {session.count} pairs -> {session.req_path.name}, {session.resp_path.name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
