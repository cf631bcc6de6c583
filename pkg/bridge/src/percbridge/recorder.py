"""Record request/response transcripts for golden-file tests.

A session is captured as two parallel JSONL files — ``NAME.req.jsonl`` and
``NAME.resp.jsonl``, line *i* of one answering line *i* of the other — plus
an ``assets/`` directory.  Embedded image bytes are redacted from the
request file by content hash: ``{"base64": ...}`` becomes
``{"base64_sha256": "<hex of the decoded bytes>"}`` and the bytes land in
``assets/<hex>.bin``.  That keeps transcripts diffable while staying
lossless — replay reconstitutes the original payloads from the store.

Responses are produced by the normal server funnel, so everything recorded
has already passed outgoing schema validation.  Replay re-runs the requests
through a fresh server and must reproduce the response file byte for byte;
``verify_transcripts`` is that check, and the golden tests are just it
pointed at committed files.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .config import BridgeConfig
from .server import BridgeServer, dumps_envelope

ASSETS_DIR_NAME = "assets"


class TranscriptMismatch(RuntimeError):
    """Replay diverged from the recorded responses (or the store is broken)."""


@dataclass(frozen=True)
class RecordedSession:
    req_path: Path
    resp_path: Path
    assets_dir: Path
    count: int


def _redact(node: Any, assets_dir: Path) -> Any:
    if isinstance(node, dict):
        if set(node) == {"base64"} and isinstance(node["base64"], str):
            try:
                blob = base64.b64decode(node["base64"], validate=True)
            except Exception:
                return dict(node)  # undecodable payloads cannot be content-addressed
            digest = hashlib.sha256(blob).hexdigest()
            assets_dir.mkdir(parents=True, exist_ok=True)
            asset = assets_dir / f"{digest}.bin"
            if not asset.exists():
                asset.write_bytes(blob)
            return {"base64_sha256": digest}
        return {k: _redact(v, assets_dir) for k, v in node.items()}
    if isinstance(node, list):
        return [_redact(v, assets_dir) for v in node]
    return node


def _reconstitute(node: Any, assets_dir: Path) -> Any:
    if isinstance(node, dict):
        if set(node) == {"base64_sha256"} and isinstance(node["base64_sha256"], str):
            digest = node["base64_sha256"]
            asset = assets_dir / f"{digest}.bin"
            if not asset.is_file():
                raise TranscriptMismatch(f"asset {digest}.bin missing from {assets_dir}")
            return {"base64": base64.b64encode(asset.read_bytes()).decode("ascii")}
        return {k: _reconstitute(v, assets_dir) for k, v in node.items()}
    if isinstance(node, list):
        return [_reconstitute(v, assets_dir) for v in node]
    return node


def record_transcripts(
    config: BridgeConfig | None,
    requests: Iterable[dict],
    out_dir: str | Path,
    *,
    basename: str = "session",
) -> RecordedSession:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    assets_dir = out_dir / ASSETS_DIR_NAME
    server = BridgeServer(config)
    req_lines: list[str] = []
    resp_lines: list[str] = []
    for envelope in requests:
        # Serve the canonical (sorted-key) form of the request — the form the
        # transcript stores and replay will present.  Validator messages can
        # embed the offending document verbatim, so answering the caller's
        # key order would break capture∘replay byte-identity.
        canonical = json.loads(dumps_envelope(envelope))
        response = server.handle_request(canonical)
        req_lines.append(dumps_envelope(_redact(canonical, assets_dir)))
        resp_lines.append(dumps_envelope(response))
    req_path = out_dir / f"{basename}.req.jsonl"
    resp_path = out_dir / f"{basename}.resp.jsonl"
    req_path.write_text("".join(line + "\n" for line in req_lines), encoding="utf-8")
    resp_path.write_text("".join(line + "\n" for line in resp_lines), encoding="utf-8")
    return RecordedSession(req_path, resp_path, assets_dir, len(req_lines))


def iter_requests(req_path: str | Path, assets_dir: str | Path | None = None) -> Iterator[dict]:
    """Recorded request envelopes with image payloads reconstituted."""
    req_path = Path(req_path)
    assets_dir = Path(assets_dir) if assets_dir is not None else req_path.parent / ASSETS_DIR_NAME
    with req_path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield _reconstitute(json.loads(line), assets_dir)


def replay_transcripts(
    config: BridgeConfig | None,
    req_path: str | Path,
    assets_dir: str | Path | None = None,
) -> list[str]:
    server = BridgeServer(config)
    return [
        dumps_envelope(server.handle_request(envelope))
        for envelope in iter_requests(req_path, assets_dir)
    ]


def verify_transcripts(
    config: BridgeConfig | None,
    req_path: str | Path,
    resp_path: str | Path,
    assets_dir: str | Path | None = None,
) -> int:
    """Replay ``req_path`` and demand byte-identity with ``resp_path``;
    returns the number of verified pairs."""
    replayed = replay_transcripts(config, req_path, assets_dir)
    recorded = [
        line.strip()
        for line in Path(resp_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if len(replayed) != len(recorded):
        raise TranscriptMismatch(
            f"{resp_path}: {len(recorded)} recorded responses but replay produced {len(replayed)}"
        )
    for i, (got, want) in enumerate(zip(replayed, recorded)):
        if got != want:
            raise TranscriptMismatch(
                f"{resp_path}: line {i + 1} diverged\n  recorded: {want}\n  replayed: {got}"
            )
    return len(replayed)
