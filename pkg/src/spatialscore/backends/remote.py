"""Wire-protocol client: subprocess, HTTP, record, and replay transports.

A transport moves one request envelope and returns one response envelope;
:class:`RemoteBackend` layers the typed API on top. Request ids are
``r1, r2, ...`` per backend instance, so a fresh client replays a recorded
session id-for-id.
"""

from __future__ import annotations

import subprocess
import threading
from pathlib import Path
from typing import Protocol, Sequence

from ..constraints import ConstraintSet, parse_constraint_set
from ..errors import BackendUnavailable, MalformedResponse
from ..geometry import BBox
from ..serialize import canonical_json
from . import wire
from .base import CotReply, Detection, TextDetection, apply_threshold, sort_texts


class Transport(Protocol):
    def roundtrip(self, request: dict) -> dict: ...

    def close(self) -> None: ...


class SubprocessTransport:
    """Newline-delimited JSON over a child process's stdin/stdout.

    The pipe is a single channel, so calls are serialized with a lock
    regardless of the backend's declared concurrency.
    """

    def __init__(self, argv: Sequence[str]):
        if not argv:
            raise ValueError("empty backend command")
        self._argv = list(argv)
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self._argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=None,  # backend logs flow to our stderr
                )
            except OSError as e:
                raise BackendUnavailable(f"cannot spawn backend {self._argv!r}: {e}") from None
        return self._proc

    def roundtrip(self, request: dict) -> dict:
        with self._lock:
            proc = self._ensure()
            assert proc.stdin is not None and proc.stdout is not None
            try:
                proc.stdin.write(canonical_json(request).encode("utf-8") + b"\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                raise BackendUnavailable(f"backend pipe closed: {e}") from None
            line = proc.stdout.readline()
        if not line:
            raise BackendUnavailable(
                f"backend {self._argv[0]!r} closed its stdout (exit {proc.poll()})"
            )
        return wire.decode_line(line)

    def close(self) -> None:
        with self._lock:
            proc, self._proc = self._proc, None
        if proc is None:
            return
        if proc.stdin is not None:
            try:
                proc.stdin.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


class HttpTransport:
    """The same envelopes over HTTP POST, one path per method."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        self._base = base_url.rstrip("/")
        self._timeout = timeout
        # One session per thread: requests.Session is not thread-safe.
        self._local = threading.local()

    def _session(self):
        import requests

        if getattr(self._local, "session", None) is None:
            self._local.session = requests.Session()
        return self._local.session

    def roundtrip(self, request: dict) -> dict:
        import requests

        url = self._base + wire.METHOD_PATHS[request["method"]]
        try:
            resp = self._session().post(
                url,
                data=canonical_json(request).encode("utf-8"),
                headers={"Content-Type": "application/json"},
                timeout=self._timeout,
            )
        except requests.RequestException as e:
            raise BackendUnavailable(f"cannot reach backend at {url}: {e}") from None
        if resp.status_code != 200:
            raise BackendUnavailable(f"backend at {url} returned HTTP {resp.status_code}")
        return wire.decode_line(resp.content)

    def close(self) -> None:
        session = getattr(self._local, "session", None)
        if session is not None:
            session.close()
            self._local.session = None


class RecordingTransport:
    """Wraps a transport, appending each exchange to paired transcript files."""

    def __init__(self, inner: Transport, req_path: str | Path, resp_path: str | Path):
        self._inner = inner
        self._req = open(req_path, "ab")
        self._resp = open(resp_path, "ab")
        self._lock = threading.Lock()

    def roundtrip(self, request: dict) -> dict:
        response = self._inner.roundtrip(request)
        with self._lock:
            self._req.write(canonical_json(request).encode("utf-8") + b"\n")
            self._resp.write(canonical_json(response).encode("utf-8") + b"\n")
            self._req.flush()
            self._resp.flush()
        return response

    def close(self) -> None:
        self._req.close()
        self._resp.close()
        self._inner.close()


class ReplayTransport:
    """Replays a recorded session, insisting on byte-identical requests.

    The request the client encodes now must serialize to exactly the bytes
    recorded then — this is what pins the codec: encode(decode(msg)) = msg
    for every golden transcript.
    """

    def __init__(self, req_path: str | Path, resp_path: str | Path):
        self._requests = Path(req_path).read_bytes().splitlines()
        self._responses = Path(resp_path).read_bytes().splitlines()
        if len(self._requests) != len(self._responses):
            raise ValueError("transcript files disagree on exchange count")
        self._cursor = 0
        self._lock = threading.Lock()

    def roundtrip(self, request: dict) -> dict:
        with self._lock:
            if self._cursor >= len(self._requests):
                raise BackendUnavailable("transcript exhausted")
            expected = self._requests[self._cursor]
            got = canonical_json(request).encode("utf-8")
            if got != expected:
                raise AssertionError(
                    f"request #{self._cursor + 1} deviates from transcript:\n"
                    f"  recorded: {expected.decode('utf-8')}\n"
                    f"  actual:   {got.decode('utf-8')}"
                )
            response = self._responses[self._cursor]
            self._cursor += 1
        return wire.decode_line(response)

    @property
    def exhausted(self) -> bool:
        return self._cursor == len(self._requests)

    def close(self) -> None:
        pass


class RemoteBackend:
    """Typed perception API over any transport."""

    def __init__(self, transport: Transport):
        self._transport = transport
        self._counter = 0
        self._id_lock = threading.Lock()
        self._info: dict | None = None
        # Swapped for a real lock when the backend declares single-flight.
        self._flight_lock: threading.Lock | None = None

    def _next_id(self) -> str:
        with self._id_lock:
            self._counter += 1
            return f"r{self._counter}"

    def _call(self, method: str, params: dict) -> dict:
        req_id = self._next_id()
        request = wire.encode_request(method, req_id, params)
        if self._flight_lock is not None:
            with self._flight_lock:
                response = self._transport.roundtrip(request)
        else:
            response = self._transport.roundtrip(request)
        return wire.unwrap_response(response, req_id)

    def handshake(self) -> dict:
        if self._info is None:
            info = wire.parse_handshake(self._call("handshake", {}))
            if info["concurrency"] == "single":
                self._flight_lock = threading.Lock()
            self._info = info
        return self._info

    def _ready(self) -> None:
        if self._info is None:
            self.handshake()

    def detect_objects(self, image: dict, category: str, threshold: float) -> list[Detection]:
        self._ready()
        result = self._call("detect", wire.detect_params(image, category, threshold))
        dets = wire.parse_detections(result)
        for i, d in enumerate(dets):
            if d.category != category:
                raise MalformedResponse(
                    f"result.detections[{i}].category",
                    f"expected {category!r}, got {d.category!r}",
                )
        # The engine re-applies threshold and ordering: backends are not
        # trusted to filter or sort.
        return apply_threshold(dets, threshold)

    def recognize_text(self, image: dict) -> list[TextDetection]:
        self._ready()
        return sort_texts(wire.parse_texts(self._call("ocr", wire.ocr_params(image))))

    def estimate_depth(self, image: dict, boxes: Sequence[BBox]) -> list[float]:
        self._ready()
        if not boxes:
            return []
        result = self._call("depth", wire.depth_params(image, boxes))
        return wire.parse_depths(result, expect_n=len(boxes))

    def classify_orientation(self, image: dict, box: BBox) -> float:
        self._ready()
        return wire.parse_orientation(self._call("orientation", wire.orientation_params(image, box)))

    def classify_color(self, image: dict, box: BBox, category: str) -> str:
        self._ready()
        return wire.parse_color(self._call("color", wire.color_params(image, box, category)))

    def decompose(self, prompt: str) -> ConstraintSet:
        self._ready()
        doc = wire.parse_decompose(self._call("decompose", wire.decompose_params(prompt)))
        return parse_constraint_set(doc)

    def cot_score(self, payload: dict) -> CotReply:
        self._ready()
        return wire.parse_cot(self._call("cot", wire.cot_params(payload)))

    def close(self) -> None:
        self._transport.close()
