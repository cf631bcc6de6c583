"""Command-line entry: ``percbridge serve | record | rasterize``.

``serve`` speaks the wire protocol on stdio (the form the scoring engine
spawns via ``--backend cmd:...``) or over HTTP with ``--http HOST:PORT``.
``record`` replays a JSONL file of request envelopes through the server and
writes a redacted transcript pair for golden tests.  ``rasterize`` paints a
scene-graph JSON file into a PNG the ``colorbox`` detector can see.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import BridgeConfig, BridgeConfigError, default_bridge_config, load_bridge_config
from .raster import write_scene_image
from .recorder import record_transcripts
from .server import serve_http, serve_stdio


def _config_from(args: argparse.Namespace) -> BridgeConfig:
    if args.config is None:
        return default_bridge_config()
    return load_bridge_config(args.config)


def _cmd_serve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _config_from(args)
    if args.http is None:
        return serve_stdio(config)
    host, sep, port = args.http.rpartition(":")
    if not sep or not port.isdigit():
        parser.error(f"--http expects HOST:PORT, got {args.http!r}")
    return serve_http(config, host=host or "127.0.0.1", port=int(port))


def _cmd_record(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _config_from(args)
    requests = []
    with open(args.requests, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                requests.append(json.loads(line))
    session = record_transcripts(config, requests, args.out, basename=args.basename)
    print(session.req_path)
    print(session.resp_path)
    print(f"recorded {session.count} request/response pairs", file=sys.stderr)
    return 0


def _cmd_rasterize(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    scene = json.loads(Path(args.scene).read_text(encoding="utf-8"))
    out = write_scene_image(scene, args.out, size=args.size)
    print(out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="percbridge",
        description="Reference perception backend for the scoring engine's wire protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="speak the wire protocol on stdio or HTTP")
    serve.add_argument("--config", help="bridge config JSON (default: built-in fixture binding)")
    serve.add_argument("--http", metavar="HOST:PORT", help="serve HTTP instead of stdio")
    serve.set_defaults(func=_cmd_serve)

    record = sub.add_parser("record", help="capture a redacted request/response transcript")
    record.add_argument("--config", help="bridge config JSON")
    record.add_argument("--requests", required=True, help="JSONL file of request envelopes")
    record.add_argument("--out", required=True, help="output directory for the transcript pair")
    record.add_argument("--basename", default="session", help="transcript basename (default: session)")
    record.set_defaults(func=_cmd_record)

    raster = sub.add_parser("rasterize", help="paint scene-graph JSON into a PNG")
    raster.add_argument("--scene", required=True, help="scene-graph JSON file")
    raster.add_argument("--out", required=True, help="output PNG path")
    raster.add_argument("--size", type=int, default=320, help="image side in pixels (default: 320)")
    raster.set_defaults(func=_cmd_rasterize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except BridgeConfigError as e:
        print(f"percbridge: error: {e}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"percbridge: error: invalid JSON input: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"percbridge: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
