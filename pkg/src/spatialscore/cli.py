"""Command-line entry points.

Subcommands: ``score`` (one image, exit code carries the verdict), ``bench``
(manifest evaluation with parallel workers and resume), ``decompose``
(template grammar front-door), ``serve`` (HTTP scoring service), and
``suite`` (synthetic oracle suite generation).

Exit codes for ``score``: 0 verdict pass, 1 verdict fail, 2 error — shell
harnesses can branch without parsing JSON. Everything else: 0 success,
2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import make_backend
from .bench import run_bench
from .config import load_config
from .constraints import constraint_set_to_dict, parse_constraint_set
from .errors import SpatialScoreError
from .oracle import materialize_suite, random_suite
from .reasoner import decompose_prompt, score_image
from .reporting import (
    render_bench_csv,
    render_bench_figure,
    render_bench_json,
    render_bench_markdown,
    render_report_json,
    render_report_markdown,
)
from .serialize import canonical_json
from .templates import decompose_template

_CONFIG_FIELDS = ("tau_det", "tau_pass", "theta_pos", "relations", "jobs",
                  "skip_errors", "per_constraint")


def _add_config_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="FILE", help="JSON config file")
    sp.add_argument("--tau-det", type=float, dest="tau_det", metavar="T",
                    help="detection confidence threshold")
    sp.add_argument("--tau-pass", type=float, dest="tau_pass", metavar="T",
                    help="verdict threshold on the normalized total")
    sp.add_argument("--theta-pos", type=float, dest="theta_pos", metavar="T",
                    help="directional-margin ratio for relation checks")
    sp.add_argument("--relations", choices=("geo", "cot"),
                    help="relation path: geometric rules or backend chain-of-thought")


def _config_from_args(args: argparse.Namespace):
    overrides = {name: getattr(args, name, None) for name in _CONFIG_FIELDS}
    return load_config(file=getattr(args, "config", None), **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatialscore",
        description="Verifiable spatial scoring for text-to-image evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="score one image")
    score.add_argument("--prompt", help="prompt text (decomposed by the template grammar)")
    score.add_argument("--constraints", metavar="FILE",
                       help="constraint-set JSON file (alternative to --prompt)")
    score.add_argument("--image", metavar="FILE", help="image file for the backend")
    score.add_argument("--scene", metavar="FILE",
                       help="scene-graph JSON file (fixture backend input)")
    score.add_argument("--backend", default="fixture",
                       help="fixture[:SCENE] | cmd:EXEC ARGS | http:URL")
    _add_config_flags(score)
    score.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    score.add_argument("--format", choices=("json", "md"), default="json")

    bench = sub.add_parser("bench", help="run a benchmark manifest")
    bench.add_argument("--manifest", required=True, metavar="FILE")
    bench.add_argument("--backend", default="fixture")
    bench.add_argument("--jobs", type=int, metavar="N", help="parallel workers")
    bench.add_argument("--resume", metavar="FILE",
                       help="progress JSONL; finished items are not re-run")
    bench.add_argument("--skip-errors", action="store_true", default=None,
                       dest="skip_errors",
                       help="drop errored items from accuracy denominators")
    bench.add_argument("--per-constraint", action="store_true", default=None,
                       dest="per_constraint",
                       help="judge each constraint instead of each item")
    _add_config_flags(bench)
    bench.add_argument("--out", metavar="FILE",
                       help="report JSON path; .md/.csv/.png siblings are written too")
    bench.add_argument("--no-figure", action="store_true",
                       help="skip the PNG figure when writing --out")

    decompose = sub.add_parser("decompose", help="decompose a prompt into constraints")
    decompose.add_argument("prompt")
    decompose.add_argument("--backend",
                           help="optional fallback decomposer for non-template prompts")

    serve = sub.add_parser("serve", help="run the HTTP scoring service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8077)
    serve.add_argument("--backend", default="fixture")
    serve.add_argument("--jobs", type=int, metavar="N",
                       help="max concurrent scoring requests")
    _add_config_flags(serve)

    suite = sub.add_parser("suite", help="generate a synthetic oracle suite")
    suite.add_argument("--n", type=int, required=True, metavar="N")
    suite.add_argument("--seed", type=int, required=True)
    suite.add_argument("--out", required=True, metavar="DIR")
    suite.add_argument("--violated-fraction", type=float, default=0.5,
                       dest="violated_fraction", metavar="F")

    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_score(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if (args.prompt is None) == (args.constraints is None):
        parser.error("exactly one of --prompt or --constraints is required")
    if (args.image is None) == (args.scene is None):
        parser.error("exactly one of --image or --scene is required")

    config = _config_from_args(args)
    if args.prompt is not None:
        source = args.prompt
    else:
        source = parse_constraint_set(
            json.loads(Path(args.constraints).read_text(encoding="utf-8"))
        )
    image = {"path": str(Path(args.image or args.scene))}

    backend = make_backend(args.backend)
    try:
        report = score_image(source, image, backend, config)
    finally:
        backend.close()

    if args.format == "md":
        _emit(render_report_markdown(report, config), args.out)
    else:
        _emit(render_report_json(report, config), args.out)
    return 0 if report.verdict else 1


def cmd_bench(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _config_from_args(args)
    backend = make_backend(args.backend)
    try:
        report = run_bench(args.manifest, backend, config, progress=args.resume)
    finally:
        backend.close()

    if args.out:
        out = Path(args.out)
        out.write_text(render_bench_json(report), encoding="utf-8")
        out.with_suffix(".md").write_text(render_bench_markdown(report), encoding="utf-8")
        out.with_suffix(".csv").write_text(render_bench_csv(report), encoding="utf-8")
        if not args.no_figure:
            render_bench_figure(report, out.with_suffix(".png"))
        sys.stderr.write(
            f"overall {report.overall.accuracy:.3f} "
            f"({report.overall.correct}/{report.overall.total}); wrote {out}\n"
        )
    else:
        sys.stdout.write(render_bench_json(report))
    return 0


def cmd_decompose(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.backend:
        backend = make_backend(args.backend)
        try:
            cset = decompose_prompt(args.prompt, backend)
        finally:
            backend.close()
    else:
        cset = decompose_template(args.prompt)
    sys.stdout.write(canonical_json(constraint_set_to_dict(cset)) + "\n")
    return 0


def cmd_serve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    import uvicorn

    from .service import create_app

    config = _config_from_args(args)
    backend = make_backend(args.backend)
    app = create_app(backend, config)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        backend.close()
    return 0


def cmd_suite(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    specs = random_suite(args.n, args.seed, violated_fraction=args.violated_fraction)
    manifest, results = materialize_suite(specs, args.out)
    satisfied = sum(1 for r in results.values() if r.verdict())
    sys.stderr.write(
        f"wrote {len(results)} items to {manifest} ({satisfied} satisfying)\n"
    )
    sys.stdout.write(str(manifest) + "\n")
    return 0


_COMMANDS = {
    "score": cmd_score,
    "bench": cmd_bench,
    "decompose": cmd_decompose,
    "serve": cmd_serve,
    "suite": cmd_suite,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except SpatialScoreError as e:
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 2
    except json.JSONDecodeError as e:
        sys.stderr.write(f"error: invalid JSON input: {e}\n")
        return 2
    except (OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
