"""Command-line entry points.

Every command is a thin composition of library operations; no scoring,
parsing, or benchmarking logic lives here. Exit codes: 0 ok, 1 no result,
2 bad input, 3 bad configuration, 4 no endpoint reachable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .bench import RunSpec, bench_pair
from .config import Config, ConfigError, load_config, parse_endpoint_spec
from .errors import (
    InvariantViolation,
    MalformedInput,
    PerfAdvisorError,
    ProfileSyntaxError,
    SourceMismatch,
    UnknownDialect,
)
from .evaluate import load_corpus, render_report, run_eval, validate_corpus
from .gateway import health_check, list_models
from .hotspots import Thresholds, detect_hotspots
from .profile import ingest_external, parse_profile
from .prompts import load_templates
from .suggest import dump_suggestions, file_source_provider, suggest, write_patch_files

EXIT_OK = 0
EXIT_NO_RESULT = 1
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_ENDPOINT = 4


def _fail(code: int, message: str) -> int:
    print(f"perfadvisor: {message}", file=sys.stderr)
    return code


def _load_profile(path: str, dialect: Optional[str]):
    data = Path(path).read_bytes()
    if dialect:
        return ingest_external(data, dialect)
    return parse_profile(data)


def _thresholds(cfg: Config, args) -> Thresholds:
    base = cfg.thresholds
    return Thresholds(
        cpu_pct=args.cpu_pct if args.cpu_pct is not None else base.cpu_pct,
        mem_peak_mb=args.mem_peak_mb if args.mem_peak_mb is not None else base.mem_peak_mb,
        copy_mb_per_s=(
            args.copy_mb_per_s if args.copy_mb_per_s is not None else base.copy_mb_per_s
        ),
        merge_gap_lines=(
            args.merge_gap if args.merge_gap is not None else base.merge_gap_lines
        ),
        context_pad_lines=(
            args.context_pad if args.context_pad is not None else base.context_pad_lines
        ),
    )


def _endpoints(cfg: Config, args) -> dict:
    for spec in args.endpoint or []:
        name, ep = parse_endpoint_spec(spec)
        cfg.endpoints[name] = ep
    cfg.require_endpoints()
    return cfg.pick_endpoints(args.model)


def cmd_analyze(args) -> int:
    try:
        cfg = load_config(args.config)
        doc = _load_profile(args.profile, args.dialect)
    except FileNotFoundError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except (ProfileSyntaxError, InvariantViolation, UnknownDialect, MalformedInput) as exc:
        return _fail(EXIT_INPUT, str(exc))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    regions = detect_hotspots(doc, _thresholds(cfg, args))
    print(f"{'path':<40} {'lines':<12} {'reason':<8} score")
    for r in regions:
        span = f"{r.start_line}-{r.end_line}"
        print(f"{r.path:<40} {span:<12} {r.reason:<8} {r.score:.2f}")
    return EXIT_OK


def cmd_suggest(args) -> int:
    try:
        cfg = load_config(args.config)
        eps = _endpoints(cfg, args)
        doc = _load_profile(args.profile, args.dialect)
        templates = load_templates(args.templates_dir or cfg.templates_dir)
    except FileNotFoundError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except (ProfileSyntaxError, InvariantViolation, UnknownDialect, MalformedInput) as exc:
        return _fail(EXIT_INPUT, str(exc))
    except (ConfigError, ValueError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    if all(not health_check(ep).reachable for ep in eps.values()):
        return _fail(EXIT_ENDPOINT, "no configured endpoint is reachable")

    sources = file_source_provider(args.source_root or cfg.source_root)
    try:
        batch = suggest(
            doc,
            sources,
            list(eps.values()),
            _thresholds(cfg, args),
            templates=templates,
            parallelism=cfg.parallelism,
        )
    except SourceMismatch as exc:
        return _fail(EXIT_INPUT, str(exc))

    for failure in batch.failures:
        print(
            f"perfadvisor: {failure.path}:{failure.start_line} x {failure.model}: "
            f"{failure.stage}: {failure.message}",
            file=sys.stderr,
        )
    if not batch.suggestions:
        print("no suggestions produced")
        return EXIT_NO_RESULT

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "suggestions.json").write_text(
        dump_suggestions(batch.suggestions), encoding="utf-8"
    )
    patches = write_patch_files(batch.suggestions, out_dir / "patches")
    print(
        f"wrote {len(batch.suggestions)} suggestion(s) to {out_dir / 'suggestions.json'} "
        f"and {len(patches)} patch file(s)"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        original = Path(args.original).read_text(encoding="utf-8")
        candidate = Path(args.candidate).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    base = cfg.run_spec
    spec = RunSpec(
        interpreter_cmd=base.interpreter_cmd,
        timeout_s=args.timeout if args.timeout is not None else base.timeout_s,
        repetitions=args.repetitions if args.repetitions is not None else base.repetitions,
        max_output_bytes=base.max_output_bytes,
    )
    result = bench_pair(original, candidate, spec)
    if result.failure:
        print(f"{result.failure['stage']}: {result.failure['message']}", file=sys.stderr)
        return EXIT_NO_RESULT
    if not result.correct:
        print("correct=false (outputs differ); no speedup")
        return EXIT_OK
    print(
        f"correct=true  t_original={result.t_original_s:.4f}s "
        f"t_candidate={result.t_candidate_s:.4f}s "
        f"speedup={result.speedup:.2f}x "
        f"(IQR {result.spread_original:.4f}s / {result.spread_candidate:.4f}s)"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        cfg = load_config(args.config)
        eps = _endpoints(cfg, args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        corpus = load_corpus(args.corpus_dir)
    except (MalformedInput, OSError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    if not corpus:
        return _fail(EXIT_INPUT, f"no corpus entries under {args.corpus_dir}")
    if all(not health_check(ep).reachable for ep in eps.values()):
        return _fail(EXIT_ENDPOINT, "no configured endpoint is reachable")

    bad = validate_corpus(corpus, cfg.run_spec)
    if bad:
        return _fail(EXIT_INPUT, f"corpus entries do not run clean: {', '.join(bad)}")

    report = run_eval(corpus, list(eps.values()), cfg.run_spec, cfg.accel_keywords)
    try:
        text = render_report(report, args.format)
    except PerfAdvisorError as exc:
        return _fail(EXIT_INPUT, str(exc))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        print(text, end="")
    if all(r.skipped for r in report.records):
        return EXIT_NO_RESULT
    return EXIT_OK


def cmd_models(args) -> int:
    try:
        cfg = load_config(args.config)
        for spec in args.endpoint or []:
            name, ep = parse_endpoint_spec(spec)
            cfg.endpoints[name] = ep
        cfg.require_endpoints()
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    reachable_any = False
    for name, ep in cfg.endpoints.items():
        try:
            names = list_models(ep)
        except PerfAdvisorError as exc:
            print(f"{name} ({ep.base_url}): unreachable: {exc}", file=sys.stderr)
            continue
        reachable_any = True
        print(f"{name} ({ep.base_url}, {ep.protocol}):")
        for model in names:
            print(f"  {model}")
    return EXIT_OK if reachable_any else EXIT_ENDPOINT


def cmd_serve(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.listen:
            cfg.listen_addr = args.listen
        if args.source_root:
            cfg.source_root = args.source_root
        if args.ui_assets:
            cfg.ui_assets_dir = args.ui_assets
        doc = None
        if args.profile:
            doc = _load_profile(args.profile, args.dialect)
    except (ProfileSyntaxError, InvariantViolation, UnknownDialect, MalformedInput, FileNotFoundError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))

    from .service import create_app  # deferred: keeps CLI import light

    app = create_app(cfg, profile_doc=doc)
    host, _, port = cfg.listen_addr.rpartition(":")
    try:
        import uvicorn

        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    except ValueError as exc:
        return _fail(EXIT_CONFIG, f"bad listen address {cfg.listen_addr!r}: {exc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perfadvisor",
        description="Find hotspots in line-level profiles, ask local models for "
        "optimizations, and benchmark the answers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config file (INI); see README for keys")

    def profile_flags(p):
        p.add_argument("profile", help="profile document path")
        p.add_argument(
            "--dialect",
            help="ingest via an adapter (e.g. scalene-json) instead of the canonical format",
        )

    def threshold_flags(p):
        p.add_argument("--cpu-pct", type=float, help="CPU share trigger, percent")
        p.add_argument("--mem-peak-mb", type=float, help="peak memory trigger, MB")
        p.add_argument("--copy-mb-per-s", type=float, help="copy volume trigger, MB/s")
        p.add_argument("--merge-gap", type=int, help="max unflagged lines inside one region")
        p.add_argument("--context-pad", type=int, help="context padding outside functions")

    def endpoint_flags(p):
        p.add_argument(
            "--model", action="append",
            help="endpoint to use, by config name or model name (repeatable; default all)",
        )
        p.add_argument(
            "--endpoint", action="append",
            help="ad-hoc endpoint as model@base_url[#protocol] (repeatable)",
        )

    p = sub.add_parser("analyze", help="print the hotspot table for a profile")
    common(p); profile_flags(p); threshold_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("suggest", help="ask configured models to optimize each hotspot")
    common(p); profile_flags(p); threshold_flags(p); endpoint_flags(p)
    p.add_argument("--source-root", help="directory profiled paths resolve against")
    p.add_argument("--out", default="suggestions", help="output directory (default: suggestions)")
    p.add_argument("--templates-dir", help="prompt template overrides")
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("bench", help="benchmark a candidate file against an original file")
    common(p)
    p.add_argument("original")
    p.add_argument("candidate")
    p.add_argument("--timeout", type=float, help="per-run wall budget, seconds")
    p.add_argument("--repetitions", type=int, help="timed repetitions per side (>= 3)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval", help="sweep a snippet corpus across models and rank them")
    common(p); endpoint_flags(p)
    p.add_argument("corpus_dir", help="corpus directory (one subdir per entry)")
    p.add_argument("--format", default="table-text", choices=["table-text", "markdown", "json"])
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("models", help="list models advertised by each configured endpoint")
    common(p)
    p.add_argument(
        "--endpoint", action="append",
        help="ad-hoc endpoint as model@base_url[#protocol] (repeatable)",
    )
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("serve", help="run the HTTP service and web UI")
    common(p)
    p.add_argument("--listen", help="host:port (default 127.0.0.1:8765)")
    p.add_argument("--profile", help="profile document to preload")
    p.add_argument("--dialect", help="adapter for --profile")
    p.add_argument("--source-root", help="directory profiled paths resolve against")
    p.add_argument("--ui-assets", help="built web UI directory to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PerfAdvisorError as exc:
        return _fail(EXIT_INPUT, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
