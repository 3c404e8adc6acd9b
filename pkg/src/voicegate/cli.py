"""Command-line entry points: build-index, serve, and the eval harness."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import data
from .corpus import import_corpus, load_fixture_manifest
from .embedding import build_index, load_index, save_index
from .errors import VoicegateError
from .evaluate import (
    EvalReport,
    Percentiles,
    RateEstimate,
    emit_report,
    eval_end_to_end,
    eval_stt,
    eval_ttc,
)
from .grammar import CommandCatalog
from .pipeline import DEFAULT_K, DEFAULT_THRESHOLD
from .server import ServerConfig, serve
from .transcribe import FixtureBackend, HttpBackend, get_backend


def _load_catalog(args) -> CommandCatalog:
    path = args.grammar or str(data.grammar_path())
    return CommandCatalog.from_file(path)


def _load_records(path: str, catalog: CommandCatalog):
    result = import_corpus(Path(path).read_text(encoding="utf-8"), catalog)
    for error in result.errors:
        print(f"corpus line {error.line_no}: {error.message}", file=sys.stderr)
    if not result.records:
        raise VoicegateError(f"no usable records in {path}")
    return result.records


def _load_fixtures(path: str, catalog: CommandCatalog):
    result = load_fixture_manifest(path, catalog)
    for error in result.errors:
        print(f"manifest line {error.line_no}: {error.message}", file=sys.stderr)
    if not result.fixtures:
        raise VoicegateError(f"no usable fixtures in {path}")
    return result.fixtures


def _resolve_backend(args, fixtures) -> object:
    name = args.backend
    if name == "fixture":
        return FixtureBackend(fixtures or ())
    if name.startswith(("http://", "https://")):
        return HttpBackend(name)
    return get_backend(name)


def _emit(args, report_text: str) -> None:
    if args.out:
        Path(args.out).write_text(report_text, encoding="utf-8")
    else:
        print(report_text, end="")


def cmd_build_index(args) -> int:
    catalog = _load_catalog(args)
    records = _load_records(args.corpus, catalog)
    index = build_index(records, mode=args.mode)
    save_index(index, args.out)
    print(f"indexed {len(index)} entries -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    if args.config:
        config = ServerConfig.from_file(
            args.config,
            host=args.host,
            port=args.port,
            grammar_path=args.grammar,
            index_path=args.index,
            fixtures_path=args.fixtures,
            threshold=args.threshold,
            k=args.k,
            ws_port=args.ws_port,
        )
    else:
        config = ServerConfig(
            host=args.host or "127.0.0.1",
            port=args.port or 0,
            grammar_path=args.grammar,
            index_path=args.index,
            fixtures_path=args.fixtures,
            threshold=args.threshold if args.threshold is not None else DEFAULT_THRESHOLD,
            k=args.k if args.k is not None else DEFAULT_K,
            ws_port=args.ws_port,
        )
    server = serve(config)
    # Flush eagerly: launchers watch stdout for the bound ports.
    print(f"gateway listening on {server.host}:{server.port}", flush=True)
    if server.ws_port is not None:
        print(f"websocket bridge on ws://{server.host}:{server.ws_port}", flush=True)
    try:
        import threading

        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def cmd_eval_stt(args) -> int:
    catalog = _load_catalog(args)
    fixtures = _load_fixtures(args.fixtures, catalog)
    backend = _resolve_backend(args, fixtures)
    result = eval_stt(fixtures, backend)
    report = EvalReport(
        utterances=len(fixtures),
        s_stt=result.rate,
        s_ttc=RateEstimate(0, 1),
        s_stc_measured=RateEstimate(0, 1),
        per_accent={
            accent: {
                "count": stats["count"],
                "stt_successes": stats["successes"],
                "mean_wer": stats["mean_wer"],
            }
            for accent, stats in result.per_accent.items()
        },
        latency_ms=(
            {"stt_ms": Percentiles(*_stt_percentiles(result))}
            if any(o.stt_ms is not None for o in result.outcomes)
            else {}
        ),
    )
    print(
        f"s_stt = {result.rate.rate:.4f} ± {result.rate.stderr:.4f} "
        f"({result.rate.successes}/{result.rate.total})"
    )
    for outcome in result.outcomes:
        if not outcome.ok:
            print(
                f"  stt failure [{outcome.accent}] {outcome.audio_ref}: "
                f"{outcome.error or outcome.transcript!r}"
            )
    _emit(args, emit_report(report, args.format))
    return 0


def _stt_percentiles(result):
    from .evaluate import percentiles

    values = [o.stt_ms for o in result.outcomes if o.stt_ms is not None]
    p = percentiles(values)
    return p.p50, p.p90, p.p99


def cmd_eval_ttc(args) -> int:
    catalog = _load_catalog(args)
    records = _load_records(args.corpus, catalog)
    index = load_index(args.index) if args.index else build_index(records)
    result = eval_ttc(
        records,
        index,
        catalog,
        threshold=args.threshold,
        held_out=args.held_out,
    )
    mode = "leave-one-out" if args.held_out else "training-mode"
    print(
        f"s_ttc ({mode}) = {result.rate.rate:.4f} ± {result.rate.stderr:.4f} "
        f"({result.rate.successes}/{result.rate.total})"
    )
    for outcome in result.failures[:50]:
        print(
            f"  ttc failure {outcome.text!r}: expected {outcome.expected}, "
            f"observed {outcome.observed} ({outcome.status})"
        )
    if args.out:
        lines = [
            f"| {o.text} | {o.expected} | {o.observed} | {o.score:.4f} | {o.status} |"
            for o in result.failures
        ]
        body = (
            f"s_ttc ({mode}): {result.rate.rate:.6f} ± {result.rate.stderr:.6f}\n\n"
            "| text | expected | observed | score | status |\n| --- | --- | --- | --- | --- |\n"
            + "\n".join(lines)
            + "\n"
        )
        Path(args.out).write_text(body, encoding="utf-8")
    return 0


def cmd_eval_e2e(args) -> int:
    catalog = _load_catalog(args)
    fixtures = _load_fixtures(args.fixtures, catalog)
    if args.index:
        index = load_index(args.index)
    elif args.corpus:
        index = build_index(_load_records(args.corpus, catalog))
    else:
        raise VoicegateError("eval e2e needs --index or --corpus")
    backend = _resolve_backend(args, fixtures)
    report = eval_end_to_end(
        fixtures, index, catalog, backend, threshold=args.threshold
    )
    print(
        f"s_stt = {report.s_stt.rate:.4f}  s_ttc = {report.s_ttc.rate:.4f}  "
        f"product = {report.s_stc_product:.4f}  measured = {report.s_stc_measured.rate:.4f}"
    )
    _emit(args, emit_report(report, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voicegate",
        description="Natural-language command gateway and evaluation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build-index", help="embed a corpus into an index file")
    build.add_argument("--corpus", required=True)
    build.add_argument("--grammar", default=None)
    build.add_argument("--out", required=True)
    build.add_argument("--mode", choices=["query_key", "instruction_doc"], default="query_key")
    build.set_defaults(fn=cmd_build_index)

    srv = sub.add_parser("serve", help="run the TCP gateway")
    srv.add_argument("--config", default=None, help="JSON config file; flags override")
    srv.add_argument("--host", default=None)
    srv.add_argument("--port", type=int, default=None)
    srv.add_argument("--grammar", default=None)
    srv.add_argument("--index", default=None)
    srv.add_argument("--fixtures", default=None)
    srv.add_argument("--threshold", type=float, default=None)
    srv.add_argument("--k", type=int, default=None)
    srv.add_argument("--ws-port", type=int, default=None, dest="ws_port")
    srv.set_defaults(fn=cmd_serve)

    ev = sub.add_parser("eval", help="robustness and latency evaluations")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)

    def common(p):
        p.add_argument("--grammar", default=None)
        p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "markdown"], default="json")

    stt = ev_sub.add_parser("stt", help="speech-to-text success rate over fixtures")
    stt.add_argument("--fixtures", required=True)
    stt.add_argument("--backend", default="fixture")
    common(stt)
    stt.set_defaults(fn=cmd_eval_stt)

    ttc = ev_sub.add_parser("ttc", help="text-to-command success rate over a corpus")
    ttc.add_argument("--corpus", required=True)
    ttc.add_argument("--index", default=None)
    ttc.add_argument("--held-out", action="store_true", dest="held_out")
    common(ttc)
    ttc.set_defaults(fn=cmd_eval_ttc)

    e2e = ev_sub.add_parser("e2e", help="audio-to-command end to end")
    e2e.add_argument("--fixtures", required=True)
    e2e.add_argument("--corpus", default=None)
    e2e.add_argument("--index", default=None)
    e2e.add_argument("--backend", default="fixture")
    common(e2e)
    e2e.set_defaults(fn=cmd_eval_e2e)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except VoicegateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
