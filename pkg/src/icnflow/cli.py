"""Command line: batch analysis, replay, export, server launch, lexicon checks.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .canonical import canonical_dumps
from .graph import GraphInvariantError, dot_from_snapshot
from .ingest import TranscriptError, load_transcript
from .lexicon import LexiconError, LexiconValidationError, load_lexicon
from .session import ConfigError, ReplayError, Session, SessionConfig, load_event_log, replay

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="icnflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    analyze = sub.add_parser("analyze", help="run a transcript through the pipeline")
    analyze.add_argument("--transcript", required=True)
    analyze.add_argument("--lexicon", required=True)
    analyze.add_argument("--config", default=os.environ.get("ICN_CONFIG"))
    analyze.add_argument("--problem", help="problem statement text file")
    analyze.add_argument("--out-dir", default="icnflow-out")
    analyze.add_argument("--session-id", default="")
    analyze.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    rep = sub.add_parser("replay", help="rebuild a snapshot from an event log")
    rep.add_argument("--log", required=True)
    rep.add_argument("--lexicon", required=True)
    rep.add_argument("--config", default=os.environ.get("ICN_CONFIG"))
    rep.add_argument("--problem")
    rep.add_argument("--session-id", default="")
    rep.add_argument("--from-seq", type=int, default=None, help="also print events from this seq")

    export = sub.add_parser("export", help="export a snapshot as DOT or canonical JSON")
    export.add_argument("--snapshot", required=True)
    export.add_argument("--format", choices=("dot", "json"), default="dot")

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--port", type=int, default=8040)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--lexicon-dir")

    validate = sub.add_parser("validate-lexicon", help="parse and validate a lexicon file")
    validate.add_argument("--lexicon", required=True)

    return parser


def _load_config(path: str | None) -> SessionConfig:
    return SessionConfig.from_file(path) if path else SessionConfig()


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    lexicon = load_lexicon(args.lexicon)
    transcript = load_transcript(args.transcript)
    problem = Path(args.problem).read_text(encoding="utf-8") if args.problem else ""

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "events.jsonl"
    log_path.write_text("", encoding="utf-8")

    session = Session(cfg, lexicon, problem, session_id=args.session_id, log_path=log_path)
    reports = []
    for utterance in transcript:
        session.process_utterance(utterance)
        reports.append(session.last_report.to_dict())

    snapshot = session.snapshot()
    (out_dir / "snapshot.json").write_text(canonical_dumps(snapshot) + "\n", encoding="utf-8")
    (out_dir / "metrics.json").write_text(
        canonical_dumps(session.last_report.to_dict()) + "\n", encoding="utf-8"
    )

    from . import report

    report.write_history_csv(reports, out_dir / "metrics_history.csv")
    report.write_summary(snapshot, reports, out_dir / "summary.txt")
    if not args.no_figures:
        report.render_metric_figures(reports, out_dir / "metrics_families.png")
        render = report.render_graph_figure
        render(snapshot["graph"], out_dir / "graph.png")
    print((out_dir / "summary.txt").read_text(encoding="utf-8"), end="")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    lexicon = load_lexicon(args.lexicon)
    problem = Path(args.problem).read_text(encoding="utf-8") if args.problem else ""
    events = load_event_log(args.log)
    snapshot = replay(events, cfg, lexicon, problem, session_id=args.session_id)
    print(canonical_dumps(snapshot))
    if args.from_seq is not None:
        for event in events:
            if event.seq >= args.from_seq:
                print(canonical_dumps(event.to_dict()))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    with open(args.snapshot, encoding="utf-8") as fh:
        snapshot = json.load(fh)
    if "graph" not in snapshot or "icns" not in snapshot.get("graph", {}):
        raise TranscriptError("snapshot file has no graph section")
    if args.format == "dot":
        sys.stdout.write(dot_from_snapshot(snapshot["graph"]))
    else:
        print(canonical_dumps(snapshot))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:  # pragma: no cover - long-running
    from .service import run_server

    run_server(args.host, args.port, lexicon_dir=args.lexicon_dir)
    return EXIT_OK


def cmd_validate_lexicon(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon)
    print(
        f"ok: {len(set(lexicon.lemmas.values()))} mapped lemmas, "
        f"{len(lexicon.synonym_sets)} synonym sets, "
        f"{len(lexicon.antonym_pairs)} antonym pairs, "
        f"{len(lexicon.verb_relations)} verbs, "
        f"{len(lexicon.image_cues)} cue patterns"
    )
    return EXIT_OK


_COMMANDS = {
    "analyze": cmd_analyze,
    "replay": cmd_replay,
    "export": cmd_export,
    "serve": cmd_serve,
    "validate-lexicon": cmd_validate_lexicon,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"icnflow: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_INPUT
    except (
        LexiconError,
        LexiconValidationError,
        TranscriptError,
        ConfigError,
        ReplayError,
        json.JSONDecodeError,
    ) as exc:
        print(f"icnflow: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GraphInvariantError as exc:
        print(f"icnflow: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
