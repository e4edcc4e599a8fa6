"""Command-line surface: one subcommand per pipeline stage.

Exit codes: 0 on success, 2 for usage errors (argparse), 1 for any failure
on a documented contract path, reported as a single JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import (
    RunConfig,
    chat_backend_from_spec,
    embedder_from_spec,
    extractor_from_spec,
    resolve_config,
)
from .corpus import template_version
from .dialogue import DialogueSession, SessionStore, respond
from .errors import FinragError
from .knowledge_store import VectorIndex
from . import pipeline


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (flags and env override it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finrag",
        description="Retrieval-grounded stock analysis: prediction, backtesting, and Q&A.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus file and print its stats")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="also write the stats JSON here")

    p = sub.add_parser("index", help="build a vector index from a corpus")
    _add_config_flag(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embedder", help="hash:<dim> | replay:<file>")
    p.add_argument("--extractor", help="head:<n> | scripted:<file> | replay:<dir>")
    p.add_argument("--granularity", choices=["summary", "qa", "both"], default="summary")
    p.add_argument("--seed", type=int, help="recorded in run metadata")

    p = sub.add_parser("retrieve", help="query an index")
    _add_config_flag(p)
    p.add_argument("--index", required=True)
    p.add_argument("-q", "--query", required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--embedder")
    p.add_argument("--granularity", choices=["summary", "qa_pair"])

    p = sub.add_parser("predict", help="run stage-1 trend prediction over a corpus")
    _add_config_flag(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", help="scripted:<file> | replay:<dir> | remote:<url>")
    p.add_argument("--from-month", dest="from_month")
    p.add_argument("--to-month", dest="to_month")
    p.add_argument("--seed", type=int, help="recorded in run metadata")

    p = sub.add_parser("backtest", help="run the monthly strategy and metric suite")
    _add_config_flag(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--benchmark")
    p.add_argument("--rf", type=float)
    p.add_argument("--from-month", dest="from_month")
    p.add_argument("--to-month", dest="to_month")
    p.add_argument("--out", help="report JSON path (default: print to stdout)")
    p.add_argument("--curve-out", dest="curve_out", help="equity-curve CSV path")
    p.add_argument("--fig-out", dest="fig_out", help="equity-curve PNG path")

    p = sub.add_parser("eval", help="score an eval manifest (ROUGE and/or judging)")
    _add_config_flag(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out")
    p.add_argument("--judge", help="scripted:<file> | replay:<dir> | remote:<url>")
    p.add_argument("--fig-out", dest="fig_out", help="preference bar-chart PNG path")

    p = sub.add_parser("chat", help="answer one query (or start a REPL) over an index")
    _add_config_flag(p)
    p.add_argument("--index", required=True)
    p.add_argument("--model", help="scripted:<file> | replay:<dir> | remote:<url>")
    p.add_argument("--embedder")
    p.add_argument("-k", type=int)
    p.add_argument("--query", help="one-shot query; omit for an interactive loop")
    p.add_argument("--session", default="cli")
    p.add_argument("--sessions-dir", dest="sessions_dir")

    p = sub.add_parser("serve", help="run the HTTP API")
    _add_config_flag(p)
    p.add_argument("--index")
    p.add_argument("--model")
    p.add_argument("--embedder")
    p.add_argument("--port", type=int)
    p.add_argument("--artifacts-dir", dest="artifacts_dir")
    p.add_argument("--sessions-dir", dest="sessions_dir")
    p.add_argument("--scenarios-dir", dest="scenarios_dir")
    p.add_argument("--ui-dir", dest="ui_dir")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    flag_names = (
        "model", "judge", "embedder", "extractor", "k", "rf", "corpus", "index",
        "port", "artifacts_dir", "sessions_dir", "scenarios_dir", "ui_dir", "seed",
    )
    flags = {name: getattr(args, name, None) for name in flag_names}
    return resolve_config(flags=flags, config_path=getattr(args, "config", None))


def _cmd_ingest(args) -> int:
    _print_json(pipeline.run_ingest(args.corpus, out=args.out))
    return 0


def _cmd_index(args) -> int:
    config = _config_from_args(args)
    summary = pipeline.run_index(
        args.corpus,
        args.out,
        embedder=embedder_from_spec(config.embedder),
        extractor=extractor_from_spec(config.extractor),
        granularity=args.granularity,
        seed=config.seed,
    )
    _print_json(summary)
    return 0


def _cmd_retrieve(args) -> int:
    embedder = None
    if args.embedder:
        embedder = embedder_from_spec(args.embedder)
    hits = pipeline.run_retrieve(
        args.index, args.query, k=args.k, embedder=embedder,
        granularity=args.granularity,
    )
    for hit in hits:
        print(json.dumps(hit, ensure_ascii=False))
    return 0


def _cmd_predict(args) -> int:
    config = _config_from_args(args)
    if config.model is None:
        raise FinragError("predict needs --model (or FINRAG_MODEL / config file)")
    months = None
    if args.from_month or args.to_month:
        if not (args.from_month and args.to_month):
            raise FinragError("--from-month and --to-month must be given together")
        months = (args.from_month, args.to_month)
    backend = chat_backend_from_spec(config.model, config.generation_settings())
    meta = pipeline.run_predict(
        args.corpus, args.out, backend, months=months, seed=config.seed
    )
    _print_json(meta)
    return 0


def _cmd_backtest(args) -> int:
    config = _config_from_args(args)
    months = None
    if args.from_month or args.to_month:
        if not (args.from_month and args.to_month):
            raise FinragError("--from-month and --to-month must be given together")
        months = (args.from_month, args.to_month)
    payload = pipeline.run_backtest(
        args.predictions,
        args.prices,
        benchmark_path=args.benchmark,
        rf=config.rf,
        months=months,
        out=args.out,
        curve_out=args.curve_out,
        fig_out=args.fig_out,
    )
    if args.out is None:
        _print_json(payload)
    return 0


def _cmd_eval(args) -> int:
    config = _config_from_args(args)
    judge = None
    if config.judge is not None:
        judge = chat_backend_from_spec(config.judge, config.generation_settings())
    payload = pipeline.run_eval(args.manifest, out=args.out, judge=judge, fig_out=args.fig_out)
    if args.out is None:
        _print_json(payload)
    return 0


def _cmd_chat(args) -> int:
    config = _config_from_args(args)
    if config.model is None:
        raise FinragError("chat needs --model (or FINRAG_MODEL / config file)")
    index = VectorIndex.load(args.index)
    if args.embedder:
        embedder = embedder_from_spec(args.embedder)
    else:
        from .config import embedder_for_index_id

        embedder = embedder_for_index_id(index.embedder_id)
    backend = chat_backend_from_spec(config.model, config.generation_settings())
    store = SessionStore(transcripts_dir=config.sessions_dir)
    session = store.get_or_create(args.session)

    def one_turn(query: str) -> dict:
        response, hits = respond(
            session, query, index, backend, embedder,
            k=config.k, history_budget=config.history_budget,
        )
        return {
            "response": response,
            "evidence": [pipeline.hit_to_json(hit) for hit in hits],
            "turn": len(session.turns),
        }

    if args.query:
        _print_json(one_turn(args.query))
        store.flush()
        return 0
    for line in sys.stdin:
        query = line.strip()
        if not query:
            continue
        _print_json(one_turn(query))
    store.flush()
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _config_from_args(args)
    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "index": _cmd_index,
    "retrieve": _cmd_retrieve,
    "predict": _cmd_predict,
    "backtest": _cmd_backtest,
    "eval": _cmd_eval,
    "chat": _cmd_chat,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FinragError as exc:
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc)},
                ensure_ascii=False,
            ),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
