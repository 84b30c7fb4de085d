"""Command line entry points: pipeline, report and explain subcommands."""

from __future__ import annotations

import argparse
import sys
from datetime import datetime
from pathlib import Path

from . import __version__, explain, pipeline, report, store
from .explain import QUESTION_KINDS


def _add_run_flags(parser: argparse.ArgumentParser, with_training: bool) -> None:
    if with_training:
        parser.add_argument("--seed", type=int, default=0, help="RNG seed (init and shuffling)")
        parser.add_argument("--epochs", type=int, default=20, help="training epochs")
        parser.add_argument("--hidden", type=int, default=50, help="LSTM hidden units")
        parser.add_argument("--lookback", type=int, default=1, help="input window length in hours")
        parser.add_argument("--batch", type=int, default=32, help="minibatch size")
        parser.add_argument("--lr", type=float, default=0.001, help="Adam learning rate")
    parser.add_argument(
        "--train-fraction", type=float, default=0.5, help="chronological train split fraction"
    )
    parser.add_argument("--tariff", type=float, default=0.182, help="electricity price per kWh")
    parser.add_argument("--window", type=int, default=200, help="decision window length in hours")
    parser.add_argument(
        "--window-offset", type=int, default=0, help="skip this many test hours before the window"
    )
    parser.add_argument(
        "--savings-basis",
        choices=("actual", "predicted"),
        default="actual",
        help="measure savings against actual or predicted overrun",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powercast",
        description="Predict next-hour household power, warn on overruns, explain the outcome.",
    )
    parser.add_argument("--version", action="version", version=f"powercast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pipe = sub.add_parser("pipeline", help="run the full batch pipeline on a meter file")
    p_pipe.add_argument("--data", required=True, type=Path, help="minute-resolution meter file")
    p_pipe.add_argument("--out", required=True, type=Path, help="output directory for artifacts")
    _add_run_flags(p_pipe, with_training=True)

    p_rep = sub.add_parser("report", help="rebuild decision/savings reports from stored artifacts")
    p_rep.add_argument("--out", required=True, type=Path, help="directory holding pipeline artifacts")
    _add_run_flags(p_rep, with_training=False)

    p_exp = sub.add_parser("explain", help="answer a consumer question about one hour")
    p_exp.add_argument("--out", required=True, type=Path, help="directory holding pipeline artifacts")
    p_exp.add_argument("--hour", required=True, help="hour start, ISO format (e.g. 2010-01-05T18:00)")
    p_exp.add_argument("--question", required=True, choices=QUESTION_KINDS)
    return parser


def _options_from_args(args: argparse.Namespace) -> pipeline.PipelineOptions:
    return pipeline.PipelineOptions(
        data=getattr(args, "data", Path()),
        out=args.out,
        seed=getattr(args, "seed", 0),
        epochs=getattr(args, "epochs", 20),
        hidden=getattr(args, "hidden", 50),
        lookback=getattr(args, "lookback", 1),
        batch=getattr(args, "batch", 32),
        lr=getattr(args, "lr", 0.001),
        train_fraction=args.train_fraction,
        tariff=args.tariff,
        window=args.window,
        window_offset=args.window_offset,
        savings_basis=args.savings_basis,
    )


def _cmd_explain(args: argparse.Namespace) -> int:
    layout = store.StoreLayout(Path(args.out))
    try:
        hour = datetime.fromisoformat(args.hour)
    except ValueError:
        print(f"error: --hour {args.hour!r} is not an ISO timestamp", file=sys.stderr)
        return 1
    if args.question == "why_controlled":
        decisions_path = layout.reports_dir / "decisions.csv"
        if not decisions_path.exists():
            print(f"error: no decisions report at {decisions_path}", file=sys.stderr)
            return 1
        match = next(
            (r for r in report.read_decisions(decisions_path) if r.hour_start == hour), None
        )
        result = explain.answer(args.question, decision=match)
    else:
        hourly = store.load_hourly(layout.hourly)
        match = next((r for r in hourly if r.hour_start == hour), None)
        result = explain.answer(args.question, hourly=match)
    print(result.sentence)
    for name, (value, unit) in result.evidence.items():
        print(f"  {name} = {value!r} {unit}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "pipeline":
            pipeline.run_pipeline(_options_from_args(args))
            return 0
        if args.command == "report":
            pipeline.run_report(_options_from_args(args))
            return 0
        return _cmd_explain(args)
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (store.StoreError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
