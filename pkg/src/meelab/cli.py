"""Command line entry point: ``meelab {train,eval,bench,suite}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .channel import MODES, FeatureCodec, transmit
from .config import LOSSES, ExperimentConfig, load_config, use_case_1
from .errors import MeeLabError
from .harness import (
    benchmark_complexity,
    evaluate_med,
    prepare_data,
    summary_csv,
    summary_row,
    train,
    write_atomic,
)
from .nn import Network
from .suite import run_suite_file

logger = logging.getLogger("meelab")


def _add_common(p: argparse.ArgumentParser, out_required: bool = False) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--out", type=Path, required=out_required, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--loss", choices=LOSSES)
    p.add_argument("--channel", choices=MODES)
    p.add_argument("--snr-db", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--paper-literal-sign", action="store_true", default=None)
    p.add_argument("--abs-residual", action="store_true", default=None)
    p.add_argument("--no-calibrate-bias", dest="calibrate_bias", action="store_false", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meelab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model and write its epoch log")
    _add_common(p, out_required=True)

    p = sub.add_parser("eval", help="evaluate a saved model on the configured test split")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True, help="model.npz written by train")

    p = sub.add_parser("bench", help="time kernel vs matrix MEE training")
    _add_common(p)
    p.add_argument("--bench-epochs", type=int, default=10)

    p = sub.add_parser("suite", help="run a suite document")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--no-svg", action="store_true")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else use_case_1()
    cfg = cfg.with_overrides(
        seed=args.seed,
        loss=args.loss,
        epochs=args.epochs,
        paper_literal_sign=args.paper_literal_sign,
        abs_residual=args.abs_residual,
        calibrate_bias=args.calibrate_bias,
        channel_mode=args.channel,
        snr_db=args.snr_db,
    )
    return cfg


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    res = train(cfg, prepare_data(cfg))
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "log.csv", res.log.to_csv())
    write_atomic(out / "summary.csv", summary_csv([summary_row(res)]))
    write_atomic(out / "config.json", json.dumps(cfg.to_dict(), indent=2) + "\n")
    write_atomic(out / "eval.json", json.dumps(asdict(res.report), indent=2) + "\n")
    res.network.save(out / "model.npz")
    print(json.dumps({"run_id": cfg.name, **asdict(res.report)}))
    return 0


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    train_ds, test_ds = prepare_data(cfg)
    net = Network.load(args.model)
    codec = FeatureCodec.fit(train_ds.features)
    x = transmit(test_ds.features, codec, cfg.channel, np.random.default_rng([cfg.channel.seed, 2]))
    rep = evaluate_med(net, test_ds, x)
    text = json.dumps(asdict(rep), indent=2) + "\n"
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        write_atomic(args.out / "eval.json", text)
    print(text, end="")
    return 0


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    rep = benchmark_complexity(cfg, prepare_data(cfg), epochs=args.bench_epochs)
    text = json.dumps({"backend": BACKEND, **asdict(rep)}, indent=2) + "\n"
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        write_atomic(args.out / "bench.json", text)
    print(text, end="")
    return 0


def cmd_suite(args) -> int:
    failures = run_suite_file(args.config, args.out, svg=not args.no_svg)
    if failures:
        print(f"{failures} run(s) failed", file=sys.stderr)
    return 1 if failures else 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "bench": cmd_bench, "suite": cmd_suite}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MeeLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
