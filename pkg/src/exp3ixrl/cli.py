"""Command line: ``run``, ``table1`` and ``sweep-certainty``.

Failures exit nonzero after printing one JSON line ``{"error": ..., "message": ...}`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .harness import ConfigError, ExperimentConfig, fmt, run_matrix, sweep_certainty, table1_configs

DEFAULT_SWEEP = (250, 500, 1000, 2000, 4000, 8000, 12000)

_OVERRIDES = ("env", "algo", "teacher", "train_steps", "eval_steps", "runs", "seed", "certainty", "out_dir")


def _add_common(p: argparse.ArgumentParser, with_cell: bool = True) -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    if with_cell:
        p.add_argument("--env", choices=("det_mab", "stoch_mab", "ring"))
        p.add_argument("--algo", choices=("exp3", "exp3ix", "teacher-only", "exp3ixrl"))
        p.add_argument("--teacher", choices=("eps_greedy", "ucb", "gradient", "qlearning"))
    p.add_argument("--train-steps", type=int)
    p.add_argument("--eval-steps", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--certainty", type=int)
    p.add_argument("--out-dir", help="output directory (default: $EXP3IXRL_OUT_DIR)")
    p.add_argument("--workers", type=int, default=1, help="parallel processes across runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exp3ixrl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="one benchmark cell"))
    _add_common(sub.add_parser("table1", help="bandit benchmark matrix (16 cells)"), with_cell=False)
    sweep = sub.add_parser("sweep-certainty", help="Exp3-IXrl over a list of certainty thresholds")
    _add_common(sweep)
    sweep.add_argument(
        "--thresholds",
        default=",".join(map(str, DEFAULT_SWEEP)),
        help="comma-separated thresholds (default: %(default)s)",
    )
    return parser


def config_from_args(args, **defaults) -> ExperimentConfig:
    data = dict(defaults)
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    for key in _OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if data.get("env") == "ring" and "teacher" not in data:
        data["teacher"] = "qlearning"
    return ExperimentConfig.from_dict(data)


def _print_rows(rows) -> None:
    print(f"{'env':<10} {'algo':<13} {'teacher':<11} {'mean':>10} {'std':>10} {'runs':>5}")
    for r in rows:
        print(f"{r.env:<10} {r.algo:<13} {r.teacher:<11} {fmt(r.mean):>10} {fmt(r.std):>10} {r.runs:>5}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = config_from_args(args)
            result = run_matrix([cfg], cfg.out_dir, workers=args.workers, stem="run")
            _print_rows(result.rows)
        elif args.command == "table1":
            base = config_from_args(args)
            configs = [
                replace(c, out_dir=base.out_dir)
                for c in table1_configs(base.train_steps, base.eval_steps, base.runs, base.certainty, base.seed)
            ]
            result = run_matrix(configs, base.out_dir, workers=args.workers, stem="table1")
            _print_rows(result.rows)
        else:
            cfg = config_from_args(args, algo="exp3ixrl")
            thresholds = [int(x) for x in args.thresholds.split(",") if x.strip()]
            rows, _ = sweep_certainty(cfg, thresholds, cfg.out_dir, workers=args.workers)
            print(f"{'threshold':>9} {'mean':>10} {'std':>10}")
            for c, r in rows:
                print(f"{c:>9} {fmt(r.mean):>10} {fmt(r.std):>10}")
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        kind = "config" if isinstance(exc, (ConfigError, TypeError)) else type(exc).__name__
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return 2 if kind == "config" else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
