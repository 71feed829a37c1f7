"""Command line interface.

    popevo run --config cfg.json [--seed-offset K]
    popevo transfer --checkpoint ck.json --config cfg.json --generations N
    popevo report DIR [DIR ...] --out summary.csv

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""
import argparse
import sys

from .config import ConfigError, parse_config
from .engine import EvaluationError
from .harness import build_report, report_to_csv, run_experiment, run_transfer


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="popevo",
                     description="Population-ratio evolution experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a seeded experiment")
    p_run.add_argument("--config", required=True, help="run config JSON")
    p_run.add_argument("--seed-offset", type=int, default=0,
                       help="shift every configured seed by this amount")

    p_tr = sub.add_parser("transfer", help="continue a checkpoint in a new world")
    p_tr.add_argument("--checkpoint", required=True)
    p_tr.add_argument("--config", required=True, help="target world run config")
    p_tr.add_argument("--generations", type=int, required=True)
    p_tr.add_argument("--reset-ratios", action="store_true",
                      help="start all transferred genomes at equal ratios")

    p_rep = sub.add_parser("report", help="aggregate run directories into a summary")
    p_rep.add_argument("dirs", nargs="+", metavar="DIR")
    p_rep.add_argument("--out", required=True, help="summary CSV path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            if args.seed_offset:
                cfg.seeds = [s + args.seed_offset for s in cfg.seeds]
            outdir = run_experiment(cfg)
            print(f"wrote artifacts to {outdir}")
        elif args.command == "transfer":
            if args.generations < 0:
                raise ConfigError("--generations must be >= 0")
            cfg = parse_config(args.config)
            outdir = run_transfer(args.checkpoint, cfg, args.generations,
                                  reset_ratios=args.reset_ratios)
            print(f"wrote transfer artifacts to {outdir}")
        else:
            try:
                rows = build_report(args.dirs)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            from .checkpoint import write_text_atomic

            write_text_atomic(args.out, report_to_csv(rows))
            print(f"wrote report to {args.out}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (EvaluationError, RuntimeError, OSError, ValueError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
