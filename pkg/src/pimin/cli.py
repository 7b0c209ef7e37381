"""Command-line interface: single trials, sweeps, and the self-check suite.

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 self-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bccd import BccdConfig
from .bench import (Method, load_sweep_spec, run_sweep, run_trial,
                    write_records_csv)
from .errors import DomainError
from .scenario import load_config
from .selfcheck import self_check

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_CHECK = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):     # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pimin",
                     description="Path-interference minimization for RIS-aided "
                                 "bistatic sensing: trials, sweeps, self checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="solve one seeded trial")
    run_p.add_argument("--config", required=True, help="scenario JSON path")
    run_p.add_argument("--method", required=True,
                       choices=[m.value for m in Method])
    run_p.add_argument("--seed", required=True, type=int)
    run_p.add_argument("--out", required=True, help="output CSV path")
    run_p.add_argument("--n-iter", type=int, default=20,
                       help="outer iterations (default 20)")

    sweep_p = sub.add_parser("sweep", help="run a Monte Carlo parameter sweep")
    sweep_p.add_argument("--spec", required=True, help="sweep spec JSON path")
    sweep_p.add_argument("--parallelism", type=int, default=1)
    sweep_p.add_argument("--out", required=True, help="output CSV path")

    sub.add_parser("check", help="run the built-in invariant suite")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "run":
            try:
                scen = load_config(args.config)
                method = Method.parse(args.method)
            except (OSError, json.JSONDecodeError, DomainError, TypeError) as exc:
                print(f"pimin: config error: {exc}", file=sys.stderr)
                return EXIT_USAGE
            cfg = BccdConfig(n_iter=args.n_iter)
            record = run_trial(scen, method, cfg, seed=args.seed)
            write_records_csv([record], args.out)
            print(f"wrote 1 record to {args.out} "
                  f"(P_PI {record.P_PI_dB:.2f} dB, status {record.sdp_status_final})")
            return EXIT_OK

        if args.command == "sweep":
            try:
                spec = load_sweep_spec(args.spec)
            except (OSError, json.JSONDecodeError, DomainError, TypeError, KeyError) as exc:
                print(f"pimin: spec error: {exc}", file=sys.stderr)
                return EXIT_USAGE
            records, _ = run_sweep(spec, parallelism=args.parallelism,
                                   out_path=args.out)
            failures = sum(1 for r in records if r.sdp_status_final.startswith("error"))
            print(f"wrote {len(records)} records to {args.out} "
                  f"({failures} failed rows)")
            return EXIT_SOLVER if failures else EXIT_OK

        if args.command == "check":
            report = self_check()
            for line in report.lines():
                print(line)
            return EXIT_OK if report.passed else EXIT_CHECK
    except Exception as exc:    # solver-level failure
        print(f"pimin: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    return EXIT_USAGE   # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
