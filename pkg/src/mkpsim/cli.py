"""Command-line interface.

Machine-readable output (instances, reports, tables, traces) goes to stdout
or the requested file; diagnostics go to stderr.  Exit codes: 0 success,
1 a verified invariant failed, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys

from .algorithms import ALGORITHMS, run_algorithm
from .core import InstanceFormatError, instance_to_json, load_instance, save_instance
from .harness import (
    GenParams,
    SweepParams,
    gen_adversarial,
    gen_random,
    make_report,
    report_to_json,
    reports_to_csv,
    run_experiment,
    verify_instance,
    verify_sweep,
)
from .oracle import exact_optimum
from .simnet import render_trace

USAGE_ERROR = 2
INVARIANT_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkpsim",
        description="Deterministic simulator for distributed greedy "
        "multiple-knapsack dispatch protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-random", help="generate a uniform random instance")
    p.add_argument("--m", type=int, required=True, help="number of items")
    p.add_argument("--n", type=int, required=True, help="number of knapsacks")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--cost-max", type=int, default=50, help="costs drawn from [1, COST_MAX]")
    p.add_argument("--weight-max", type=int, default=50, help="weights drawn from [1, WEIGHT_MAX]")
    p.add_argument("--cap-min", type=int, default=1, help="capacity range lower bound")
    p.add_argument("--cap-max", type=int, default=100, help="capacity range upper bound")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("gen-adversarial", help="generate a worst-case family instance")
    p.add_argument("--n", type=int, required=True, help="number of knapsacks")
    p.add_argument("--W", type=int, required=True, help="common capacity (>= 3)")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("run", help="run one algorithm on an instance")
    p.add_argument("--alg", choices=ALGORITHMS, required=True)
    p.add_argument("--instance", required=True, help="instance file")
    p.add_argument("--report", help="report path (default: stdout)")
    p.add_argument("--oracle", action="store_true", help="attach exact-optimum comparison")
    p.add_argument("--trace", help="write the message trace to this path")

    p = sub.add_parser("compare", help="run several algorithms, print a table")
    p.add_argument("--instance", required=True)
    p.add_argument("--algs", nargs="+", choices=ALGORITHMS, default=list(ALGORITHMS))
    p.add_argument("--oracle", action="store_true")

    p = sub.add_parser(
        "verify",
        help="check feasibility, equivalence, accounting and bound invariants",
    )
    p.add_argument("--instance", help="verify a single instance file")
    p.add_argument(
        "--sweep",
        nargs=2,
        metavar=("m=LO..HI", "n=LO..HI"),
        help="verify a grid of random instances",
    )
    p.add_argument("--seeds", type=int, default=100, help="seeds per sweep grid point")
    p.add_argument("--cost-max", type=int, default=50)
    p.add_argument("--weight-max", type=int, default=50)
    p.add_argument("--cap-min", type=int, default=1)
    p.add_argument("--cap-max", type=int, default=100)
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_range(token: str, key: str) -> tuple[int, int]:
    prefix = key + "="
    if not token.startswith(prefix) or ".." not in token:
        raise ValueError(f"expected {key}=LO..HI, got {token!r}")
    lo_text, hi_text = token[len(prefix):].split("..", 1)
    return int(lo_text), int(hi_text)


def _emit_instance(inst, out_path) -> None:
    if out_path:
        save_instance(inst, out_path)
    else:
        sys.stdout.write(instance_to_json(inst))


def _cmd_gen_random(args) -> int:
    params = GenParams(
        args.m, args.n, args.cost_max, args.weight_max, args.cap_min, args.cap_max, args.seed
    )
    inst = gen_random(params)
    _emit_instance(inst, args.out)
    return 0


def _cmd_gen_adversarial(args) -> int:
    _emit_instance(gen_adversarial(args.n, args.W), args.out)
    return 0


def _cmd_run(args) -> int:
    inst = load_instance(args.instance)
    result = run_algorithm(args.alg, inst)
    opt = None
    oracle = "none"
    if args.oracle:
        opt = exact_optimum(inst)
        oracle = "ok" if opt is not None else "unavailable"
    report = make_report(inst, result, opt, oracle)
    _write(report_to_json(report), args.report)
    if args.trace:
        _write(render_trace(result.trace), args.trace)
    return 0


def _cmd_compare(args) -> int:
    inst = load_instance(args.instance)
    reports = run_experiment(inst, algorithms=args.algs, with_oracle=args.oracle)
    sys.stdout.write(reports_to_csv(reports))
    return 0


def _cmd_verify(args) -> int:
    if bool(args.instance) == bool(args.sweep):
        raise ValueError("verify needs exactly one of --instance or --sweep")
    if args.instance:
        verdict = verify_instance(load_instance(args.instance))
        if verdict.ok:
            sys.stdout.write("verified 1 instance: OK\n")
            return 0
        for violation in verdict.violations:
            print(f"violation: {violation}", file=sys.stderr)
        sys.stdout.write(
            f"verified 1 instance: {len(verdict.violations)} violation(s)\n"
        )
        return INVARIANT_ERROR

    m_lo, m_hi = _parse_range(args.sweep[0], "m")
    n_lo, n_hi = _parse_range(args.sweep[1], "n")
    params = SweepParams(
        m_lo,
        m_hi,
        n_lo,
        n_hi,
        args.seeds,
        cost_max=args.cost_max,
        weight_max=args.weight_max,
        cap_min=args.cap_min,
        cap_max=args.cap_max,
    )
    summary = verify_sweep(params)
    if summary.ok:
        sys.stdout.write(f"verified {summary.instances} instances: OK\n")
        return 0
    for gp, violations in summary.failures:
        for violation in violations:
            print(
                f"violation (m={gp.m} n={gp.n} seed={gp.seed}): {violation}",
                file=sys.stderr,
            )
    sys.stdout.write(
        f"verified {summary.instances} instances: "
        f"{len(summary.failures)} with violations\n"
    )
    return INVARIANT_ERROR


_COMMANDS = {
    "gen-random": _cmd_gen_random,
    "gen-adversarial": _cmd_gen_adversarial,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InstanceFormatError, OSError, ValueError) as exc:
        print(f"mkpsim: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
