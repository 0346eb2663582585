"""Command line entry point: ``python -m daqp.harness.cli <command> ...``"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from daqp.errors import DAQPError, WarmStartError
from daqp.harness.bench import (
    VARIANTS,
    records_to_csv,
    run_benchmark,
    run_sequence,
    sequence_to_csv,
    summary_to_csv,
    worst_case_summary,
)
from daqp.harness.fileformat import parse_problem, parse_solution, write_problem, write_solution
from daqp.harness.generator import GeneratorConfig, default_seed, generate_random
from daqp.oracle import kkt_residual
from daqp.prox import prox_solve
from daqp.settings import Settings
from daqp.solver import SolveStatus, WarmStart, solve_qp

logger = logging.getLogger(__name__)

EXIT_OPTIMAL = 0
EXIT_INFEASIBLE = 2
EXIT_FAILURE = 3


def _vec(values) -> str:
    return " ".join(f"{v:.17g}" for v in np.asarray(values).ravel())


def _settings(args) -> Settings:
    overrides = {
        "eps_primal": args.eps_primal,
        "prox_eps": args.eps,
        "prox_eta": args.eta,
        "iter_max": args.iter_max,
        "violation_rule": args.rule,
    }
    return Settings(**{k: v for k, v in overrides.items() if v is not None})


def _exit_code(status: SolveStatus) -> int:
    if status is SolveStatus.OPTIMAL:
        return EXIT_OPTIMAL
    if status is SolveStatus.PRIMAL_INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_FAILURE


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ===== COMMANDS =====

def cmd_solve(args) -> int:
    qp = parse_problem(Path(args.file).read_text())
    settings = _settings(args)
    if args.prox and args.warm:
        raise WarmStartError("--warm cannot be combined with --prox")
    if args.prox:
        result = prox_solve(qp, settings)
    else:
        warm = None
        if args.warm:
            sol = parse_solution(Path(args.warm).read_text(), n=qp.n)
            warm = WarmStart(sol.lam, sol.working_set(qp.m, qp.me))
        result = solve_qp(qp, settings, warm)

    print(f"status {result.status.value}")
    print(f"iterations {result.iterations}")
    if result.outer_iterations:
        print(f"outer_iterations {result.outer_iterations}")
    print(f"x {_vec(result.x)}")
    print(f"lambda {_vec(result.lam)}")
    if qp.me:
        print(f"nu {_vec(result.nu)}")
    if result.lower_bounds:
        print(f"lower_bound {result.lower_bounds[-1]:.17g}")
    if args.out:
        Path(args.out).write_text(write_solution(result))
    return _exit_code(result.status)


def cmd_gen(args) -> int:
    cfg = GeneratorConfig(
        n=args.n, m=args.m, me=args.me, kappa=args.kappa,
        seed=default_seed() if args.seed is None else args.seed,
        two_sided=args.two_sided, feasible=not args.infeasible,
    )
    _write(write_problem(generate_random(cfg)), args.out)
    return EXIT_OPTIMAL


def cmd_bench(args) -> int:
    records = run_benchmark(
        kappas=args.kappa,
        count=args.count,
        n=args.n,
        m=args.m,
        me=args.me,
        variants=args.variant,
        repeat=args.repeat,
        seed=args.seed,
        two_sided=args.two_sided,
        settings=_settings(args),
        workers=args.workers,
    )
    _write(records_to_csv(records), args.out)
    if args.summary:
        Path(args.summary).write_text(summary_to_csv(worst_case_summary(records)))
    return EXIT_OPTIMAL


def cmd_seq(args) -> int:
    qp = parse_problem(Path(args.file).read_text())
    records = run_sequence(qp, args.steps, args.scale, seed=args.seed, settings=_settings(args))
    _write(sequence_to_csv(records), args.out)
    return EXIT_OPTIMAL


def cmd_check(args) -> int:
    qp = parse_problem(Path(args.file).read_text())
    sol = parse_solution(Path(args.solution).read_text(), n=qp.n)
    report = kkt_residual(qp, sol.x, sol.lam, sol.nu)
    for name, value in report.model_dump().items():
        print(f"{name} {value:.6e}")
    return EXIT_OPTIMAL


# ===== PARSER =====

def _add_settings_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-primal", type=float, help="primal feasibility tolerance")
    p.add_argument("--eps", type=float, help="proximal regularization")
    p.add_argument("--eta", type=float, help="proximal termination tolerance")
    p.add_argument("--iter-max", type=int, help="inner iteration limit")
    p.add_argument("--rule", choices=["most_negative", "first_negative"], help="violation selection rule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="daqp", description="Dense dual active-set QP solver")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("file")
    p.add_argument("--prox", action="store_true", help="use proximal-point iterations")
    p.add_argument("--warm", help="solution file to warm-start from")
    p.add_argument("--out", help="write the solution file here")
    _add_settings_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="write a random problem file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--me", type=int, default=0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--two-sided", action="store_true")
    p.add_argument("--infeasible", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="benchmark over condition numbers, CSV output")
    p.add_argument("--kappa", type=float, nargs="*", default=[1e2, 1e4, 1e6])
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--me", type=int, default=0)
    p.add_argument("--variant", nargs="+", choices=VARIANTS, default=["plain", "prox"])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--two-sided", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--summary", help="write the worst-case summary CSV here")
    _add_settings_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("seq", help="cold vs warm iterations over a perturbed sequence")
    p.add_argument("file")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--scale", type=float, default=0.01)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    _add_settings_flags(p)
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("check", help="KKT residuals of a solution file")
    p.add_argument("file")
    p.add_argument("solution")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DAQPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
