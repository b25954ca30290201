"""Command-line entry point: ``mlpr solve | bench | profile | generate``.

Exit codes: 0 on convergence, 1 on solver failure, 2 on input error.
"""

import argparse
import sys

import numpy as np

from .bench import (DEFAULT_ALPHAS, METHODS, PERRON_METHODS, performance_profile,
                    profile_to_csv, random_instances, read_records, records_to_csv,
                    run_benchmark, solve_with, load_instances)
from .equation import DEFAULT_TOL
from .errors import InputError, MlprError, SubcriticalError
from .report import SolverOptions
from .tensor import load_problem, random_problem, save_problem

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def _methods(text):
    if text == "all":
        return list(METHODS)
    out = [m.strip() for m in text.split(",") if m.strip()]
    for m in out:
        if m not in METHODS:
            raise argparse.ArgumentTypeError(f"unknown method {m!r}")
    return out


def _initial_guess(choice, p):
    if choice == "v":
        return None
    if choice == "uniform":
        return np.full(p.n, 1.0 / p.n)
    with open(choice, encoding="utf-8") as fh:
        x0 = np.array(_floats(fh.read().split("#")[0]))
    if x0.shape != (p.n,):
        raise InputError(f"{choice}: expected {p.n} numbers for x0, found {x0.size}")
    return x0


def _fmt(x):
    return " ".join(f"{v:.17g}" for v in x)


def cmd_solve(args):
    p = load_problem(args.tensor, args.alpha)
    if args.method in PERRON_METHODS and p.alpha <= 0.5:
        raise SubcriticalError(
            f"method {args.method!r} requires the supercritical case alpha > 1/2, "
            f"got alpha = {p.alpha:g}")
    if "-" in args.method and p.alpha <= 0.6:
        raise SubcriticalError("continuation starts at alpha = 0.6; alpha must exceed it")
    opts = SolverOptions(args.tol, args.max_iter, args.history)
    rep, its, trace = solve_with(args.method, p, _initial_guess(args.x0, p), opts, args.tau)
    out = sys.stdout
    print(f"method: {args.method}", file=out)
    print(f"status: {rep.status.value}", file=out)
    print(f"iterations: {its}", file=out)
    print(f"residual: {rep.residual:.6e}", file=out)
    print(f"sum: {rep.sum:.17g}", file=out)
    print(f"classification: {rep.classification or 'none'}", file=out)
    if trace is not None:
        print(f"stages: {len(trace)}", file=out)
    print(f"x: {_fmt(rep.x)}", file=out)
    if args.history and rep.residual_history is not None:
        print(f"history: {_fmt(rep.residual_history)}", file=out)
    if rep.message:
        print(f"message: {rep.message}", file=sys.stderr)
    return EXIT_OK if rep.converged else EXIT_FAIL


def cmd_bench(args):
    if args.random is not None:
        instances = random_instances(args.random, args.seed, density=args.density)
    elif args.directory is not None:
        instances = load_instances(args.directory)
    else:
        raise InputError("give an instance directory or --random COUNT")
    opts = SolverOptions(args.tol, args.max_iter)
    records = run_benchmark(instances, args.alphas, args.methods, opts, args.tau, args.jobs)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            records_to_csv(records, fh)
    else:
        records_to_csv(records, sys.stdout)
    if args.profile:
        if not records:
            raise InputError("no records to build a performance profile from")
        grid, curves = performance_profile(records, args.measure)
        with open(args.profile, "w", newline="", encoding="utf-8") as fh:
            profile_to_csv(grid, curves, fh)
    return EXIT_OK


def cmd_profile(args):
    with open(args.results, newline="", encoding="utf-8") as fh:
        records = read_records(fh)
    if not records:
        raise InputError(f"{args.results}: no records")
    grid, curves = performance_profile(records, args.measure)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            profile_to_csv(grid, curves, fh)
    else:
        profile_to_csv(grid, curves, sys.stdout)
    return EXIT_OK


def cmd_generate(args):
    save_problem(random_problem(args.n, args.seed, args.density), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="mlpr", description="Multilinear PageRank solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="1-norm residual threshold (default sqrt(eps))")
        sp.add_argument("--max-iter", type=int, default=10_000)
        sp.add_argument("--tau", type=float, default=0.01,
                        help="continuation target change per stage")

    sp = sub.add_parser("solve", help="solve one instance")
    sp.add_argument("--tensor", required=True, help=".mlpr instance file")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--method", required=True, choices=METHODS)
    sp.add_argument("--x0", default="v", help="v, uniform, or a file of n numbers")
    sp.add_argument("--history", action="store_true", help="print the residual history")
    solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="run a benchmark sweep and write CSV")
    sp.add_argument("directory", nargs="?", help="directory of .mlpr files")
    sp.add_argument("--random", type=int, metavar="COUNT",
                    help="use COUNT random instances (n cycles through 3, 4, 6)")
    sp.add_argument("--seed", type=int, default=0, help="overridden by MLPR_SEED")
    sp.add_argument("--density", type=float, default=1.0)
    sp.add_argument("--alphas", type=_floats, default=list(DEFAULT_ALPHAS))
    sp.add_argument("--methods", type=_methods, default=list(METHODS))
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", help="CSV path (default: stdout)")
    sp.add_argument("--profile", help="also write a performance-profile CSV here")
    sp.add_argument("--measure", choices=("iterations", "time"), default="iterations")
    sp.set_defaults(func=cmd_bench)
    solver_flags(sp)

    sp = sub.add_parser("profile", help="performance profile from a results CSV")
    sp.add_argument("results")
    sp.add_argument("--measure", choices=("iterations", "time"), default="iterations")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("generate", help="write a random .mlpr instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--density", type=float, default=1.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError, ValueError) as exc:
        print(f"mlpr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MlprError as exc:
        print(f"mlpr: solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
