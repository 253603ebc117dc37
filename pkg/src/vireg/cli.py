"""Command-line front end: tables, diagnostics, rate checks and single solves.

Exit codes
----------
0   success
2   invariant failure (table trend bounds, diagnostic suites, rate slopes)
3   convergence failure (an iteration hit its budget before the stopping rule)
64  usage error (bad flags or parameter constraints violated)
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .diagnostics import run_all, sign_flipped
from .experiments import (
    EXAMPLE_NAMES,
    NoiseModel,
    TABLE_STOP_C,
    add_noise,
    apriori_alpha,
    build_example,
    loglog_slope,
    run_table,
    table_to_csv,
    table_to_text,
)
from .grid import Grid, norm
from .solver import residual_profile, solve_vi

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_CONVERGENCE = 3
EXIT_USAGE = 64

_EPILOG = """\
exit codes: 0 success, 2 invariant failure, 3 convergence failure, 64 usage error.

parameter constraints: the fixed-point iteration contracts only for step sizes
0 < mu < 2*tau and regularization parameters alpha <= 1/mu - 1/(2*tau), where
tau = kappa/(2*c0) is the operator's cocoercivity constant. The bundled
benchmarks use mu = kappa/2. Violations are rejected as usage errors.
"""


class _Parser(argparse.ArgumentParser):
    # usage problems exit with 64 instead of argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, with_seed: bool = True) -> None:
    p.add_argument("--example", choices=EXAMPLE_NAMES, default="example1",
                   help="benchmark problem (default: example1)")
    p.add_argument("--n-intervals", type=int, default=200, metavar="N",
                   help="grid subintervals, >= 4 (default: 200)")
    if with_seed:
        p.add_argument("--seed", type=int, default=0, help="noise seed (default: 0)")
    p.add_argument("--output", metavar="PATH", default=None,
                   help="write the main payload to PATH instead of stdout")
    p.add_argument("--format", choices=("csv", "text"), default="csv",
                   help="payload format (default: csv)")


def _emit(payload: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(payload)
    else:
        with open(output, "w", newline="\n") as fh:
            fh.write(payload)


def _check_common(parser: _Parser, args) -> None:
    if args.n_intervals < 4:
        parser.error(f"--n-intervals must be >= 4, got {args.n_intervals}")


def cmd_table(parser: _Parser, args) -> int:
    _check_common(parser, args)
    spec = build_example(args.example, Grid(args.n_intervals))
    rows = run_table(spec, seed=args.seed)

    payload = table_to_csv(rows) if args.format == "csv" else table_to_text(rows)
    _emit(payload, args.output)

    violations = []
    ratios = [r.ratio for r in rows]
    if max(ratios) / min(ratios) > 8.0:
        violations.append(
            f"ratio spread {max(ratios) / min(ratios):.3f} exceeds 8 "
            f"(min={min(ratios):.3e}, max={max(ratios):.3e})")
    if ratios[-1] > 3.0 * ratios[0]:
        violations.append(
            f"last ratio {ratios[-1]:.3e} exceeds 3x first ratio {ratios[0]:.3e}")
    for line in violations:
        print(f"invariant violation: {line}", file=sys.stderr)
    if not all(r.converged for r in rows):
        bad = [f"{r.delta:.3e}" for r in rows if not r.converged]
        print(f"non-converged rows at delta: {', '.join(bad)}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_INVARIANT if violations else EXIT_OK


def cmd_diagnostics(parser: _Parser, args) -> int:
    _check_common(parser, args)
    operator = None
    if args.flip_operator_sign:
        spec = build_example(args.example, Grid(args.n_intervals))
        operator = sign_flipped(spec.operator())
    spec = build_example(args.example, Grid(args.n_intervals))
    tau = spec.kappa / (2.0 * spec.c0)
    print(f"{args.example}: c0={spec.c0:.3e} kappa={spec.kappa:.3e} "
          f"tau={tau:.3e} L={spec.c0:.3e}")
    results = run_all(args.example, n_intervals=args.n_intervals, seed=args.seed,
                      operator=operator)
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_rates(parser: _Parser, args) -> int:
    _check_common(parser, args)
    if args.points < 4:
        parser.error(f"--points must be >= 4 to fit slopes, got {args.points}")
    if not (0 < args.alpha_min < args.alpha_max):
        parser.error("need 0 < --alpha-min < --alpha-max")
    spec = build_example(args.example, Grid(args.n_intervals))
    alphas = list(np.logspace(np.log10(args.alpha_max), np.log10(args.alpha_min),
                              args.points))
    points = residual_profile(spec.operator(), spec.constraint(), spec.f_star,
                              spec.u_star, alphas, ubar=spec.ubar,
                              mu=spec.kappa / 2.0)

    if args.format == "csv":
        lines = ["alpha,error_norm,residual_norm"]
        lines += [f"{p.alpha:.3e},{p.error_norm:.3e},{p.residual_norm:.3e}"
                  for p in points]
    else:
        header = f"{'alpha':>12} {'error':>12} {'residual':>12}"
        lines = [header, "-" * len(header)]
        lines += [f"{p.alpha:>12.3e} {p.error_norm:>12.3e} {p.residual_norm:>12.3e}"
                  for p in points]
    _emit("\n".join(lines) + "\n", args.output)

    bad = [p for p in points if not p.result.converged]
    if bad:
        for p in bad:
            print(f"non-converged solve at alpha={p.alpha:.3e}", file=sys.stderr)
        return EXIT_CONVERGENCE

    err_slope = loglog_slope([p.alpha for p in points], [p.error_norm for p in points])
    res_slope = loglog_slope([p.alpha for p in points], [p.residual_norm for p in points])
    print(f"error_slope={err_slope:.3e} (threshold 4.500e-01)")
    print(f"residual_slope={res_slope:.3e} (threshold 9.000e-01)")
    if err_slope >= 0.45 and res_slope >= 0.9:
        return EXIT_OK
    print("invariant violation: fitted slope below threshold", file=sys.stderr)
    return EXIT_INVARIANT


def cmd_solve(parser: _Parser, args) -> int:
    _check_common(parser, args)
    if args.delta < 0:
        parser.error(f"--delta must be >= 0, got {args.delta:g}")
    if args.delta == 0 and args.alpha is None:
        parser.error("--delta 0 requires an explicit --alpha")
    if args.max_iters < 1:
        parser.error(f"--max-iters must be >= 1, got {args.max_iters}")
    spec = build_example(args.example, Grid(args.n_intervals))
    alpha = args.alpha if args.alpha is not None else apriori_alpha(args.delta)

    f_delta = add_noise(spec.f_star, NoiseModel(args.delta, args.seed))
    try:
        res = solve_vi(spec.operator(), spec.constraint(), f_delta, alpha=alpha,
                       mu=spec.kappa / 2.0, ubar=spec.ubar, stop_c=TABLE_STOP_C,
                       delta=args.delta, max_iters=args.max_iters)
    except ValueError as exc:
        parser.error(str(exc))

    lines = ["t,u"]
    lines += [f"{t:.3e},{v:.10e}" for t, v in
              zip(res.solution.grid.nodes, res.solution.values)]
    _emit("\n".join(lines) + "\n", args.output)

    error = norm(res.solution - spec.u_star)
    summary = (f"alpha={res.alpha:.3e} iterations={res.iterations} "
               f"error={error:.3e} residual={res.residual_norm:.3e} "
               f"converged={'true' if res.converged else 'false'}")
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK if res.converged else EXIT_CONVERGENCE


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="vireg",
        description="Regularized variational inequalities for ill-posed monotone "
                    "operator equations on [0,1].",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"vireg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_table = sub.add_parser(
        "table", epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
        help="run the noise-ladder experiment and emit the result table")
    _add_common(p_table)
    p_table.set_defaults(func=cmd_table)

    p_diag = sub.add_parser(
        "diagnostics", epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
        help="run every inequality suite and report PASS/FAIL per suite")
    _add_common(p_diag)
    p_diag.add_argument("--flip-operator-sign", action="store_true",
                        help=argparse.SUPPRESS)
    p_diag.set_defaults(func=cmd_diagnostics)

    p_rates = sub.add_parser(
        "rates", epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
        help="fit noise-free convergence-rate slopes over an alpha ladder")
    _add_common(p_rates, with_seed=False)
    p_rates.add_argument("--alpha-max", type=float, default=1e-1,
                         help="largest alpha (default: 1e-1)")
    p_rates.add_argument("--alpha-min", type=float, default=1e-4,
                         help="smallest alpha (default: 1e-4)")
    p_rates.add_argument("--points", type=int, default=8,
                         help="log-spaced alpha count, >= 4 (default: 8)")
    p_rates.set_defaults(func=cmd_rates)

    p_solve = sub.add_parser(
        "solve", epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
        help="one noisy solve; writes the solution as t,u CSV plus a summary")
    _add_common(p_solve)
    p_solve.add_argument("--delta", type=float, default=0.0,
                         help="noise level, >= 0 (default: 0)")
    p_solve.add_argument("--alpha", type=float, default=None,
                         help="override the a priori choice alpha = delta^(2/3)")
    p_solve.add_argument("--max-iters", type=int, default=1_000_000,
                         help="iteration budget (default: 1000000)")
    p_solve.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)


def run() -> None:
    sys.exit(main())
