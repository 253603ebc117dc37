"""Benchmark problems, seeded noise, and the convergence-rate table experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import LowerBoundSet
from .grid import Grid, GridFunction, norm
from .operators import ExpDecayOperator
from .solver import SolveResult, solve_vi
from .validation import check_positive

__all__ = [
    "ExampleSpec",
    "NoiseModel",
    "ExperimentRow",
    "SourceCheck",
    "EXAMPLE_NAMES",
    "DEFAULT_DELTAS",
    "TABLE_STOP_C",
    "apriori_alpha",
    "add_noise",
    "build_example",
    "run_table",
    "run_table_detailed",
    "verify_source_condition",
    "loglog_slope",
    "table_to_csv",
    "table_to_text",
]

EXAMPLE_NAMES = ("example1", "example2")

# delta ladder: 1e-2 halved eight times
DEFAULT_DELTAS = tuple(1e-2 * 0.5**j for j in range(9))


def apriori_alpha(delta: float) -> float:
    """A priori parameter choice alpha(delta) = delta^(2/3)."""
    check_positive("delta", delta)
    return float(delta) ** (2.0 / 3.0)


@dataclass(frozen=True)
class NoiseModel:
    """Uniform pointwise noise of level delta from a seeded generator."""

    delta: float
    seed: int


def add_noise(f: GridFunction, model: NoiseModel) -> GridFunction:
    """Perturb every node value by an i.i.d. draw from [-delta, delta].

    The pointwise bound makes ||f_noisy - f|| <= delta automatic, because
    the quadrature weights sum to one.
    """
    if model.delta < 0:
        raise ValueError(f"delta must be >= 0, got {model.delta!r}")
    if model.delta == 0:
        return f
    rng = np.random.default_rng(model.seed)
    offsets = rng.uniform(-model.delta, model.delta, size=f.values.size)
    return GridFunction(f.grid, f.values + offsets, copy=False)


@dataclass(frozen=True)
class ExampleSpec:
    """A coefficient-identification benchmark with known closed forms.

    ``f_star`` comes from the analytic data formula, not from applying the
    discrete operator to ``u_star``, so the discrete problems are solved
    against data with genuine discretization error.
    """

    name: str
    u_star: GridFunction
    f_star: GridFunction
    kappa: float
    c0: float
    ubar: GridFunction
    source_z: GridFunction
    rho: float

    def operator(self) -> ExpDecayOperator:
        return ExpDecayOperator(self.u_star.grid, c0=self.c0, kappa=self.kappa)

    def constraint(self) -> LowerBoundSet:
        return LowerBoundSet(self.kappa)


def build_example(which: str, grid: Grid) -> ExampleSpec:
    """Construct one of the two bundled benchmarks on the given grid.

    example1: u*(t) = t/2 + 1/2 on the set u >= 1/2,
              f*(t) = -exp(-t^2/4 - t/2).
    example2: u*(t) = sin(pi t)/4 + 1/3 on the set u >= 1/3,
              f*(t) = -exp((cos(pi t) - 1)/(4 pi) - t/3).

    Both use c0 = 1, the offset ubar == u*(1), and a source element
    z(s) = -u*'(s) * exp(U*(s)) / c0 for which the derivative adjoint at
    u* reproduces u* - ubar up to discretization error.
    """
    t = grid.nodes
    c0 = 1.0
    if which == "example1":
        a, b = 0.5, 0.5
        u_star = a * t + b
        f_star = -np.exp(-(a / 2.0) * t**2 - b * t)
        u_prime = np.full_like(t, a)
        U_star = (a / 2.0) * t**2 + b * t
        kappa = b
    elif which == "example2":
        a, b = 0.25, 1.0 / 3.0
        u_star = a * np.sin(np.pi * t) + b
        f_star = -np.exp((a / np.pi) * (np.cos(np.pi * t) - 1.0) - b * t)
        u_prime = a * np.pi * np.cos(np.pi * t)
        U_star = (a / np.pi) * (1.0 - np.cos(np.pi * t)) + b * t
        kappa = b
    else:
        raise ValueError(f"unknown example {which!r}; choose from {EXAMPLE_NAMES}")

    z = -(1.0 / c0) * u_prime * np.exp(U_star)
    u_star_gf = GridFunction(grid, u_star, copy=False)
    z_gf = GridFunction(grid, z, copy=False)
    return ExampleSpec(
        name=which,
        u_star=u_star_gf,
        f_star=GridFunction(grid, f_star, copy=False),
        kappa=kappa,
        c0=c0,
        ubar=GridFunction.constant(grid, float(u_star[-1])),
        source_z=z_gf,
        rho=norm(z_gf),
    )


@dataclass(frozen=True)
class SourceCheck:
    """Defect of the source representation u* - ubar = F'(u*)^* z."""

    defect: float
    rho: float
    rho_L: float


def verify_source_condition(spec: ExampleSpec) -> SourceCheck:
    """Check that the closed-form source element reproduces u* - ubar.

    The defect is pure discretization error and shrinks like the grid
    step; rho_L = rho * c0 must stay below 2 for the square-root
    convergence rate to be in force.
    """
    op = spec.operator()
    reproduced = op.deriv_adjoint_apply(spec.u_star, spec.source_z)
    defect = norm(reproduced - (spec.u_star - spec.ubar))
    return SourceCheck(defect=defect, rho=spec.rho, rho_L=spec.rho * spec.c0)


@dataclass(frozen=True)
class ExperimentRow:
    """One line of a noise-level table."""

    delta: float
    rel_noise_pct: float
    error_norm: float
    ratio: float
    converged: bool


def _row_seed(master_seed: int, index: int) -> int:
    # rows are reproducible independently of each other and of run order
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


# Stopping constant for the table runs. The increment <= stop_c * delta rule
# keeps the iterate within O(delta^(1/3)) of the regularized solution for any
# fixed stop_c; 0.5 keeps the early-stopping bias at large delta small enough
# that the error/delta^(1/3) column stays inside its expected band.
TABLE_STOP_C = 0.5


def run_table_detailed(spec: ExampleSpec, deltas=DEFAULT_DELTAS, seed: int = 0,
                       stop_c: float = TABLE_STOP_C, max_iters: int = 1_000_000):
    """Like :func:`run_table` but also returns the per-row solve results."""
    deltas = [check_positive("delta", d) for d in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    op = spec.operator()
    cset = spec.constraint()
    f_norm = norm(spec.f_star)
    mu = spec.kappa / 2.0

    rows: list[ExperimentRow] = []
    results: list[SolveResult] = []
    for j, delta in enumerate(deltas):
        f_delta = add_noise(spec.f_star, NoiseModel(delta=delta, seed=_row_seed(seed, j)))
        res = solve_vi(
            op, cset, f_delta,
            alpha=apriori_alpha(delta), mu=mu, ubar=spec.ubar,
            stop_c=stop_c, delta=delta, max_iters=max_iters,
        )
        error = norm(res.solution - spec.u_star)
        rows.append(ExperimentRow(
            delta=delta,
            rel_noise_pct=100.0 * delta / f_norm,
            error_norm=error,
            ratio=error / delta ** (1.0 / 3.0),
            converged=res.converged,
        ))
        results.append(res)
    return rows, results


def run_table(spec: ExampleSpec, deltas=DEFAULT_DELTAS, seed: int = 0,
              stop_c: float = TABLE_STOP_C, max_iters: int = 1_000_000) -> list[ExperimentRow]:
    """Run the noise ladder for one benchmark: per delta, draw noise with a
    per-row seed, choose alpha = delta^(2/3), solve with mu = kappa/2 and the
    increment <= stop_c * delta stopping rule, and report the error against u*."""
    rows, _ = run_table_detailed(spec, deltas=deltas, seed=seed, stop_c=stop_c,
                                 max_iters=max_iters)
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x); needs >= 2 points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or xs.size != ys.size:
        raise ValueError("need at least two matching points to fit a slope")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires positive values")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def table_to_csv(rows) -> str:
    lines = ["delta,rel_noise_pct,error_norm,ratio,converged"]
    for r in rows:
        lines.append(
            f"{_fmt(r.delta)},{_fmt(r.rel_noise_pct)},{_fmt(r.error_norm)},"
            f"{_fmt(r.ratio)},{'true' if r.converged else 'false'}"
        )
    return "\n".join(lines) + "\n"


def table_to_text(rows) -> str:
    header = f"{'delta':>12} {'100*delta/||f||':>17} {'error':>12} {'error/delta^(1/3)':>19}"
    lines = [header, "-" * len(header)]
    for r in rows:
        line = (f"{_fmt(r.delta):>12} {_fmt(r.rel_noise_pct):>17} "
                f"{_fmt(r.error_norm):>12} {_fmt(r.ratio):>19}")
        if not r.converged:
            line += "  [not converged]"
        lines.append(line)
    return "\n".join(lines) + "\n"
