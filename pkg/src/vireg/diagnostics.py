"""Runnable diagnostic suites: every structural inequality as a sampled check.

Each suite draws seeded random elements, measures the worst case of one
inequality and reports it as a :class:`SuiteResult`. A violation beyond the
slack aborts the sampling loop and serializes the offending sample into the
result detail.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .constraints import LowerBoundSet, WholeSpace
from .experiments import ExampleSpec, NoiseModel, add_noise, build_example, verify_source_condition
from .grid import Grid, GridFunction, inner_product, norm
from .operators import DiagonalOperator, ExpDecayOperator, GridOperator
from .solver import contraction_excess, solve_vi, stability_gap

__all__ = ["SuiteResult", "run_all", "sign_flipped", "SUITE_BUILDERS"]


@dataclass
class SuiteResult:
    """Outcome of one diagnostic suite.

    ``extremal`` is the worst measured value of the suite's violation
    function (positive means the inequality failed by that much) and must
    stay at or below ``threshold``.
    """

    name: str
    passed: bool
    extremal: float
    threshold: float
    detail: str = field(default="", repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.name:<34} extremal={self.extremal:+.3e}  "
                f"threshold={self.threshold:+.3e}")


class _SignFlipped(GridOperator):
    # Negates a wrapped operator; breaks monotonicity on purpose.

    def __init__(self, inner: GridOperator):
        self.inner = inner
        self.grid = inner.grid
        self.constants = inner.constants

    def _apply_values(self, values):
        return -self.inner._apply_values(values)

    def _deriv_apply_values(self, u_values, h_values):
        return -self.inner._deriv_apply_values(u_values, h_values)

    def _deriv_adjoint_values(self, u_values, w_values):
        return -self.inner._deriv_adjoint_values(u_values, w_values)


def sign_flipped(operator: GridOperator) -> GridOperator:
    """Negative-control wrapper: -F fails monotonicity and cocoercivity."""
    return _SignFlipped(operator)


def _smooth_once(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    out[1:-1] = (values[:-2] + values[1:-1] + values[2:]) / 3.0
    return out


def _sample_member(grid: Grid, kappa: float, rng, smooth: bool) -> GridFunction:
    vals = kappa + np.abs(rng.standard_normal(grid.n_intervals + 1))
    if smooth:
        vals = _smooth_once(vals)
    return GridFunction(grid, vals, copy=False)


def _sample_direction(grid: Grid, rng) -> GridFunction:
    return GridFunction(grid, rng.standard_normal(grid.n_intervals + 1), copy=False)


def _serialize_pair(**named) -> str:
    return json.dumps({k: np.asarray(v.values).tolist() if isinstance(v, GridFunction) else v
                       for k, v in named.items()})


def monotonicity_suite(op: GridOperator, kappa: float, seed: int = 0,
                       n_pairs: int = 1000, slack: float = 1e-12) -> SuiteResult:
    """<F u - F v, u - v> >= -slack on random pairs with u, v >= kappa."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    detail = ""
    for i in range(n_pairs):
        u = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 1)
        v = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 0)
        val = inner_product(op.apply(u) - op.apply(v), u - v)
        worst = min(worst, val)
        if val < -slack:
            detail = _serialize_pair(u=u, v=v, value=val)
            break
    return SuiteResult(f"monotonicity(kappa={kappa:g})", worst >= -slack,
                       -worst, slack, detail)


def cocoercivity_suite(op: GridOperator, kappa: float, tau: float, seed: int = 0,
                       n_pairs: int = 1000, slack: float = 1e-10) -> SuiteResult:
    """<F u - F v, u - v> - tau * ||F u - F v||^2 >= -slack on random member pairs."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    detail = ""
    for i in range(n_pairs):
        u = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 1)
        v = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 0)
        fu_fv = op.apply(u) - op.apply(v)
        val = inner_product(fu_fv, u - v) - tau * norm(fu_fv) ** 2
        worst = min(worst, val)
        if val < -slack:
            detail = _serialize_pair(u=u, v=v, value=val)
            break
    return SuiteResult(f"cocoercivity(tau={tau:g})", worst >= -slack, -worst, slack, detail)


def deriv_cocoercivity_suite(op: GridOperator, kappa: float, tau: float, seed: int = 0,
                             n_pairs: int = 1000, slack: float = 1e-10) -> SuiteResult:
    """<F'(u) h, h> - tau * ||F'(u) h||^2 >= -slack for members u, directions h."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    detail = ""
    for i in range(n_pairs):
        u = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 1)
        h = _sample_direction(op.grid, rng)
        jh = op.deriv_apply(u, h)
        val = inner_product(jh, h) - tau * norm(jh) ** 2
        worst = min(worst, val)
        if val < -slack:
            detail = _serialize_pair(u=u, h=h, value=val)
            break
    return SuiteResult(f"deriv_cocoercivity(tau={tau:g})", worst >= -slack,
                       -worst, slack, detail)


def lipschitz_suite(op: GridOperator, kappa: float, seed: int = 0,
                    n_samples: int = 200) -> SuiteResult:
    """||(F'(u) - F'(v)) h|| <= L ||u - v|| ||h|| (1 + 10 h_step) on random probes."""
    rng = np.random.default_rng(seed)
    L = op.constants.lipschitz_L
    allowance = 1.0 + 10.0 * op.grid.step
    worst = -np.inf
    detail = ""
    for i in range(n_samples):
        u = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 1)
        v = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 0)
        h = _sample_direction(op.grid, rng)
        lhs = norm(op.deriv_apply(u, h) - op.deriv_apply(v, h))
        val = lhs - L * norm(u - v) * norm(h) * allowance
        worst = max(worst, val)
        if val > 0:
            detail = _serialize_pair(u=u, v=v, h=h, value=val)
            break
    return SuiteResult("lipschitz_derivative", worst <= 0, worst, 0.0, detail)


def adjoint_identity_suite(op: GridOperator, kappa: float, seed: int = 0,
                           n_triples: int = 100, tol: float = 1e-12) -> SuiteResult:
    """|<F'(u) h, w> - <h, F'(u)* w>| <= tol * ||h|| ||w|| on random triples."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    detail = ""
    for i in range(n_triples):
        u = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 1)
        h = _sample_direction(op.grid, rng)
        w = _sample_direction(op.grid, rng)
        lhs = inner_product(op.deriv_apply(u, h), w)
        rhs = inner_product(h, op.deriv_adjoint_apply(u, w))
        val = abs(lhs - rhs) / (norm(h) * norm(w))
        worst = max(worst, val)
        if val > tol:
            detail = _serialize_pair(u=u, h=h, w=w, value=val)
            break
    return SuiteResult("adjoint_identity", worst <= tol, worst, tol, detail)


def range_bound_suite(op: GridOperator, kappa: float, seed: int = 0,
                      n_samples: int = 200) -> SuiteResult:
    """Decay outputs stay in [-c0, 0): >= -c0 (node 0 sits exactly there) and < 0."""
    rng = np.random.default_rng(seed)
    c0 = op.constants.c0
    worst_low = -np.inf
    worst_high = -np.inf
    for i in range(n_samples):
        u = _sample_member(op.grid, kappa, rng, smooth=i % 2 == 1)
        g = op.apply(u).values
        worst_low = max(worst_low, float((-c0 - g).max()))
        worst_high = max(worst_high, float(g.max()))
        if worst_low > 0 or worst_high >= 0:
            break
    passed = worst_low <= 0 and worst_high < 0
    return SuiteResult("range_bound", passed, max(worst_low, worst_high), 0.0)


def projection_suite(grid: Grid, kappa: float, seed: int = 0,
                     n_pairs: int = 1000, tol: float = 1e-12,
                     vc_tol: float = 1e-10) -> SuiteResult:
    """Idempotence (exact), nonexpansiveness (within tol) and the variational
    characterization <u - Pu, w - Pu> <= vc_tol for members w."""
    rng = np.random.default_rng(seed)
    cset = LowerBoundSet(kappa)
    worst = -np.inf
    detail = ""
    for i in range(n_pairs):
        u = _sample_direction(grid, rng) * 2.0
        v = _sample_direction(grid, rng) * 2.0
        pu, pv = cset.project(u), cset.project(v)
        idem = norm(cset.project(pu) - pu)
        nonexp = norm(pu - pv) - norm(u - v)
        w = _sample_member(grid, kappa, rng, smooth=i % 2 == 0)
        vc = inner_product(u - pu, w - pu)
        val = max(idem, nonexp - tol, vc - vc_tol)
        worst = max(worst, val)
        if val > 0 or not cset.membership(pu):
            detail = _serialize_pair(u=u, v=v, value=val)
            break
    return SuiteResult(f"projection(kappa={kappa:g})", worst <= 0, worst, 0.0, detail)


def diagonal_oracle_suite(grid: Grid, seed: int = 0, n_instances: int = 50,
                          tol: float = 1e-8) -> SuiteResult:
    """Solver output matches the componentwise closed form max(kappa, f/(a + alpha))."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(n_instances):
        a_vals = rng.uniform(0.0, 2.0, grid.n_intervals + 1)
        op = DiagonalOperator(GridFunction(grid, a_vals, copy=False))
        f = GridFunction(grid, rng.standard_normal(grid.n_intervals + 1), copy=False)
        kappa = float(rng.uniform(-0.5, 1.0))
        alpha = float(rng.uniform(1e-3, 1.0))
        # step size saturating the alpha constraint: alpha == 1/mu - 1/(2 tau)
        tau = op.constants.tau
        mu = 2.0 * tau / (1.0 + 2.0 * tau * alpha) if np.isfinite(tau) else 1.0 / (1.0 + alpha)
        res = solve_vi(op, LowerBoundSet(kappa), f, alpha=alpha, mu=mu,
                       abs_tol=1e-10 * mu * alpha, max_iters=10_000_000)
        expected = np.maximum(kappa, f.values[1:] / (a_vals[1:] + alpha))
        dev = float(np.sqrt(grid.step * np.sum((res.solution.values[1:] - expected) ** 2)))
        worst = max(worst, dev)
        if dev > tol:
            break
    return SuiteResult("diagonal_oracle", worst <= tol, worst, tol)


def stability_suite(spec: ExampleSpec, seed: int = 0, accuracy: float = 1e-8) -> SuiteResult:
    """Measured noise amplification stays below delta/alpha (plus solve accuracy)."""
    op, cset = spec.operator(), spec.constraint()
    worst = -np.inf
    for delta, alpha in [(1e-2, 1e-1), (1e-3, 1e-2)]:
        f_delta = add_noise(spec.f_star, NoiseModel(delta, seed))
        sg = stability_gap(op, cset, spec.f_star, f_delta, alpha=alpha, delta=delta,
                           mu=spec.kappa / 2.0, ubar=spec.ubar, accuracy=accuracy)
        worst = max(worst, sg.gap - sg.bound)
    return SuiteResult("stability_gap", worst <= 4 * accuracy, worst, 4 * accuracy)


def source_condition_suite(spec: ExampleSpec) -> SuiteResult:
    """Source defect <= 5 h and rho * L < 2."""
    check = verify_source_condition(spec)
    bound = 5.0 * spec.u_star.grid.step
    val = max(check.defect - bound, check.rho_L - 2.0)
    return SuiteResult(
        "source_condition", val <= 0, val, 0.0,
        detail=f"defect={check.defect:.3e} rho={check.rho:.4f} rho_L={check.rho_L:.4f}",
    )


def contraction_suite(spec: ExampleSpec, seed: int = 0, delta: float = 1e-3) -> SuiteResult:
    """Consecutive increments of a representative solve obey the (1 - mu*alpha) bound."""
    f_delta = add_noise(spec.f_star, NoiseModel(delta, seed))
    res = solve_vi(spec.operator(), spec.constraint(), f_delta,
                   alpha=delta ** (2.0 / 3.0), mu=spec.kappa / 2.0, ubar=spec.ubar,
                   stop_c=0.5, delta=delta)
    val = contraction_excess(res)
    return SuiteResult("contraction", val <= 0, val, 0.0)


def run_all(example: str = "example1", n_intervals: int = 200, seed: int = 0,
            operator: GridOperator | None = None) -> list[SuiteResult]:
    """Run every diagnostic suite for one benchmark; returns the results in order.

    ``operator`` overrides the benchmark's decay operator in the sampled
    operator inequalities (used for negative-control injection).
    """
    grid = Grid(n_intervals)
    spec = build_example(example, grid)
    op = spec.operator() if operator is None else operator
    monotone_op = (ExpDecayOperator(grid, c0=spec.c0, kappa=0.0) if operator is None
                   else operator)
    tau = spec.kappa / (2.0 * spec.c0)
    results = [
        monotonicity_suite(monotone_op, kappa=0.0, seed=seed),
        cocoercivity_suite(op, kappa=spec.kappa, tau=tau, seed=seed),
        deriv_cocoercivity_suite(op, kappa=spec.kappa, tau=tau, seed=seed),
        lipschitz_suite(op, kappa=spec.kappa, seed=seed),
        adjoint_identity_suite(op, kappa=spec.kappa, seed=seed),
        range_bound_suite(op, kappa=spec.kappa, seed=seed),
        projection_suite(grid, kappa=spec.kappa, seed=seed),
        diagonal_oracle_suite(grid, seed=seed),
        stability_suite(spec, seed=seed),
        source_condition_suite(spec),
        contraction_suite(spec, seed=seed),
    ]
    return results


SUITE_BUILDERS = {
    "monotonicity": monotonicity_suite,
    "cocoercivity": cocoercivity_suite,
    "deriv_cocoercivity": deriv_cocoercivity_suite,
    "lipschitz": lipschitz_suite,
    "adjoint_identity": adjoint_identity_suite,
    "range_bound": range_bound_suite,
    "projection": projection_suite,
    "diagonal_oracle": diagonal_oracle_suite,
    "stability": stability_suite,
    "source_condition": source_condition_suite,
    "contraction": contraction_suite,
}
