"""Projected fixed-point solver for the regularized variational inequality.

Given a monotone operator F, a closed convex set M, data f and a
regularization parameter alpha > 0, the solver finds the unique u in M with

    <F u + alpha (u - ubar) - f, w - u> >= 0   for all w in M

by iterating u <- P_M(u - mu (F u + alpha (u - ubar) - f)) from the feasible
start P_M(ubar). For a cocoercive operator (constant tau) the map is a
contraction with factor 1 - mu*alpha provided 0 < mu < 2 tau and
alpha <= 1/mu - 1/(2 tau); both conditions are enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .grid import GridFunction, norm
from .operators import GridOperator
from .validation import as_grid_function, check_nonnegative, check_positive

__all__ = [
    "SolveResult",
    "StabilityGap",
    "ProfilePoint",
    "NonFiniteIterateError",
    "LavrentievVI",
    "solve_vi",
    "stability_gap",
    "residual_profile",
    "contraction_excess",
]

# relative slack when checking alpha against its upper bound, absorbs
# round-off when callers construct alpha to sit exactly on the limit
_ALPHA_LIMIT_SLACK = 1e-9

_DIVERGENCE_STREAK = 10


class NonFiniteIterateError(ArithmeticError):
    """An iterate produced NaN/Inf; carries the iteration index."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite iterate at iteration {iteration}")
        self.iteration = iteration


@dataclass
class SolveResult:
    """Outcome of one variational-inequality solve.

    ``contraction_excess_abs``/``_rel`` record the worst violation of the
    geometric bound inc_{k+1} <= (1 - mu*alpha) * inc_k over consecutive
    increments (negative values mean the bound held with margin).
    """

    solution: GridFunction
    iterations: int
    final_increment: float
    residual_norm: float
    converged: bool
    alpha: float
    mu: float
    contraction_excess_abs: float
    contraction_excess_rel: float
    increments: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class StabilityGap:
    """Distance between the noisy and noise-free solutions at one alpha."""

    gap: float
    bound: float
    result_exact: SolveResult
    result_noisy: SolveResult


@dataclass(frozen=True)
class ProfilePoint:
    """One noise-free solve of the rate profile."""

    alpha: float
    error_norm: float
    residual_norm: float
    result: SolveResult


def _default_mu(operator: GridOperator) -> float:
    tau = operator.constants.tau
    if not np.isfinite(tau):
        return 1.0
    if tau <= 0:
        raise ValueError(
            "operator has no positive cocoercivity constant; pass mu explicitly "
            "only if you know the iteration contracts"
        )
    return tau


def _validate_step(operator: GridOperator, mu: float, alpha: float) -> None:
    tau = operator.constants.tau
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    if np.isfinite(tau) and not mu < 2.0 * tau:
        raise ValueError(f"step size mu={mu!r} must satisfy mu < 2*tau = {2.0 * tau!r}")
    limit = 1.0 / mu - (1.0 / (2.0 * tau) if np.isfinite(tau) else 0.0)
    if alpha > limit * (1.0 + _ALPHA_LIMIT_SLACK) + 1e-15:
        raise ValueError(
            f"alpha={alpha!r} exceeds the contraction limit 1/mu - 1/(2*tau) = {limit!r}"
        )


def _iterate(operator, constraint, f_vals, ubar_vals, start_vals, alpha, mu, stop_tol,
             max_iters, record_increments):
    h = operator.grid.step
    q = 1.0 - mu * alpha

    u = start_vals.copy()
    constraint._clip_inplace(u[1:])

    increments = [] if record_increments else None
    prev_inc = math.inf
    grow_streak = 0
    excess_abs = -math.inf
    excess_rel = -math.inf
    converged = False
    inc = math.nan
    iterations = 0

    for k in range(1, max_iters + 1):
        Fu = operator._apply_values(u)
        step = Fu[1:]
        step += alpha * (u[1:] - ubar_vals[1:])
        step -= f_vals[1:]
        step *= -mu
        step += u[1:]
        constraint._clip_inplace(step)

        diff = step - u[1:]
        inc = math.sqrt(h * float(np.dot(diff, diff)))
        if not math.isfinite(inc):
            raise NonFiniteIterateError(k)
        u[1:] = step
        iterations = k
        if increments is not None:
            increments.append(inc)

        if k >= 2:
            bound = q * prev_inc
            excess_abs = max(excess_abs, inc - bound)
            if bound > 0.0:
                excess_rel = max(excess_rel, inc / bound - 1.0)

        if inc <= stop_tol:
            converged = True
            break

        if inc > prev_inc:
            grow_streak += 1
            if grow_streak >= _DIVERGENCE_STREAK:
                break
        else:
            grow_streak = 0
        prev_inc = inc

    return u, iterations, inc, converged, excess_abs, excess_rel, increments


class LavrentievVI(BaseEstimator):
    """Regularized variational-inequality estimator with a scikit-learn API.

    Recovers the element u in the constraint set that solves
    <F u + alpha (u - ubar) - f, w - u> >= 0 for all members w, given data
    f (``fit``'s argument). The regularization parameter alpha and step
    size mu are hyperparameters in the usual estimator sense.

    Parameters
    ----------
    operator : GridOperator
        The (monotone) forward operator F.
    constraint : LowerBoundSet or WholeSpace
        Closed convex set M with exact projection.
    alpha : float
        Regularization parameter, > 0 and <= 1/mu - 1/(2 tau).
    mu : float, optional
        Step size, 0 < mu < 2 tau. Defaults to the operator's tau.
    ubar : GridFunction, array_like or float, optional
        Offset element of the penalty alpha*(u - ubar); also the initial
        guess (projected). Defaults to the zero function.
    start : GridFunction, array_like or float, optional
        Alternative initial guess (projected before use). Defaults to
        ``ubar``; the solution does not depend on it, only the iteration
        path does.
    stop_c : float, optional
        Stopping constant: iteration stops once the increment norm drops
        below stop_c * delta (default 1.0).
    delta : float, optional
        Noise level of the data. delta = 0 switches to ``abs_tol``.
    abs_tol : float, optional
        Absolute increment tolerance used when delta = 0. Defaults to
        1e-10 * (1 + ||f||).
    max_iters : int, optional
        Iteration budget; exceeding it yields ``converged_ = False``.
    record_increments : bool, optional
        Keep the full increment history on the result (off by default;
        the contraction summary is always recorded).

    Attributes
    ----------
    solution_ : GridFunction
        The computed element of the constraint set.
    n_iter_ : int
    final_increment_ : float
    residual_norm_ : float
        ||F u - f|| at the returned iterate.
    converged_ : bool
    result_ : SolveResult
        Full record, including the contraction summary.
    """

    def __init__(self, operator=None, constraint=None, alpha=1e-2, mu=None, ubar=None,
                 start=None, stop_c=1.0, delta=0.0, abs_tol=None, max_iters=1_000_000,
                 record_increments=False):
        self.operator = operator
        self.constraint = constraint
        self.alpha = alpha
        self.mu = mu
        self.ubar = ubar
        self.start = start
        self.stop_c = stop_c
        self.delta = delta
        self.abs_tol = abs_tol
        self.max_iters = max_iters
        self.record_increments = record_increments

    def fit(self, f, y=None):
        """Solve the variational inequality for data ``f``; returns self."""
        if self.operator is None or self.constraint is None:
            raise ValueError("operator and constraint must be set before fitting")
        operator = self.operator
        grid = operator.grid
        f_gf = as_grid_function(f, grid)

        alpha = check_positive("alpha", self.alpha)
        mu = _default_mu(operator) if self.mu is None else check_positive("mu", self.mu)
        _validate_step(operator, mu, alpha)
        stop_c = check_positive("stop_c", self.stop_c)
        delta = check_nonnegative("delta", self.delta)
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

        ubar_gf = (GridFunction.zeros(grid) if self.ubar is None
                   else as_grid_function(self.ubar, grid))
        start_gf = ubar_gf if self.start is None else as_grid_function(self.start, grid)
        if delta > 0:
            stop_tol = stop_c * delta
        else:
            stop_tol = (1e-10 * (1.0 + norm(f_gf)) if self.abs_tol is None
                        else check_positive("abs_tol", self.abs_tol))

        u, iters, inc, converged, exc_abs, exc_rel, increments = _iterate(
            operator, self.constraint, f_gf.values, ubar_gf.values, start_gf.values,
            alpha, mu, stop_tol, int(self.max_iters), self.record_increments,
        )

        solution = GridFunction(grid, u, copy=False)
        residual = norm(operator.apply(solution) - f_gf)
        self.result_ = SolveResult(
            solution=solution,
            iterations=iters,
            final_increment=inc,
            residual_norm=residual,
            converged=converged,
            alpha=alpha,
            mu=mu,
            contraction_excess_abs=exc_abs,
            contraction_excess_rel=exc_rel,
            increments=None if increments is None else np.asarray(increments),
        )
        self.solution_ = solution
        self.n_iter_ = iters
        self.final_increment_ = inc
        self.residual_norm_ = residual
        self.converged_ = converged
        return self


def solve_vi(operator, constraint, f, *, alpha, mu=None, ubar=None, start=None,
             stop_c=1.0, delta=0.0, abs_tol=None, max_iters=1_000_000,
             record_increments=False) -> SolveResult:
    """Functional one-shot form of :class:`LavrentievVI`. Returns the :class:`SolveResult`."""
    est = LavrentievVI(
        operator=operator, constraint=constraint, alpha=alpha, mu=mu, ubar=ubar,
        start=start, stop_c=stop_c, delta=delta, abs_tol=abs_tol, max_iters=max_iters,
        record_increments=record_increments,
    )
    return est.fit(f).result_


def _increment_tol_for_accuracy(accuracy: float, mu: float, alpha: float) -> float:
    # A stop at increment tol leaves ||u - u_fix|| <= tol * q/(1-q), q = 1 - mu*alpha,
    # so tol = accuracy * mu*alpha / q guarantees the requested solution accuracy.
    q = 1.0 - mu * alpha
    return accuracy * mu * alpha / max(q, mu * alpha)


def stability_gap(operator, constraint, f_star, f_delta, *, alpha, delta, mu=None,
                  ubar=None, accuracy=1e-8, max_iters=10_000_000) -> StabilityGap:
    """Measure ||u_alpha^delta - u_alpha|| against the noise-amplification bound delta/alpha.

    Both solves run to solution accuracy ``accuracy`` (the increment
    tolerance is derived from the contraction factor), so the measured gap
    matches the ideal one up to 2 * accuracy.
    """
    check_nonnegative("delta", delta)
    mu_val = _default_mu(operator) if mu is None else mu
    inc_tol = _increment_tol_for_accuracy(accuracy, mu_val, alpha)
    common = dict(alpha=alpha, mu=mu_val, ubar=ubar, delta=0.0, abs_tol=inc_tol,
                  max_iters=max_iters)
    res_exact = solve_vi(operator, constraint, f_star, **common)
    res_noisy = solve_vi(operator, constraint, f_delta, **common)
    gap = norm(res_noisy.solution - res_exact.solution)
    return StabilityGap(gap=gap, bound=delta / alpha, result_exact=res_exact,
                        result_noisy=res_noisy)


def residual_profile(operator, constraint, f_star, u_star, alphas, *, ubar=None,
                     mu=None, accuracy=None, max_iters=10_000_000):
    """Noise-free solves over a decreasing alpha ladder, for rate fitting.

    Every solve runs to solution accuracy ``accuracy`` (default
    ``1e-3 * min(alphas) * ||u_star||``). At the bottom of the ladder the
    residual norm scales like alpha itself, so the accuracy must stay well
    below ``min(alphas)`` for the fitted slopes to be meaningful; an
    increment-based tolerance of the same size would not be enough.

    Returns a list of :class:`ProfilePoint` with ||u_alpha - u_star|| and
    ||F u_alpha - f_star||.
    """
    alphas = [check_positive("alpha", a) for a in alphas]
    if any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly decreasing")
    if accuracy is None:
        accuracy = 1e-3 * min(alphas) * max(norm(u_star), 1e-3)
    mu_val = _default_mu(operator) if mu is None else mu
    points = []
    for alpha in alphas:
        inc_tol = _increment_tol_for_accuracy(accuracy, mu_val, alpha)
        res = solve_vi(operator, constraint, f_star, alpha=alpha, mu=mu_val, ubar=ubar,
                       delta=0.0, abs_tol=inc_tol, max_iters=max_iters)
        points.append(ProfilePoint(
            alpha=alpha,
            error_norm=norm(res.solution - u_star),
            residual_norm=res.residual_norm,
            result=res,
        ))
    return points


def contraction_excess(result: SolveResult, rel_slack: float = 1e-12,
                       abs_floor: float | None = None) -> float:
    """Worst slack-adjusted violation of the geometric increment bound; <= 0 means pass.

    ``abs_floor`` (default 16 machine epsilons) absorbs the rounding of
    increments computed from O(1) iterates; the mathematical bound itself
    is exact for a correctly configured solve.
    """
    if abs_floor is None:
        abs_floor = 16 * np.finfo(float).eps
    if result.contraction_excess_abs == -math.inf:
        return -math.inf
    rel_part = result.contraction_excess_rel - rel_slack
    abs_part = result.contraction_excess_abs - abs_floor
    return min(rel_part, abs_part)
