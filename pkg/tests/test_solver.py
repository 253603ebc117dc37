import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone

from vireg import (
    DiagonalOperator,
    ExpDecayOperator,
    GridFunction,
    LavrentievVI,
    LowerBoundSet,
    NonFiniteIterateError,
    WholeSpace,
    add_noise,
    NoiseModel,
    apriori_alpha,
    contraction_excess,
    inner_product,
    norm,
    residual_profile,
    solve_vi,
    stability_gap,
)
from vireg.diagnostics import _sample_member, diagonal_oracle_suite
from vireg.operators import GridOperator, OperatorConstants


def test_whole_space_scalar_equation(grid200):
    # a == 1, f == 1: the regularized equation gives u == 1/(1 + alpha)
    op = DiagonalOperator(GridFunction.constant(grid200, 1.0))
    alpha = 0.1
    res = solve_vi(op, WholeSpace(), GridFunction.constant(grid200, 1.0),
                   alpha=alpha, abs_tol=1e-12)
    assert res.converged
    assert_allclose(res.solution.values[1:], np.full(200, 1.0 / (1.0 + alpha)), atol=1e-9)


def test_diagonal_closed_form_single(grid200, rng):
    a = GridFunction(grid200, rng.uniform(0, 2, 201))
    f = GridFunction(grid200, rng.standard_normal(201))
    kappa, alpha = 0.1, 0.05
    tau = 1.0 / a.values[1:].max()
    mu = 2 * tau / (1 + 2 * tau * alpha)
    res = solve_vi(DiagonalOperator(a), LowerBoundSet(kappa), f, alpha=alpha, mu=mu,
                   abs_tol=1e-10 * mu * alpha, max_iters=10_000_000)
    expected = np.maximum(kappa, f.values[1:] / (a.values[1:] + alpha))
    assert_allclose(res.solution.values[1:], expected, atol=1e-8)


def test_diagonal_closed_form_randomized(grid200):
    res = diagonal_oracle_suite(grid200, seed=0, n_instances=50, tol=1e-8)
    assert res.passed, res.line()


def test_solution_is_feasible(specs):
    spec = specs["example1"]
    fd = add_noise(spec.f_star, NoiseModel(1e-3, 5))
    res = solve_vi(spec.operator(), spec.constraint(), fd, alpha=1e-2,
                   mu=spec.kappa / 2, ubar=spec.ubar, delta=1e-3)
    assert spec.constraint().membership(res.solution)
    assert res.solution.values[0] == spec.ubar.values[0]  # node 0 pinned


def test_uniqueness_probe(specs, rng):
    # two solves from different feasible starts land within 2*tol/(mu*alpha)
    spec = specs["example1"]
    op, cset = spec.operator(), spec.constraint()
    alpha, tol = 1e-2, 1e-8
    mu = spec.kappa / 2
    r1 = solve_vi(op, cset, spec.f_star, alpha=alpha, mu=mu, ubar=spec.ubar, abs_tol=tol)
    other = _sample_member(spec.u_star.grid, spec.kappa, rng, smooth=True)
    r2 = solve_vi(op, cset, spec.f_star, alpha=alpha, mu=mu, ubar=spec.ubar,
                  start=other, abs_tol=tol)
    assert norm(r1.solution - r2.solution) <= 2 * tol / (mu * alpha)


def test_vi_optimality_at_solution(specs, rng):
    # first-order optimality against members sampled around the solution
    spec = specs["example2"]
    op, cset = spec.operator(), spec.constraint()
    delta = 1e-3
    fd = add_noise(spec.f_star, NoiseModel(delta, 3))
    stop_c = 0.5
    res = solve_vi(op, cset, fd, alpha=apriori_alpha(delta), mu=spec.kappa / 2,
                   ubar=spec.ubar, stop_c=stop_c, delta=delta)
    u = res.solution
    direction = op.apply(u) + res.alpha * (u - spec.ubar) - fd
    tol_vi = (stop_c * delta) * (norm(op.apply(u)) + res.alpha * norm(u) + norm(fd)) * 2
    grid = u.grid
    for _ in range(100):
        w = cset.project(GridFunction(grid, u.values + 0.3 * rng.standard_normal(201)))
        assert inner_product(direction, w - u) >= -tol_vi


def test_stability_zero_noise(specs):
    spec = specs["example1"]
    acc = 1e-8
    sg = stability_gap(spec.operator(), spec.constraint(), spec.f_star, spec.f_star,
                       alpha=1e-2, delta=0.0, mu=spec.kappa / 2, ubar=spec.ubar,
                       accuracy=acc)
    assert sg.bound == 0.0
    assert sg.gap <= 2 * acc


def test_stability_diagonal_analytic(grid200, rng):
    # WholeSpace + diagonal: the gap is exactly ||(f_delta - f)/(a + alpha)||
    a = GridFunction(grid200, rng.uniform(0.5, 1.5, 201))
    f = GridFunction(grid200, rng.standard_normal(201))
    delta, alpha = 1e-3, 1e-1
    fd = add_noise(f, NoiseModel(delta, 9))
    acc = 1e-10
    sg = stability_gap(DiagonalOperator(a), WholeSpace(), f, fd, alpha=alpha,
                       delta=delta, accuracy=acc)
    expected = np.sqrt(grid200.step * np.sum(
        ((fd.values[1:] - f.values[1:]) / (a.values[1:] + alpha)) ** 2))
    assert sg.gap == pytest.approx(expected, abs=4 * acc)
    assert sg.gap <= sg.bound


def test_stability_decay_run(specs):
    spec = specs["example1"]
    delta, alpha = 1e-3, 1e-2
    fd = add_noise(spec.f_star, NoiseModel(delta, 21))
    sg = stability_gap(spec.operator(), spec.constraint(), spec.f_star, fd,
                       alpha=alpha, delta=delta, mu=spec.kappa / 2, ubar=spec.ubar,
                       accuracy=1e-8)
    assert sg.bound == pytest.approx(0.1)
    assert sg.gap <= sg.bound + 4e-8


def test_residual_profile_quick(specs):
    spec = specs["example1"]
    alphas = list(np.logspace(-1, -2, 4))
    pts = residual_profile(spec.operator(), spec.constraint(), spec.f_star,
                           spec.u_star, alphas, ubar=spec.ubar, mu=spec.kappa / 2)
    assert all(p.result.converged for p in pts)
    errs = [p.error_norm for p in pts]
    resids = [p.residual_norm for p in pts]
    assert all(a > b for a, b in zip(errs, errs[1:]))  # error shrinks with alpha
    assert all(a > b for a, b in zip(resids, resids[1:]))


def test_error_continuous_in_kappa(grid200, specs):
    # lowering the constraint bound below min u* must not jump the error
    spec = specs["example1"]
    alpha = 1e-2
    errs = []
    for kappa in (0.5, 0.45, 0.4, 0.35, 0.3):
        op = ExpDecayOperator(grid200, c0=1.0, kappa=kappa)
        res = solve_vi(op, LowerBoundSet(kappa), spec.f_star, alpha=alpha,
                       mu=kappa / 2, ubar=spec.ubar, abs_tol=1e-8)
        assert res.converged
        errs.append(norm(res.solution - spec.u_star))
    for a, b in zip(errs, errs[1:]):
        assert max(a, b) / min(a, b) <= 10.0


def test_residual_profile_validates_alphas(specs):
    spec = specs["example1"]
    with pytest.raises(ValueError):
        residual_profile(spec.operator(), spec.constraint(), spec.f_star,
                         spec.u_star, [1e-3, 1e-2], ubar=spec.ubar, mu=spec.kappa / 2)
    with pytest.raises(ValueError):
        residual_profile(spec.operator(), spec.constraint(), spec.f_star,
                         spec.u_star, [1e-2, -1e-3], ubar=spec.ubar, mu=spec.kappa / 2)


def test_max_iters_flagged(specs):
    spec = specs["example1"]
    res = solve_vi(spec.operator(), spec.constraint(), spec.f_star, alpha=1e-3,
                   mu=spec.kappa / 2, ubar=spec.ubar, abs_tol=1e-12, max_iters=5)
    assert not res.converged
    assert res.iterations == 5


class _NaNOperator(GridOperator):
    def __init__(self, grid):
        self.grid = grid
        self.constants = OperatorConstants(c0=1.0, kappa=0.0, tau=np.inf, lipschitz_L=0.0)

    def _apply_values(self, values):
        out = np.zeros_like(values)
        out[1] = np.nan
        return out


def test_nan_iterate_raises_with_index(grid200):
    op = _NaNOperator(grid200)
    with pytest.raises(NonFiniteIterateError) as exc:
        solve_vi(op, WholeSpace(), GridFunction.zeros(grid200), alpha=0.5, mu=1.0)
    assert exc.value.iteration == 1


class _ExpandingOperator(GridOperator):
    # anti-monotone map with a falsely declared contraction constant
    def __init__(self, grid):
        self.grid = grid
        self.constants = OperatorConstants(c0=1.0, kappa=0.0, tau=np.inf, lipschitz_L=0.0)

    def _apply_values(self, values):
        return -2.0 * values


def test_divergence_detection(grid200):
    op = _ExpandingOperator(grid200)
    f = GridFunction.constant(grid200, 1.0)
    res = solve_vi(op, WholeSpace(), f, alpha=0.5, mu=0.9, abs_tol=1e-12,
                   max_iters=100_000)
    assert not res.converged
    assert res.iterations < 100_000  # stopped by the growth streak, not the budget


def test_config_validation(grid200, specs):
    spec = specs["example1"]
    op, cset = spec.operator(), spec.constraint()  # tau = 0.25
    f = spec.f_star
    with pytest.raises(ValueError):
        solve_vi(op, cset, f, alpha=1e-2, mu=0.5)  # mu == 2*tau not allowed
    with pytest.raises(ValueError):
        solve_vi(op, cset, f, alpha=2.5, mu=0.25)  # alpha > 1/mu - 1/(2 tau) = 2
    with pytest.raises(ValueError):
        solve_vi(op, cset, f, alpha=-1.0, mu=0.25)
    with pytest.raises(ValueError):
        solve_vi(op, cset, f, alpha=1e-2, mu=0.25, stop_c=0.0, delta=1e-2)
    with pytest.raises(ValueError):
        solve_vi(op, cset, f, alpha=1e-2, mu=0.25, delta=-1e-3)
    with pytest.raises(ValueError):
        solve_vi(op, cset, f, alpha=1e-2, mu=0.25, max_iters=0)
    # alpha exactly at the limit is accepted
    res = solve_vi(op, cset, f, alpha=2.0, mu=0.25, ubar=spec.ubar, abs_tol=1e-8)
    assert res.converged


def test_monotone_only_operator_needs_explicit_mu(grid200):
    op = ExpDecayOperator(grid200, c0=1.0, kappa=0.0)  # tau = 0
    with pytest.raises(ValueError):
        solve_vi(op, LowerBoundSet(0.0), GridFunction.constant(grid200, -1.0), alpha=1e-2)


def test_contraction_bound_on_decay_solve(specs):
    spec = specs["example1"]
    fd = add_noise(spec.f_star, NoiseModel(1e-3, 2))
    res = solve_vi(spec.operator(), spec.constraint(), fd, alpha=1e-2,
                   mu=spec.kappa / 2, ubar=spec.ubar, delta=1e-3,
                   record_increments=True)
    assert contraction_excess(res) <= 0
    q = 1 - res.mu * res.alpha
    inc = res.increments
    assert len(inc) == res.iterations
    assert np.all(inc[1:] <= q * inc[:-1] + 1e-12)


def test_estimator_api(grid200, specs):
    spec = specs["example1"]
    est = LavrentievVI(operator=spec.operator(), constraint=spec.constraint(),
                       alpha=1e-2, mu=spec.kappa / 2, ubar=spec.ubar, abs_tol=1e-8)
    params = est.get_params()
    assert params["alpha"] == 1e-2
    cloned = clone(est)
    assert cloned.get_params()["alpha"] == 1e-2
    est.set_params(alpha=2e-2)
    assert est.alpha == 2e-2

    fitted = est.fit(spec.f_star)
    assert fitted is est
    assert est.converged_
    assert est.n_iter_ == est.result_.iterations
    assert norm(est.solution_ - est.result_.solution) == 0.0
    assert est.residual_norm_ == pytest.approx(
        norm(spec.operator().apply(est.solution_) - spec.f_star))

    # raw array data is accepted
    est2 = LavrentievVI(operator=spec.operator(), constraint=spec.constraint(),
                        alpha=2e-2, mu=spec.kappa / 2, ubar=spec.ubar,
                        abs_tol=1e-8).fit(spec.f_star.values)
    assert norm(est2.solution_ - est.solution_) <= 1e-6


def test_estimator_requires_operator(grid200):
    with pytest.raises(ValueError):
        LavrentievVI().fit(np.zeros(201))


def test_functional_matches_estimator(specs):
    spec = specs["example1"]
    kwargs = dict(alpha=1e-2, mu=spec.kappa / 2, ubar=spec.ubar, abs_tol=1e-9)
    r1 = solve_vi(spec.operator(), spec.constraint(), spec.f_star, **kwargs)
    est = LavrentievVI(operator=spec.operator(), constraint=spec.constraint(),
                       **kwargs).fit(spec.f_star)
    assert_allclose(r1.solution.values, est.solution_.values, rtol=0, atol=0)
    assert r1.iterations == est.n_iter_
