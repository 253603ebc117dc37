"""Monotone operators on the grid: exponential-decay identification and a diagonal oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, _check_same_grid
from .validation import check_positive

__all__ = ["OperatorConstants", "GridOperator", "ExpDecayOperator", "DiagonalOperator"]


@dataclass(frozen=True)
class OperatorConstants:
    """Declared structural constants of an operator.

    Attributes
    ----------
    c0 : float
        Magnitude scale of the operator output (initial value for the
        decay operator, max diagonal entry for the diagonal one).
    kappa : float
        Lower bound of the set on which the constants are certified.
    tau : float
        Cocoercivity constant: <Fu - Fv, u - v> >= tau * ||Fu - Fv||^2
        for u, v in the certified set. tau = 0 means monotone only.
    lipschitz_L : float
        Lipschitz constant of the derivative u -> F'(u).
    """

    c0: float
    kappa: float
    tau: float
    lipschitz_L: float


class GridOperator:
    """Base class: nonlinear operator with derivative and exact discrete adjoint.

    Subclasses implement the ``*_values`` methods on raw node arrays of
    length N+1; the public methods validate grids and wrap the results.
    """

    grid: Grid
    constants: OperatorConstants

    def apply(self, u: GridFunction) -> GridFunction:
        self._check(u)
        return GridFunction(self.grid, self._apply_values(u.values), copy=False)

    def deriv_apply(self, u: GridFunction, h: GridFunction) -> GridFunction:
        self._check(u)
        _check_same_grid(u, h)
        return GridFunction(self.grid, self._deriv_apply_values(u.values, h.values), copy=False)

    def deriv_adjoint_apply(self, u: GridFunction, w: GridFunction) -> GridFunction:
        self._check(u)
        _check_same_grid(u, w)
        return GridFunction(self.grid, self._deriv_adjoint_values(u.values, w.values), copy=False)

    def _check(self, u: GridFunction) -> None:
        if u.grid != self.grid:
            raise ValueError(
                f"operand has {u.grid.n_intervals} intervals, operator expects "
                f"{self.grid.n_intervals}"
            )

    def _apply_values(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv_apply_values(self, u_values: np.ndarray, h_values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv_adjoint_values(self, u_values: np.ndarray, w_values: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ExpDecayOperator(GridOperator):
    """Coefficient-to-data map (F u)(t) = -c0 * exp(-U(t)), U(t) = integral of u over [0,t].

    The map sends the decay coefficient u of the initial value problem
    f' + u f = 0, f(0) = -c0 to its solution f. It is monotone on
    { u >= 0 } and cocoercive on { u >= kappa } with constant
    tau = kappa / (2 c0) for kappa > 0; the derivative is Lipschitz with
    constant c0.

    The running integral uses the backward rectangle rule, so node 0 is
    always mapped to -c0.
    """

    __slots__ = ("grid", "c0", "kappa", "constants")

    def __init__(self, grid: Grid, c0: float = 1.0, kappa: float = 0.0):
        self.grid = grid
        self.c0 = check_positive("c0", c0)
        if kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {kappa!r}")
        self.kappa = float(kappa)
        self.constants = OperatorConstants(
            c0=self.c0,
            kappa=self.kappa,
            tau=self.kappa / (2.0 * self.c0),
            lipschitz_L=self.c0,
        )

    def _cumint(self, values: np.ndarray) -> np.ndarray:
        out = np.empty_like(values)
        out[0] = 0.0
        np.cumsum(values[1:], out=out[1:])
        out[1:] *= self.grid.step
        return out

    def _apply_values(self, values: np.ndarray) -> np.ndarray:
        out = self._cumint(values)
        np.negative(out, out=out)
        np.exp(out, out=out)
        out *= -self.c0
        return out

    def _deriv_apply_values(self, u_values: np.ndarray, h_values: np.ndarray) -> np.ndarray:
        out = self._cumint(h_values)
        out *= self._apply_values(u_values)
        np.negative(out, out=out)
        return out

    def _deriv_adjoint_values(self, u_values: np.ndarray, w_values: np.ndarray) -> np.ndarray:
        # Exact transpose of the linear-in-h derivative under the discrete
        # inner product: z_k = -h * sum_{j=k..N} (F u)_j w_j, z_0 = 0.
        g = self._apply_values(u_values)
        prod = g[1:] * w_values[1:]
        out = np.empty_like(u_values)
        out[0] = 0.0
        np.cumsum(prod[::-1], out=out[1:])
        out[1:] = out[:0:-1] * (-self.grid.step)
        return out


class DiagonalOperator(GridOperator):
    """Componentwise map (A u)_k = a_k u_k with a_k >= 0.

    Linear, monotone, self-adjoint; cocoercive with constant 1/max(a).
    Used as a closed-form oracle for solver tests: the regularized
    variational inequality decouples per node.
    """

    __slots__ = ("grid", "diag", "constants")

    def __init__(self, diag: GridFunction):
        if np.any(diag.values < 0):
            raise ValueError("diagonal entries must be nonnegative")
        self.grid = diag.grid
        self.diag = diag
        a_max = float(diag.values[1:].max()) if diag.grid.n_intervals >= 1 else 0.0
        tau = 1.0 / a_max if a_max > 0 else np.inf
        self.constants = OperatorConstants(c0=a_max, kappa=0.0, tau=tau, lipschitz_L=0.0)

    def _apply_values(self, values: np.ndarray) -> np.ndarray:
        return self.diag.values * values

    def _deriv_apply_values(self, u_values: np.ndarray, h_values: np.ndarray) -> np.ndarray:
        return self.diag.values * h_values

    def _deriv_adjoint_values(self, u_values: np.ndarray, w_values: np.ndarray) -> np.ndarray:
        return self.diag.values * w_values
