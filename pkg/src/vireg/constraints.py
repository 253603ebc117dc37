"""Closed convex constraint sets with exact nearest-point projections."""

from __future__ import annotations

import numpy as np

from .grid import GridFunction

__all__ = ["LowerBoundSet", "WholeSpace"]

MEMBERSHIP_TOL = 1e-12


class LowerBoundSet:
    """Pointwise lower bound { u : u_k >= kappa for k = 1..N }.

    Node 0 is exempt: it has quadrature weight zero and never influences
    the operators, so clipping it would be meaningless under the metric.
    """

    __slots__ = ("kappa",)

    def __init__(self, kappa: float):
        self.kappa = float(kappa)

    def project(self, u: GridFunction) -> GridFunction:
        vals = u.values.copy()
        np.maximum(vals[1:], self.kappa, out=vals[1:])
        return GridFunction(u.grid, vals, copy=False)

    def membership(self, u: GridFunction, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(np.all(u.values[1:] >= self.kappa - tol))

    def _clip_inplace(self, active_values: np.ndarray) -> None:
        # active_values is the node-1..N slice of an iterate
        np.maximum(active_values, self.kappa, out=active_values)

    def __repr__(self):
        return f"LowerBoundSet(kappa={self.kappa!r})"


class WholeSpace:
    """Unconstrained case: the projection is the identity."""

    __slots__ = ()

    def project(self, u: GridFunction) -> GridFunction:
        return u

    def membership(self, u: GridFunction, tol: float = MEMBERSHIP_TOL) -> bool:
        return True

    def _clip_inplace(self, active_values: np.ndarray) -> None:
        pass

    def __repr__(self):
        return "WholeSpace()"
