"""Discrete stand-in for L2(0,1): uniform grid, grid functions, quadrature."""

from __future__ import annotations

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "inner_product",
    "norm",
    "cumint_backward",
]


class GridMismatchError(ValueError):
    """Two grid functions live on different grids."""


class Grid:
    """Uniform grid t_k = k*h on [0,1] with step h = 1/n_intervals.

    Parameters
    ----------
    n_intervals : int
        Number of subintervals N; the grid has N+1 nodes. Must be >= 1.
    """

    __slots__ = ("n_intervals", "step", "nodes")

    def __init__(self, n_intervals: int):
        n = int(n_intervals)
        if n < 1:
            raise ValueError(f"n_intervals must be a positive integer, got {n_intervals!r}")
        self.n_intervals = n
        self.step = 1.0 / n
        nodes = np.linspace(0.0, 1.0, n + 1)
        nodes.flags.writeable = False
        self.nodes = nodes

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n_intervals == self.n_intervals

    def __hash__(self):
        return hash(("Grid", self.n_intervals))

    def __repr__(self):
        return f"Grid(n_intervals={self.n_intervals})"


class GridFunction:
    """Real-valued function sampled at the nodes of a :class:`Grid`.

    Node 0 carries quadrature weight zero in the inner product below; its
    value is stored (operators are defined there) but never enters norms,
    projections or the solver update.

    Parameters
    ----------
    grid : Grid
    values : array_like, shape (n_intervals + 1,)
        Finite node values.
    copy : bool, optional
        Copy the input array (default). Pass False only for freshly
        allocated arrays that no one else mutates.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values, *, copy: bool = True):
        if copy:
            vals = np.array(values, dtype=float)
        else:
            vals = np.asarray(values, dtype=float)
        if vals.shape != (grid.n_intervals + 1,):
            raise ValueError(
                f"values must have shape ({grid.n_intervals + 1},), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite (no NaN/Inf)")
        self.grid = grid
        self.values = vals

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        """Sample ``fn`` (vectorized over node coordinates) on the grid."""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.n_intervals + 1, float(value)), copy=False)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_intervals + 1), copy=False)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values)

    def __len__(self):
        return self.values.size

    def __add__(self, other):
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values, copy=False)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values, copy=False)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * float(scalar), copy=False)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values, copy=False)

    def __repr__(self):
        return f"GridFunction(n={self.grid.n_intervals}, values={self.values!r})"


def _check_same_grid(u: GridFunction, v: GridFunction) -> None:
    if u.grid != v.grid:
        raise GridMismatchError(
            f"grid functions live on different grids: "
            f"{u.grid.n_intervals} vs {v.grid.n_intervals} intervals"
        )


def inner_product(u: GridFunction, v: GridFunction) -> float:
    """Backward-rectangle inner product h * sum_{k=1..N} u_k v_k.

    Node 0 has weight zero, consistent with the backward rectangle rule
    used for all integrals in this package.
    """
    _check_same_grid(u, v)
    return u.grid.step * float(np.dot(u.values[1:], v.values[1:]))


def norm(u: GridFunction) -> float:
    """Norm induced by :func:`inner_product`."""
    return float(np.sqrt(u.grid.step) * np.linalg.norm(u.values[1:]))


def cumint_backward(u: GridFunction) -> GridFunction:
    """Running integral U(t_k) = integral of u over [0, t_k], backward rectangle rule.

    U_0 = 0 and U_k = h * (u_1 + ... + u_k); exact for constants.
    """
    vals = np.empty_like(u.values)
    vals[0] = 0.0
    np.cumsum(u.values[1:], out=vals[1:])
    vals[1:] *= u.grid.step
    return GridFunction(u.grid, vals, copy=False)
