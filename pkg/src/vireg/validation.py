"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numbers

import numpy as np

from .grid import Grid, GridFunction

__all__ = ["check_positive", "check_nonnegative", "as_grid_function"]


def check_positive(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_nonnegative(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a nonnegative finite number, got {value!r}")
    return float(value)


def as_grid_function(x, grid: Grid) -> GridFunction:
    """Coerce ``x`` (GridFunction, scalar, or array of node values) onto ``grid``."""
    if isinstance(x, GridFunction):
        if x.grid != grid:
            raise ValueError(
                f"grid function has {x.grid.n_intervals} intervals, expected {grid.n_intervals}"
            )
        return x
    if isinstance(x, numbers.Real):
        return GridFunction.constant(grid, float(x))
    return GridFunction(grid, np.asarray(x, dtype=float))
