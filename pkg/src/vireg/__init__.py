"""Lavrentiev-regularized variational inequalities for ill-posed monotone equations."""

from .constraints import LowerBoundSet, WholeSpace
from .grid import Grid, GridFunction, GridMismatchError, cumint_backward, inner_product, norm
from .operators import DiagonalOperator, ExpDecayOperator, GridOperator, OperatorConstants
from .solver import (
    LavrentievVI,
    NonFiniteIterateError,
    ProfilePoint,
    SolveResult,
    StabilityGap,
    contraction_excess,
    residual_profile,
    solve_vi,
    stability_gap,
)
from .experiments import (
    DEFAULT_DELTAS,
    EXAMPLE_NAMES,
    ExampleSpec,
    ExperimentRow,
    NoiseModel,
    SourceCheck,
    add_noise,
    apriori_alpha,
    build_example,
    loglog_slope,
    run_table,
    run_table_detailed,
    table_to_csv,
    table_to_text,
    verify_source_condition,
)

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "inner_product",
    "norm",
    "cumint_backward",
    "GridOperator",
    "OperatorConstants",
    "ExpDecayOperator",
    "DiagonalOperator",
    "LowerBoundSet",
    "WholeSpace",
    "LavrentievVI",
    "SolveResult",
    "StabilityGap",
    "ProfilePoint",
    "NonFiniteIterateError",
    "solve_vi",
    "stability_gap",
    "residual_profile",
    "contraction_excess",
    "ExampleSpec",
    "ExperimentRow",
    "NoiseModel",
    "SourceCheck",
    "EXAMPLE_NAMES",
    "DEFAULT_DELTAS",
    "apriori_alpha",
    "add_noise",
    "build_example",
    "run_table",
    "run_table_detailed",
    "verify_source_condition",
    "loglog_slope",
    "table_to_csv",
    "table_to_text",
    "__version__",
]
