"""Probabilistic food security risk projections."""

from ._core import (
    Activity,
    Bound,
    NumericalError,
    Perspective,
    ValidationError,
    caloric_requirement,
    classify_level,
    convex_risk,
    double_logistic,
    fsri,
    gamma_value,
    life_table_from_e0,
    preset_weights,
    run_pipeline,
    scenario_names,
    wasserstein_barycenter,
)

__all__ = [
    "Activity",
    "Bound",
    "NumericalError",
    "Perspective",
    "ValidationError",
    "caloric_requirement",
    "classify_level",
    "convex_risk",
    "double_logistic",
    "fsri",
    "gamma_value",
    "life_table_from_e0",
    "preset_weights",
    "run_pipeline",
    "scenario_names",
    "wasserstein_barycenter",
]
