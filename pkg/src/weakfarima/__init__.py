"""Least-squares estimation and robust inference for weak FARIMA models."""

from .estimator import FarimaEstimator
from .harness import (
    ErrorMoments,
    ExperimentSpec,
    SizeTable,
    emit_figure_data,
    returns_pipeline,
    run_error_moments,
    run_size_experiment,
)
from .inference import SandwichEstimate, ci_wald, h_process, j_hat, sandwich_estimate
from .lse import FitResult, fit, objective, objective_grad
from .model import (
    FarimaParams,
    FeasibleRegion,
    ResidualSet,
    check_feasible,
    residuals,
    residuals_with_grad,
)
from .selfnorm import (
    QuantileMC,
    SNMatrix,
    UQuantileTable,
    p_hat,
    sn_ci,
    sn_statistic,
    u_quantile,
    u_table,
)
from .series import frac_coeffs, frac_coeffs_dd
from .simulate import Garch, SimConfig, Strong, WeakProduct, simulate_farima

__version__ = "0.1.0"

__all__ = [
    "ErrorMoments",
    "ExperimentSpec",
    "FarimaEstimator",
    "FarimaParams",
    "FeasibleRegion",
    "FitResult",
    "Garch",
    "QuantileMC",
    "ResidualSet",
    "SNMatrix",
    "SandwichEstimate",
    "SimConfig",
    "SizeTable",
    "Strong",
    "UQuantileTable",
    "WeakProduct",
    "check_feasible",
    "ci_wald",
    "emit_figure_data",
    "fit",
    "frac_coeffs",
    "frac_coeffs_dd",
    "h_process",
    "j_hat",
    "objective",
    "objective_grad",
    "p_hat",
    "residuals",
    "residuals_with_grad",
    "returns_pipeline",
    "run_error_moments",
    "run_size_experiment",
    "sandwich_estimate",
    "simulate_farima",
    "sn_ci",
    "sn_statistic",
    "u_quantile",
    "u_table",
]
