"""Experiment runner: experiment models, fits, CSV output and the run_* operations."""

from fput_kdv.harness.experiments import (
    run_amplitude,
    run_ar_bound,
    run_error_sweep,
    run_experiment,
    run_gamma_bound,
    run_residual_check,
    run_scaling_check,
    run_simulate,
)
from fput_kdv.harness.fitting import SlopeFit, fit_slope
from fput_kdv.harness.spec import ErrorReport, ErrorRow, ExperimentKind, ExperimentSpec

__all__ = [
    "ErrorReport",
    "ErrorRow",
    "ExperimentKind",
    "ExperimentSpec",
    "SlopeFit",
    "fit_slope",
    "run_amplitude",
    "run_ar_bound",
    "run_error_sweep",
    "run_experiment",
    "run_gamma_bound",
    "run_residual_check",
    "run_scaling_check",
    "run_simulate",
]
