"""Experiment specification and report models."""

import math
from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fput_kdv.lattice_core import MassModel


class ExperimentKind(str, Enum):
    AMPLITUDE = "amplitude"
    ERROR_SWEEP = "error_sweep"
    GAMMA_BOUND = "gamma_bound"
    AR_BOUND = "ar_bound"
    SCALING_CHECK = "scaling_check"
    RESIDUAL_CHECK = "residual_check"
    SIMULATE = "simulate"


class ExperimentSpec(BaseModel):
    """Everything needed to reproduce one experiment run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind
    output_path: str
    epsilon_list: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.125], min_length=1)
    T0: float = Field(default=3.0, gt=0.0)
    mass_models: List[MassModel] = Field(default_factory=lambda: [MassModel.TRANSPARENT], min_length=1)
    realizations: int = Field(default=3, ge=1)
    seed: int = Field(default=42, ge=0, le=2**64 - 1)
    dt_override: Optional[float] = Field(default=None, gt=0.0)
    M_override: Optional[int] = Field(default=None, ge=1)
    samples: int = Field(default=200, ge=1)
    support_bound: float = Field(default=0.125, gt=0.0, lt=0.25)
    theta_list: List[float] = Field(default_factory=lambda: [0.5, 0.9, 0.99], min_length=1)
    length: int = Field(default=100_000, ge=1)
    spread_limit: float = Field(default=10.0, gt=1.0)
    wave: Literal["soliton", "zero"] = "soliton"
    timings: bool = False
    gnuplot: bool = False

    @field_validator("epsilon_list")
    @classmethod
    def _check_epsilons(cls, value: List[float]) -> List[float]:
        if any(not 0.0 < eps < 1.0 for eps in value):
            raise ValueError("every epsilon must lie in (0, 1)")
        return value

    @field_validator("theta_list")
    @classmethod
    def _check_thetas(cls, value: List[float]) -> List[float]:
        if any(not -1.0 < theta < 1.0 for theta in value):
            raise ValueError("every theta must lie in (-1, 1)")
        return value

    @model_validator(mode="after")
    def _check_kind(self) -> "ExperimentSpec":
        if self.kind is ExperimentKind.RESIDUAL_CHECK and self.mass_models != [MassModel.TRANSPARENT]:
            raise ValueError("residual_check runs on transparent masses only")
        if self.kind is ExperimentKind.ERROR_SWEEP and len(self.mass_models) > 1:
            raise ValueError("error_sweep runs on a single mass model")
        return self

    @property
    def mass_model(self) -> MassModel:
        return self.mass_models[0]

    def lattice_half_width(self, epsilon: float) -> int:
        """Window half-width M; defaults to ``ceil(8 (T0 / eps**3 + 1 / eps))``."""
        if self.M_override is not None:
            return self.M_override
        return int(math.ceil(8.0 * (self.T0 / epsilon**3 + 1.0 / epsilon)))


class ErrorRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float
    E_eps: float
    runtime_seconds: Optional[float] = None


class ErrorReport(BaseModel):
    """Per-epsilon errors of one realization and their log-log slope."""

    model_config = ConfigDict(frozen=True)

    rows: List[ErrorRow]
    fitted_slope: float
    fit_intercept: float
    fit_residual: float
    seed: int
    realization: int
