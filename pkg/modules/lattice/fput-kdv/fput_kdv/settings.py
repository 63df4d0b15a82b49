"""Defines the runtime and experiment settings."""

from abc import ABC
from typing import List, Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from fput_kdv.harness.spec import ExperimentKind
from fput_kdv.lattice_core import MassModel


class FputKdvBaseSettings(BaseSettings, ABC):
    """Defines common configuration for settings."""

    model_config = SettingsConfigDict(
        case_sensitive=False,
        env_nested_delimiter="__",
        protected_namespaces=(),
        extra="ignore",
        populate_by_name=True,
    )


class RuntimeSettings(FputKdvBaseSettings):
    """Runtime Settings.

    ``threads = 0`` runs one worker per CPU.
    """

    model_config = SettingsConfigDict(env_prefix="FPUT_KDV_")

    threads: int = Field(default=0, ge=0)
    log_level: str = Field(default="INFO")


class ExperimentParameters(FputKdvBaseSettings):
    """Experiment Parameters.

    Lists are given as JSON, e.g. ``FPUT_KDV_PARAMETER_EPSILON_LIST='[0.5, 0.25]'``.
    """

    model_config = SettingsConfigDict(env_prefix="FPUT_KDV_PARAMETER_")

    kind: ExperimentKind
    output_path: str

    epsilon_list: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.125])
    T0: float = Field(default=3.0)
    mass_models: List[MassModel] = Field(default_factory=lambda: [MassModel.TRANSPARENT])
    realizations: int = Field(default=3)
    seed: int = Field(default=42)
    dt_override: Optional[float] = Field(default=None)
    M_override: Optional[int] = Field(default=None)
    samples: int = Field(default=200)
    support_bound: float = Field(default=0.125)
    theta_list: List[float] = Field(default_factory=lambda: [0.5, 0.9, 0.99])
    length: int = Field(default=100_000)
    spread_limit: float = Field(default=10.0)
    wave: Literal["soliton", "zero"] = Field(default="soliton")
    timings: bool = Field(default=False)
    gnuplot: bool = Field(default=False)


class ApplicationSettings(FputKdvBaseSettings):
    """Application settings."""

    runtime: RuntimeSettings = Field(default_factory=RuntimeSettings)
    parameters: ExperimentParameters = Field(default_factory=ExperimentParameters)
