"""Fixed-step classical Runge-Kutta integration of the truncated lattice."""

import logging
import math
from typing import Any, Callable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from fput_kdv.exceptions import NonFiniteError
from fput_kdv.lattice_core import Array, LatticeState, MassProfile, lattice_field

_logger = logging.getLogger(__name__)

Observer = Callable[[float, LatticeState], None]

# Default step is min(MAX_DT, DT_SAFETY * sqrt(min m)).
MAX_DT = 0.1
DT_SAFETY = 0.5


def default_dt(mass: MassProfile) -> float:
    """Step well inside RK4 stability for lattice frequencies up to ``2 / sqrt(min m)``."""
    return min(MAX_DT, DT_SAFETY * math.sqrt(float(np.min(mass.values))))


class IntegrationPlan(BaseModel):
    """Step size, end time and the snapped sample times of one run.

    Requested sample times are snapped to the nearest multiple of ``dt``; duplicates after
    snapping are dropped. ``t_end`` is rounded to the nearest whole number of steps.
    """

    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0.0)
    t_end: float = Field(ge=0.0)
    sample_times: List[float] = Field(default_factory=list)

    @field_validator("sample_times")
    @classmethod
    def _snap(cls, value: List[float], info: ValidationInfo) -> List[float]:
        dt, t_end = info.data.get("dt"), info.data.get("t_end")
        if dt is None or t_end is None:
            return value
        steps = int(round(t_end / dt))
        snapped = sorted({int(round(t / dt)) for t in value})
        if snapped and (snapped[0] < 0 or snapped[-1] > steps):
            raise ValueError(f"sample times must lie in [0, {t_end}]")
        return [k * dt for k in snapped]

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def sample_steps(self) -> List[int]:
        return [int(round(t / self.dt)) for t in self.sample_times]

    @classmethod
    def uniform(cls, dt: float, t_end: float, samples: int) -> "IntegrationPlan":
        """Plan with ``samples`` equally spaced sample times on ``[0, t_end]``."""
        if samples < 1:
            raise ValueError("at least one sample time is required")
        times = [0.0] if samples == 1 else list(np.linspace(0.0, t_end, samples))
        return cls(dt=dt, t_end=t_end, sample_times=times)


def rk4_advance(field: Callable[[Any], Any], y: Any, dt: float) -> Any:
    """One classical four-stage Runge-Kutta step of ``y' = field(y)``."""
    k1 = field(y)
    k2 = field(y + 0.5 * dt * k1)
    k3 = field(y + 0.5 * dt * k2)
    k4 = field(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_finite(y: Array, t: float) -> None:
    if not np.isfinite(y).all():
        raise NonFiniteError("lattice integration produced a non-finite entry", t)


def rk4_step(state: LatticeState, mass: MassProfile, dt: float, linear: bool = False) -> LatticeState:
    """Advance ``state`` by one RK4 step of the FPUT vector field."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.half_width != mass.half_width:
        raise ValueError("state and mass windows differ")
    y = rk4_advance(lattice_field(mass, linear), state.stacked(), dt)
    _check_finite(y, state.t + dt)
    return LatticeState(q=y[0], p=y[1], t=state.t + dt, half_width=state.half_width)


def integrate(
    state: LatticeState,
    mass: MassProfile,
    plan: IntegrationPlan,
    observer: Optional[Observer] = None,
    linear: bool = False,
) -> LatticeState:
    """Integrate from ``state`` (taken as t = 0) to ``plan.t_end`` with fixed steps.

    Parameters
    ----------
    state
        Initial lattice state.
    mass
        Mass profile on the same window.
    plan
        Step size, end time and sample times.
    observer, optional
        Called with ``(t, state)`` at every snapped sample time, including t = 0 if requested.
    linear, optional
        Drop the quadratic spring term.

    Raises
    ------
    NonFiniteError
        With the time of the first step producing a non-finite entry.
    """
    if state.half_width != mass.half_width:
        raise ValueError("state and mass windows differ")
    field = lattice_field(mass, linear)
    pending = plan.sample_steps
    cursor = 0
    y = state.stacked()

    def notify(step: int) -> None:
        if observer is not None:
            observer(step * plan.dt, LatticeState(q=y[0], p=y[1], t=step * plan.dt, half_width=state.half_width))

    while cursor < len(pending) and pending[cursor] == 0:
        notify(0)
        cursor += 1
    for step in range(1, plan.n_steps + 1):
        y = rk4_advance(field, y, plan.dt)
        _check_finite(y, step * plan.dt)
        if cursor < len(pending) and pending[cursor] == step:
            notify(step)
            cursor += 1
    _logger.debug("Integrated %d steps of dt=%g on M=%d", plan.n_steps, plan.dt, state.half_width)
    return LatticeState(q=y[0], p=y[1], t=plan.n_steps * plan.dt, half_width=state.half_width)
