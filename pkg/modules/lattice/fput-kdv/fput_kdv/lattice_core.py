"""Discrete operators, disorder generators, the FPUT vector field and energies.

Lattice sequences live on the index window ``j = -M..M`` stored at array position ``j + M``;
all difference and shift operators wrap periodically.
"""

import logging
from enum import Enum
from typing import Any, Callable, Literal, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fput_kdv import rng
from fput_kdv.exceptions import MassProfileError, NonFiniteError

_logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

# Extra noise indices kept on each side of [-M, M].
NOISE_MARGIN = 2
SUPPORT_LIMIT = 0.25


def as_array(values: Any) -> Array:
    """Coerce to a contiguous float64 array."""
    return np.ascontiguousarray(values, dtype=np.float64)


def _frozen(values: Any) -> Array:
    array = np.array(values, dtype=np.float64)
    array.flags.writeable = False
    return array


class ShiftOp(str, Enum):
    """Periodic difference and shift operators."""

    DPLUS = "dplus"
    DMINUS = "dminus"
    SPLUS = "splus"
    SMINUS = "sminus"


def dplus(f: Array) -> Array:
    """Forward difference ``f(j+1) - f(j)``."""
    return np.roll(f, -1) - f


def dminus(f: Array) -> Array:
    """Backward difference ``f(j) - f(j-1)``."""
    return f - np.roll(f, 1)


def shift_ops(f: Any, which: Union[ShiftOp, str]) -> Array:
    """Apply a periodic difference or shift to a sequence.

    Args:
        f: Nonempty sequence on a periodic window.
        which: One of ``dplus``, ``dminus``, ``splus`` (``f(j+1)``) or ``sminus`` (``f(j-1)``).

    Returns:
        A new array of the same length.
    """
    values = as_array(f)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("shift_ops expects a nonempty one-dimensional sequence")
    op = ShiftOp(which)
    if op is ShiftOp.DPLUS:
        return dplus(values)
    if op is ShiftOp.DMINUS:
        return dminus(values)
    if op is ShiftOp.SPLUS:
        return np.roll(values, -1)
    return np.roll(values, 1)


def spring_force(q: Any) -> Any:
    """Derivative of the spring potential, ``q + q**2``."""
    return q + q * q


def spring_potential(q: Any) -> Any:
    """Spring potential ``q**2 / 2 + q**3 / 3``."""
    return 0.5 * q * q + q * q * q / 3.0


class NoiseSequence(BaseModel):
    """A realization of the i.i.d. sequence zeta on ``[-M-2, M+2]``.

    The two margin entries on each side are periodic images of the window, so stencils of
    width two around any window index agree with the periodic lattice operators.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray  # type: ignore[type-arg]
    half_width: int = Field(ge=0)
    sigma2: float = Field(ge=0.0)
    support_bound: float = Field(gt=0.0, lt=SUPPORT_LIMIT)
    seed: int = Field(default=0, ge=0, le=2**64 - 1)
    realization: int = Field(default=0, ge=0)
    distribution: Literal["uniform", "custom"] = "uniform"

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value: Any) -> Array:
        return _frozen(value)

    @model_validator(mode="after")
    def _check_realization(self) -> "NoiseSequence":
        expected = 2 * (self.half_width + NOISE_MARGIN) + 1
        if self.values.shape != (expected,):
            raise ValueError(f"noise values must have length {expected}, got {self.values.shape}")
        if not np.all(np.abs(self.values) < SUPPORT_LIMIT):
            raise ValueError("noise values must lie strictly inside (-1/4, 1/4)")
        if self.distribution == "uniform" and not np.isclose(self.sigma2, self.support_bound**2 / 3.0, rtol=1e-14):
            raise ValueError("sigma2 must equal support_bound**2 / 3 for uniform noise")
        return self

    @classmethod
    def from_values(
        cls, window: Any, sigma2: float = 0.0, support_bound: float = 0.125, seed: int = 0
    ) -> "NoiseSequence":
        """Build a custom realization from its values on ``[-M, M]``."""
        inner = as_array(window)
        if inner.ndim != 1 or inner.size % 2 == 0:
            raise ValueError("window values must have odd length 2M+1")
        return cls(
            values=np.pad(inner, NOISE_MARGIN, mode="wrap"),
            half_width=(inner.size - 1) // 2,
            sigma2=sigma2,
            support_bound=support_bound,
            seed=seed,
            distribution="custom",
        )

    @classmethod
    def zeros(cls, half_width: int) -> "NoiseSequence":
        """The degenerate realization zeta = 0."""
        return cls.from_values(np.zeros(2 * half_width + 1))

    @property
    def window(self) -> Array:
        """zeta(j) for ``j = -M..M``."""
        return self.values[NOISE_MARGIN:-NOISE_MARGIN]

    def shifted(self, offset: int) -> Array:
        """zeta(j + offset) for ``j = -M..M`` and ``|offset| <= 2``."""
        if abs(offset) > NOISE_MARGIN:
            raise ValueError(f"offset must satisfy |offset| <= {NOISE_MARGIN}")
        stop = self.values.size - NOISE_MARGIN + offset
        return self.values[NOISE_MARGIN + offset : stop]

    def forward_difference(self) -> Array:
        return self.shifted(1) - self.window

    def backward_difference(self) -> Array:
        return self.window - self.shifted(-1)

    def second_difference(self) -> Array:
        """``(delta+ delta- zeta)(j)`` on the window."""
        return self.shifted(1) - 2.0 * self.window + self.shifted(-1)


def sample_noise(
    distribution: Literal["uniform"] = "uniform",
    support_bound: float = 0.125,
    seed: int = 0,
    half_width: int = 0,
    realization: int = 0,
) -> NoiseSequence:
    """Draw zeta i.i.d. uniform on ``(-a, a)`` over ``[-M, M]``.

    Args:
        distribution: Only ``"uniform"`` is supported.
        support_bound: Half-width ``a`` of the uniform law, in ``(0, 1/4)``.
        seed: 64-bit base seed.
        half_width: Window half-width ``M``.
        realization: Ensemble member index, selecting an independent stream.

    Returns:
        The realization, with ``sigma2 = a**2 / 3``.
    """
    if distribution != "uniform":
        raise ValueError(f"unsupported noise distribution {distribution!r}")
    if not 0.0 < support_bound < SUPPORT_LIMIT:
        raise ValueError(f"support_bound must lie in (0, 1/4), got {support_bound}")
    if half_width < 0:
        raise ValueError("half_width must be nonnegative")
    window = rng.symmetric_uniform(seed, (realization, rng.NOISE_STREAM), half_width, -support_bound, support_bound)
    return NoiseSequence(
        values=np.pad(window, NOISE_MARGIN, mode="wrap"),
        half_width=half_width,
        sigma2=support_bound**2 / 3.0,
        support_bound=support_bound,
        seed=seed,
        realization=realization,
        distribution="uniform",
    )


class MassModel(str, Enum):
    CONSTANT = "constant"
    PERIODIC = "periodic"
    TRANSPARENT = "transparent"
    IID = "iid"
    TRANSLUCENT = "translucent"


class MassProfile(BaseModel):
    """Positive mass coefficients m(j) on ``[-M, M]``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray  # type: ignore[type-arg]
    model: MassModel
    half_width: int = Field(ge=0)
    source_noise: Optional[NoiseSequence] = None

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value: Any) -> Array:
        return _frozen(value)

    @model_validator(mode="after")
    def _check_positive(self) -> "MassProfile":
        if self.values.shape != (2 * self.half_width + 1,):
            raise ValueError("mass values must have length 2M+1")
        if not (np.all(np.isfinite(self.values)) and np.all(self.values > 0.0)):
            raise MassProfileError("mass coefficients must be finite and strictly positive")
        return self

    @property
    def sigma2(self) -> float:
        """Variance entering the effective KdV dispersion (0 unless noise-built)."""
        if self.model is MassModel.TRANSPARENT and self.source_noise is not None:
            return self.source_noise.sigma2
        return 0.0


def make_mass(
    model: Union[MassModel, str],
    half_width: int,
    noise: Optional[NoiseSequence] = None,
    *,
    period: int = 2,
    amplitude: float = 0.25,
    low: float = 0.5,
    high: float = 1.5,
    seed: int = 0,
    realization: int = 0,
) -> MassProfile:
    """Generate a mass profile.

    Parameters
    ----------
    model
        ``constant``, ``periodic``, ``transparent``, ``iid`` or ``translucent``.
    half_width
        Window half-width M.
    noise, optional
        Required for ``transparent`` and ``translucent``; its window must match ``half_width``.
    period, amplitude, optional
        Periodic model ``1 + amplitude * cos(2 pi j / period)``.
    low, high, optional
        Range of the i.i.d. uniform masses.
    seed, realization, optional
        Stream selection for the i.i.d. masses.
    """
    kind = MassModel(model)
    j = np.arange(-half_width, half_width + 1)
    if kind is MassModel.CONSTANT:
        values = np.ones(j.size)
    elif kind is MassModel.PERIODIC:
        if period < 2:
            raise ValueError("period must be at least 2")
        values = 1.0 + amplitude * np.cos(2.0 * np.pi * j / period)
    elif kind is MassModel.IID:
        if not 0.0 < low <= high:
            raise ValueError(f"iid mass range must satisfy 0 < low <= high, got [{low}, {high}]")
        values = rng.symmetric_uniform(seed, (realization, rng.MASS_STREAM), half_width, low, high)
    else:
        if noise is None:
            raise ValueError(f"{kind.value} masses require a noise sequence")
        if noise.half_width != half_width:
            raise ValueError(f"noise window M={noise.half_width} does not match M={half_width}")
        if kind is MassModel.TRANSPARENT:
            values = 1.0 + noise.second_difference()
        else:
            values = 1.0 + noise.backward_difference()

    if not (np.all(np.isfinite(values)) and np.all(values > 0.0)):
        raise MassProfileError(f"{kind.value} mass generator produced a nonpositive coefficient")
    source = noise if kind in (MassModel.TRANSPARENT, MassModel.TRANSLUCENT) else None
    return MassProfile(values=values, model=kind, half_width=half_width, source_noise=source)


class LatticeState(BaseModel):
    """Relative displacements q and velocities p at time t."""

    model_config = ConfigDict(arbitrary_types_allowed=True, validate_assignment=False)

    q: np.ndarray  # type: ignore[type-arg]
    p: np.ndarray  # type: ignore[type-arg]
    t: float = 0.0
    half_width: int = Field(ge=0)

    @field_validator("q", "p", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Array:
        return np.array(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_shape(self) -> "LatticeState":
        size = 2 * self.half_width + 1
        if self.q.shape != (size,) or self.p.shape != (size,):
            raise ValueError(f"q and p must both have length {size}")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise NonFiniteError("lattice state has non-finite entries", self.t)
        return self

    @classmethod
    def zeros(cls, half_width: int) -> "LatticeState":
        size = 2 * half_width + 1
        return cls(q=np.zeros(size), p=np.zeros(size), half_width=half_width)

    @property
    def indices(self) -> npt.NDArray[np.int64]:
        return np.arange(-self.half_width, self.half_width + 1)

    def stacked(self) -> Array:
        """``(2, 2M+1)`` array with rows q and p."""
        return np.stack([self.q, self.p])


def fput_rhs(state: LatticeState, mass: MassProfile, linear: bool = False) -> Tuple[Array, Array]:
    """The FPUT vector field ``(delta+ p, delta-[V'(q)] / m)``.

    ``linear`` replaces ``V'(q)`` by ``q`` and is meant for convergence tests only.
    """
    if state.half_width != mass.half_width:
        raise ValueError("state and mass windows differ")
    force = state.q if linear else spring_force(state.q)
    return dplus(state.p), dminus(force) / mass.values


def lattice_field(mass: MassProfile, linear: bool = False) -> Callable[[Array], Array]:
    """Vector field on stacked ``(q, p)`` arrays, for the time stepper."""
    inv_mass = 1.0 / mass.values

    def field(y: Array) -> Array:
        q, p = y[0], y[1]
        out = np.empty_like(y)
        out[0] = np.roll(p, -1) - p
        force = q if linear else q + q * q
        out[1] = (force - np.roll(force, 1)) * inv_mass
        return out

    return field


def energy_H(u: Any, v: Any, background: Any, mass: MassProfile) -> float:
    """Modulated energy of a perturbation ``(u, v)`` about a background displacement.

    Returns ``sum m v**2 / 2 + (1 + 2 b) u**2 / 2 + u**3 / 3``.
    """
    u_arr, v_arr, b_arr = as_array(u), as_array(v), as_array(background)
    if not u_arr.shape == v_arr.shape == b_arr.shape == mass.values.shape:
        raise ValueError("energy_H arguments must share the mass window length")
    kinetic = 0.5 * mass.values * v_arr * v_arr
    potential = 0.5 * (1.0 + 2.0 * b_arr) * u_arr * u_arr + u_arr**3 / 3.0
    return float(np.sum(kinetic + potential))


def hamiltonian(state: LatticeState, mass: MassProfile) -> float:
    """Conserved FPUT energy ``sum m p**2 / 2 + V(q)``."""
    return float(np.sum(0.5 * mass.values * state.p**2 + spring_potential(state.q)))


class Norms(BaseModel):
    model_config = ConfigDict(frozen=True)

    l2: float
    linf: float


def _norms_of(values: Array) -> Tuple[float, float]:
    if values.size == 0:
        return 0.0, 0.0
    return float(np.linalg.norm(values)), float(np.max(np.abs(values)))


def norms(first: Union[LatticeState, Any], second: Optional[Any] = None) -> Norms:
    """l2 and l-infinity norms of a sequence, or of a pair under the sum convention.

    A ``LatticeState`` is treated as the pair ``(q, p)``.
    """
    if isinstance(first, LatticeState):
        first, second = first.q, first.p
    l2, linf = _norms_of(as_array(first))
    if second is not None:
        l2_b, linf_b = _norms_of(as_array(second))
        l2, linf = l2 + l2_b, linf + linf_b
    return Norms(l2=l2, linf=linf)
