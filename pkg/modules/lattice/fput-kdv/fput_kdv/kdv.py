"""KdV effective dynamics for the long-wave limit.

The right-moving profile ``A(w, T)`` solves ``2 A_T + c A_www + (A**2)_w = 0`` and the
left-moving profile ``B(l, T)`` solves ``2 B_T - c B_lll - (B**2)_l = 0`` with dispersion
``c = 1/12 + 2 sigma2``. Antiderivatives are based at 0: ``antiA(w) = int_0^w A``.

Profiles are either closed form (the sech**2 solitary wave) or sampled on a periodic grid and
advanced with a Fourier pseudospectral integrating-factor RK4 scheme.
"""

import functools
import logging
import math
from abc import ABC, abstractmethod
from enum import Enum
from pathlib import Path
from typing import Any, Callable, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import integrate
from scipy.interpolate import CubicSpline

from fput_kdv.exceptions import AliasingDetectedError, DomainExceededError, NonFiniteError
from fput_kdv.lattice_core import Array, as_array

_logger = logging.getLogger(__name__)

Profile = Callable[[Any], Any]

DEFAULT_MODES = 2**12
# The periodic w-domain has length DOMAIN_SCALE / epsilon.
DOMAIN_SCALE = 16.0
ALIASING_TOLERANCE = 1e-8
EDGE_TOLERANCE = 1e-10


def dispersion(sigma2: float) -> float:
    """Dispersion coefficient ``1/12 + 2 sigma2``."""
    return 1.0 / 12.0 + 2.0 * sigma2


class Jet(NamedTuple):
    """A profile, its first three derivatives and its antiderivative at the same points."""

    value: Array
    d1: Array
    d2: Array
    d3: Array
    anti: Array

    @classmethod
    def zeros(cls, shape: Tuple[int, ...]) -> "Jet":
        zero = np.zeros(shape)
        return cls(zero, zero, zero, zero, zero)


class Representation(str, Enum):
    CLOSED_FORM_SOLITON = "closed_form_soliton"
    GRID = "grid"
    ZERO = "zero"


class WaveFamily(ABC):
    """The KdV pair ``(A, B)`` with derivatives, time derivatives and antiderivatives.

    Time derivatives are never discretized; they come from the KdV equations.
    """

    representation: Representation

    def __init__(self, sigma2: float, t_min: float = -math.inf, t_max: float = math.inf) -> None:
        if sigma2 < 0.0:
            raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
        self.sigma2 = float(sigma2)
        self.t_min = t_min
        self.t_max = t_max

    @property
    def dispersion(self) -> float:
        return dispersion(self.sigma2)

    def check_time(self, T: float) -> None:
        if not self.t_min <= T <= self.t_max:
            raise DomainExceededError(f"T={T!r} outside the family domain [{self.t_min}, {self.t_max}]")

    @abstractmethod
    def right(self, w: Any, T: float) -> Jet:
        """Jet of A at ``(w, T)``."""

    @abstractmethod
    def left(self, l: Any, T: float) -> Jet:  # noqa: E741
        """Jet of B at ``(l, T)``."""

    def right_time_derivative(self, jet: Jet) -> Array:
        """``A_T = -(c A_www + 2 A A_w) / 2``."""
        return -0.5 * (self.dispersion * jet.d3 + 2.0 * jet.value * jet.d1)

    def left_time_derivative(self, jet: Jet) -> Array:
        """``B_T = (c B_lll + 2 B B_l) / 2``."""
        return 0.5 * (self.dispersion * jet.d3 + 2.0 * jet.value * jet.d1)


class ZeroWaveFamily(WaveFamily):
    """A = B = 0."""

    representation = Representation.ZERO

    def right(self, w: Any, T: float) -> Jet:
        self.check_time(T)
        return Jet.zeros(np.shape(w))

    def left(self, l: Any, T: float) -> Jet:  # noqa: E741
        self.check_time(T)
        return Jet.zeros(np.shape(l))


def sech2(x: Array) -> Array:
    """Overflow-free ``sech(x)**2``."""
    decay = np.exp(-2.0 * np.abs(x))
    return 4.0 * decay / (1.0 + decay) ** 2


class SolitonFamily(WaveFamily):
    """Right-moving solitary wave ``A = 3 sech**2(k (w - T))`` with ``B = 0``."""

    representation = Representation.CLOSED_FORM_SOLITON

    def __init__(self, sigma2: float) -> None:
        super().__init__(sigma2)
        self.k = math.sqrt(6.0 / (1.0 + 24.0 * self.sigma2))

    def profile(self, w: Any) -> Array:
        """Initial profile ``3 sech**2(k w)``."""
        return 3.0 * sech2(self.k * as_array(w))

    def right(self, w: Any, T: float) -> Jet:
        k = self.k
        x = k * (as_array(w) - T)
        s = sech2(x)
        th = np.tanh(x)
        return Jet(
            value=3.0 * s,
            d1=-6.0 * k * s * th,
            d2=6.0 * k**2 * (2.0 * s - 3.0 * s * s),
            d3=-24.0 * k**3 * s * th * (1.0 - 3.0 * s),
            anti=(3.0 / k) * (th + math.tanh(k * T)),
        )

    def left(self, l: Any, T: float) -> Jet:  # noqa: E741
        return Jet.zeros(np.shape(l))


def soliton(sigma2: float) -> SolitonFamily:
    """Closed-form solitary wave family for noise variance ``sigma2``."""
    return SolitonFamily(sigma2)


class KdVGrid(BaseModel):
    """Uniform periodic grid ``w_n = -length/2 + n h`` with ``modes`` points."""

    model_config = ConfigDict(frozen=True)

    length: float = Field(gt=0.0)
    modes: int = Field(default=DEFAULT_MODES, ge=8)

    @field_validator("modes")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("modes must be even")
        return value

    @classmethod
    def from_epsilon(cls, epsilon: float, modes: int = DEFAULT_MODES) -> "KdVGrid":
        return cls(length=DOMAIN_SCALE / epsilon, modes=modes)

    @property
    def spacing(self) -> float:
        return self.length / self.modes

    @property
    def points(self) -> Array:
        return -0.5 * self.length + self.spacing * np.arange(self.modes)

    def wavenumbers(self, modes: Optional[int] = None) -> Array:
        """Angular wavenumbers of the real FFT on this domain."""
        n = self.modes if modes is None else modes
        return 2.0 * np.pi * np.fft.rfftfreq(n, d=self.length / n)


class GridProfile(BaseModel):
    """A profile sampled on a :class:`KdVGrid`."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: KdVGrid
    values: np.ndarray  # type: ignore[type-arg]

    @field_validator("values", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Array:
        array = np.array(value, dtype=np.float64)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_shape(self) -> "GridProfile":
        if self.values.shape != (self.grid.modes,):
            raise ValueError(f"profile must have {self.grid.modes} samples")
        return self

    @classmethod
    def sample(cls, func: Profile, grid: KdVGrid) -> "GridProfile":
        return cls(grid=grid, values=as_array(func(grid.points)))

    def edge_magnitude(self) -> float:
        return float(max(abs(self.values[0]), abs(self.values[-1])))


ProfileLike = Union[GridProfile, Profile]


def split_initial_data(phi: ProfileLike, psi: ProfileLike) -> Tuple[ProfileLike, ProfileLike]:
    """Split lattice data ``(Phi, Psi)`` into ``A0 = (Phi - Psi)/2`` and ``B0 = (Phi + Psi)/2``."""
    if isinstance(phi, GridProfile) and isinstance(psi, GridProfile):
        if phi.grid != psi.grid:
            raise ValueError("Phi and Psi must share a grid")
        return (
            GridProfile(grid=phi.grid, values=0.5 * (phi.values - psi.values)),
            GridProfile(grid=phi.grid, values=0.5 * (phi.values + psi.values)),
        )
    if isinstance(phi, GridProfile) or isinstance(psi, GridProfile):
        raise TypeError("Phi and Psi must both be grid profiles or both be callables")

    def a0(w: Any) -> Any:
        return 0.5 * (phi(w) - psi(w))

    def b0(w: Any) -> Any:
        return 0.5 * (phi(w) + psi(w))

    return a0, b0


def _odd_wavenumbers(grid: KdVGrid) -> Array:
    kappa = grid.wavenumbers()
    kappa[-1] = 0.0  # Nyquist carries no odd derivative
    return kappa


def spectral_derivative(profile: GridProfile, order: int = 1) -> GridProfile:
    """Fourier derivative of a periodic grid profile."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    kappa = _odd_wavenumbers(profile.grid) if order % 2 else profile.grid.wavenumbers()
    coeffs = np.fft.rfft(profile.values) * (1j * kappa) ** order
    return GridProfile(grid=profile.grid, values=np.fft.irfft(coeffs, n=profile.grid.modes))


def _grid_antiderivative(values: Array, grid: KdVGrid) -> Array:
    """Antiderivative based at 0 of a decayed periodic profile, on the grid points."""
    n = grid.modes
    coeffs = np.fft.rfft(values)
    mean = coeffs[0].real / n
    kappa = _odd_wavenumbers(grid)
    resolved = kappa != 0.0
    periodic = np.zeros_like(coeffs)
    periodic[resolved] = coeffs[resolved] / (1j * kappa[resolved])
    fluctuation = np.fft.irfft(periodic, n=n)
    return fluctuation - fluctuation[n // 2] + mean * grid.points


def antiderivative(F: ProfileLike) -> ProfileLike:
    """Antiderivative ``int_0^x F``.

    Grid profiles use the spectral antiderivative with the zero mode integrated exactly, which
    requires F to be decayed at the domain edges. Callables are integrated by adaptive
    quadrature from 0.
    """
    if isinstance(F, GridProfile):
        return GridProfile(grid=F.grid, values=_grid_antiderivative(F.values, F.grid))

    def anti(x: Any) -> Any:
        xs = as_array(x)
        flat = [integrate.quad(F, 0.0, float(v), limit=200)[0] for v in xs.ravel()]
        return np.array(flat).reshape(xs.shape)

    return anti


def weighted_l2_norm(F: GridProfile, r: float = 1.0) -> float:
    """``sqrt(int (1 + w**2)**r F**2 dw)`` by the trapezoid rule on the grid."""
    w = F.grid.points
    return math.sqrt(float(integrate.trapezoid((1.0 + w * w) ** r * F.values**2, w)))


class _SpectralTrajectory:
    """Integrating-factor RK4 trajectory of ``2 A_T + c A_www + (A**2)_w = 0``."""

    def __init__(
        self,
        initial: GridProfile,
        sigma2: float,
        t_end: float,
        dT: Optional[float],
        snapshot_every: int,
        upsample: int,
    ) -> None:
        self.grid = initial.grid
        self.c = dispersion(sigma2)
        self.upsample = upsample
        n = self.grid.modes
        kappa_odd = _odd_wavenumbers(self.grid)
        self._linear = 0.5j * self.c * kappa_odd**3
        self._nonlinear = -0.5j * kappa_odd

        peak = float(np.max(np.abs(initial.values)))
        if dT is None:
            k_max = float(np.pi / self.grid.spacing)
            dT = min(1e-3, 1.0 / (k_max * peak + 1.0))
        n_steps = int(math.ceil(t_end / dT - 1e-12)) if t_end > 0 else 0
        self.dT = t_end / n_steps if n_steps else dT

        u = np.fft.rfft(initial.values)
        self._check(u, 0.0)
        times: List[float] = [0.0]
        snapshots: List[Array] = [u]
        step = functools.partial(self._step, dT=self.dT)
        for i in range(1, n_steps + 1):
            u = step(u)
            if i % snapshot_every == 0 or i == n_steps:
                self._check(u, i * self.dT)
                times.append(i * self.dT)
                snapshots.append(u)
        self.times = np.array(times)
        self.snapshots = snapshots
        self.t_end = t_end
        self.snapshot_gap = snapshot_every * self.dT
        _logger.debug("KdV trajectory: %d steps of dT=%g on %d modes", n_steps, self.dT, n)

        kf = self.grid.wavenumbers(n * upsample)
        self._fine_kappa = kf
        self._fine_points = -0.5 * self.grid.length + (self.grid.spacing / upsample) * np.arange(n * upsample)
        self.profiles_at = functools.lru_cache(maxsize=8)(self._profiles_at)

    def _rhs(self, u: Array) -> Array:
        a = np.fft.irfft(u, n=self.grid.modes)
        return self._nonlinear * np.fft.rfft(a * a)

    def _step(self, u: Array, dT: float) -> Array:
        e = np.exp(self._linear * (0.5 * dT))
        e2 = e * e
        a = dT * self._rhs(u)
        b = dT * self._rhs(e * (u + 0.5 * a))
        c = dT * self._rhs(e * u + 0.5 * b)
        d = dT * self._rhs(e2 * u + e * c)
        return e2 * u + (e2 * a + 2.0 * e * (b + c) + d) / 6.0

    @staticmethod
    def _check(u: Array, T: float) -> None:
        if not np.all(np.isfinite(u)):
            raise NonFiniteError("KdV evolution produced a non-finite coefficient", T)
        spectrum = np.abs(u)
        peak = float(spectrum.max())
        if peak == 0.0:
            return
        top = (2 * (u.size - 1)) // 3 + 1
        ratio = float(spectrum[top:].max()) / peak
        if ratio > ALIASING_TOLERANCE:
            raise AliasingDetectedError(T, ratio)

    def coefficients(self, T: float) -> Array:
        """Fourier coefficients at T, stepped from the nearest snapshot."""
        index = int(np.argmin(np.abs(self.times - T)))
        u = self.snapshots[index]
        gap = T - float(self.times[index])
        if gap == 0.0:
            return u
        n_sub = int(math.ceil(abs(gap) / self.dT - 1e-12))
        for _ in range(n_sub):
            u = self._step(u, gap / n_sub)
        return u

    def _profiles_at(self, T: float) -> CubicSpline:
        u = self.coefficients(T)
        n = self.grid.modes
        nf = n * self.upsample
        padded = np.zeros(nf // 2 + 1, dtype=complex)
        padded[: n // 2] = u[: n // 2]
        ik = 1j * self._fine_kappa
        columns = [np.fft.irfft(padded * ik**order, n=nf) * self.upsample for order in range(4)]
        periodic = np.zeros_like(padded)
        periodic[1:] = padded[1:] / ik[1:]
        integral = np.fft.irfft(periodic, n=nf) * self.upsample
        mean = u[0].real / n
        points = self._fine_points
        anti = integral - integral[nf // 2] + mean * points
        return CubicSpline(points, np.column_stack(columns + [anti]), axis=0)

    def jet(self, w: Any, T: float) -> Jet:
        points = as_array(w)
        spline = self.profiles_at(float(T))
        lo, hi = self._fine_points[0], self._fine_points[-1]
        values = spline(np.clip(points, lo, hi))
        outside = ((points < lo) | (points > hi))[..., None] & (np.arange(5) < 4)
        values = np.where(outside, 0.0, values)
        return Jet(*(values[..., i] for i in range(5)))

    def to_frame(self, T: float) -> pd.DataFrame:
        u = self.coefficients(T)
        n = self.grid.modes
        kappa = self.grid.wavenumbers()
        kappa_odd = _odd_wavenumbers(self.grid)
        data = {"w": self.grid.points}
        for name, order in (("A", 0), ("A_w", 1), ("A_ww", 2), ("A_www", 3)):
            k = kappa_odd if order % 2 else kappa
            data[name] = np.fft.irfft(u * (1j * k) ** order, n=n)
        return pd.DataFrame(data)


def _reflect(profile: GridProfile) -> GridProfile:
    """``w -> -w`` on the periodic grid (index ``n -> N - n``)."""
    return GridProfile(grid=profile.grid, values=np.roll(profile.values[::-1], 1))


class SpectralWaveFamily(WaveFamily):
    """Grid-sampled KdV pair from :func:`kdv_evolve`.

    B is obtained from the right-moving equation applied to the reflected data,
    ``B(l, T) = A~(-l, T)``. Queries outside the spatial domain see a decayed profile with a
    constant antiderivative. Times may exceed ``[0, T_end]`` by one snapshot gap.
    """

    representation = Representation.GRID

    def __init__(
        self,
        sigma2: float,
        t_end: float,
        right: Optional[_SpectralTrajectory],
        left: Optional[_SpectralTrajectory],
    ) -> None:
        gaps = [traj.snapshot_gap for traj in (right, left) if traj is not None]
        slack = max(gaps) if gaps else 0.0
        super().__init__(sigma2, t_min=-slack, t_max=t_end + slack)
        self._right = right
        self._left = left

    def right(self, w: Any, T: float) -> Jet:
        self.check_time(T)
        if self._right is None:
            return Jet.zeros(np.shape(w))
        return self._right.jet(w, T)

    def left(self, l: Any, T: float) -> Jet:  # noqa: E741
        self.check_time(T)
        if self._left is None:
            return Jet.zeros(np.shape(l))
        mirrored = self._left.jet(-as_array(l), T)
        return Jet(mirrored.value, -mirrored.d1, mirrored.d2, -mirrored.d3, -mirrored.anti)

    def to_csv(self, path: Union[str, Path], T: float) -> None:
        """Write ``w, A, A_w, A_ww, A_www`` at time T."""
        self.check_time(T)
        if self._right is None:
            raise ValueError("family has no right-moving profile to export")
        self._right.to_frame(T).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def kdv_evolve(
    A0: GridProfile,
    sigma2: float,
    T_end: float,
    B0: Optional[GridProfile] = None,
    *,
    dT: Optional[float] = None,
    snapshot_every: int = 10,
    upsample: int = 8,
) -> SpectralWaveFamily:
    """Evolve grid data under the KdV pair.

    Parameters
    ----------
    A0
        Right-moving data on a periodic grid, decayed below ``1e-10`` at the edges.
    sigma2
        Noise variance entering the dispersion.
    T_end
        Final macroscopic time.
    B0, optional
        Left-moving data on the same grid.
    dT, optional
        Time step; defaults to ``min(1e-3, 1 / (k_max max|A0| + 1))``.
    snapshot_every, optional
        Steps between stored snapshots.
    upsample, optional
        Band-limited refinement factor before spline evaluation.

    Raises
    ------
    AliasingDetectedError
        When the top third of the spectrum exceeds ``1e-8`` of its peak.
    NonFiniteError
        On blow-up.
    """
    if T_end < 0.0:
        raise ValueError("T_end must be nonnegative")
    if snapshot_every < 1 or upsample < 1:
        raise ValueError("snapshot_every and upsample must be positive")
    trajectories: List[Optional[_SpectralTrajectory]] = []
    for data in (A0, None if B0 is None else _reflect(B0)):
        if data is None or not np.any(data.values):
            trajectories.append(None)
            continue
        if data.grid != A0.grid:
            raise ValueError("A0 and B0 must share a grid")
        if data.edge_magnitude() >= EDGE_TOLERANCE:
            raise ValueError(f"initial data not decayed at the domain edges ({data.edge_magnitude():.3e})")
        trajectories.append(_SpectralTrajectory(data, sigma2, T_end, dT, snapshot_every, upsample))
    return SpectralWaveFamily(sigma2, T_end, trajectories[0], trajectories[1])


class CorrectorTerms(NamedTuple):
    a2: Array
    b2: Array
    a2_tau: Array
    b2_tau: Array


def corrector_terms(right: Jet, left: Jet, sigma2: float) -> CorrectorTerms:
    """Second-order correctors and their tau-derivatives from the two jets.

    ``A2 = [(1/4 - 2 sigma2) B_ll - (2 A_w antiB + 2 A B + B**2)] / 4``
    ``B2 = [(1/4 - 2 sigma2) A_ww - (A**2 + 2 A B + 2 antiA B_l)] / 4``
    and ``d_tau = -d_w + d_l``.
    """
    c2 = 0.25 - 2.0 * sigma2
    A, Aw, Aww, Awww, antiA = right
    B, Bl, Bll, Blll, antiB = left
    a2 = 0.25 * (c2 * Bll - (2.0 * Aw * antiB + 2.0 * A * B + B * B))
    b2 = 0.25 * (c2 * Aww - (A * A + 2.0 * A * B + 2.0 * antiA * Bl))
    a2_w = -0.25 * (2.0 * Aww * antiB + 2.0 * Aw * B)
    a2_l = 0.25 * (c2 * Blll - (2.0 * Aw * B + 2.0 * A * Bl + 2.0 * B * Bl))
    b2_w = 0.25 * (c2 * Awww - (2.0 * A * Aw + 2.0 * Aw * B + 2.0 * A * Bl))
    b2_l = -0.25 * (2.0 * A * Bl + 2.0 * antiA * Bll)
    return CorrectorTerms(a2=a2, b2=b2, a2_tau=a2_l - a2_w, b2_tau=b2_l - b2_w)


def correctors(family: WaveFamily) -> Tuple[Callable[[Any, Any, float], Array], Callable[[Any, Any, float], Array]]:
    """``(A2, B2)`` as functions of ``(w, l, T)``."""

    def a2(w: Any, l: Any, T: float) -> Array:  # noqa: E741
        return corrector_terms(family.right(w, T), family.left(l, T), family.sigma2).a2

    def b2(w: Any, l: Any, T: float) -> Array:  # noqa: E741
        return corrector_terms(family.right(w, T), family.left(l, T), family.sigma2).b2

    return a2, b2
