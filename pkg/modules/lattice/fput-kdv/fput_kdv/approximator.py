"""Extended KdV approximators, AR(1) correctors and residual diagnostics.

The approximator on the lattice window is

    q~ = sum_n eps**(n+2) Q_n(j, eps j, eps t, eps**3 t),  p~ likewise with P_n,

with ``w = X - tau`` and ``l = X + tau``. Spatial derivatives expand as ``d_X = d_w + d_l`` and
``d_tau = -d_w + d_l``; T-derivatives of A and B come from their KdV equations.
"""

import logging
import math
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import signal

from fput_kdv.kdv import WaveFamily, corrector_terms
from fput_kdv.lattice_core import (
    NOISE_MARGIN,
    Array,
    MassProfile,
    NoiseSequence,
    as_array,
    dminus,
    dplus,
    spring_force,
)

_logger = logging.getLogger(__name__)

Approximation = Tuple[Array, Array]

DEFAULT_SAMPLES = 200
DEFAULT_STEP = 1e-2


class ApproximatorOrder(str, Enum):
    LEADING = "leading"
    EXTENDED = "extended"


class ApproximatorConfig(BaseModel):
    """Scaling parameter, macroscopic horizon and expansion order."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0.0, lt=1.0)
    T0: float = Field(gt=0.0)
    order: ApproximatorOrder = ApproximatorOrder.EXTENDED

    @property
    def t_end(self) -> float:
        return self.T0 / self.epsilon**3


class GammaProcesses(BaseModel):
    """AR(1) correctors ``gamma1``, ``gamma2`` on ``[-M, M]``.

    ``delta+ gamma1 = -eps sgn(j) gamma1 - (zeta + S+ zeta)`` and
    ``delta- gamma2 = -eps sgn(j) gamma2 + (zeta + S- zeta + zeta delta+ delta- zeta + 2 sigma2)``
    with ``gamma1(0) = gamma2(0) = 0`` and ``sgn(0) = 0``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gamma1: np.ndarray  # type: ignore[type-arg]
    gamma2: np.ndarray  # type: ignore[type-arg]
    epsilon: float = Field(gt=0.0, le=1.0)
    half_width: int = Field(ge=0)
    source: NoiseSequence

    @field_validator("gamma1", "gamma2", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Array:
        array = np.array(value, dtype=np.float64)
        array.flags.writeable = False
        return array

    @property
    def theta(self) -> float:
        return 1.0 / (1.0 + self.epsilon)

    @property
    def vartheta(self) -> float:
        return 1.0 - self.epsilon

    @classmethod
    def zeros(cls, noise: NoiseSequence, epsilon: float) -> "GammaProcesses":
        size = 2 * noise.half_width + 1
        return cls(
            gamma1=np.zeros(size), gamma2=np.zeros(size), epsilon=epsilon, half_width=noise.half_width, source=noise
        )


def gamma_drivers(noise: NoiseSequence, half_width: int) -> Tuple[Array, Array]:
    """Drivers on ``[-M, M]``: ``zeta + S+ zeta`` for gamma1 and the gamma2 driver."""
    if not 0 <= half_width <= noise.half_width:
        raise ValueError(f"noise window M={noise.half_width} does not cover M={half_width}")
    center = noise.half_width + NOISE_MARGIN
    z = noise.values
    zeta = z[center - half_width : center + half_width + 1]
    plus = z[center - half_width + 1 : center + half_width + 2]
    minus = z[center - half_width - 1 : center + half_width]
    first = zeta + plus
    second = zeta + minus + zeta * (plus - 2.0 * zeta + minus) + 2.0 * noise.sigma2
    return first, second


def gamma_build(noise: NoiseSequence, epsilon: float, half_width: Optional[int] = None) -> GammaProcesses:
    """Solve the AR(1) corrector recursions outwards from ``j = 0``.

    Args:
        noise: Realization covering ``[-M-2, M+2]``.
        epsilon: Contraction parameter in ``(0, 1]``.
        half_width: Window half-width M; defaults to the noise window.

    Returns:
        The processes on ``[-M, M]``.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    M = noise.half_width if half_width is None else half_width
    first, second = gamma_drivers(noise, M)
    theta, vartheta = 1.0 / (1.0 + epsilon), 1.0 - epsilon
    gamma1 = np.zeros(2 * M + 1)
    gamma2 = np.zeros(2 * M + 1)
    if M > 0:
        # gamma1(j+1) = (1 - eps) gamma1(j) - first(j) for j >= 0
        gamma1[M + 1 :] = signal.lfilter([1.0], [1.0, -vartheta], -first[M : 2 * M])
        # gamma1(j) = theta (gamma1(j+1) + first(j)) for j < 0
        gamma1[:M] = signal.lfilter([theta], [1.0, -theta], first[M - 1 :: -1])[::-1]
        # gamma2(j) = theta (gamma2(j-1) + second(j)) for j > 0
        gamma2[M + 1 :] = signal.lfilter([theta], [1.0, -theta], second[M + 1 :])
        # gamma2(j-1) = (1 - eps) gamma2(j) - second(j) for j <= 0
        gamma2[:M] = signal.lfilter([1.0], [1.0, -vartheta], -second[M:0:-1])[::-1]
    return GammaProcesses(gamma1=gamma1, gamma2=gamma2, epsilon=epsilon, half_width=M, source=noise)


def ar1_reference(z: Any, theta: float, method: str = "direct") -> Array:
    """Explicit AR(1) sums ``chi(n) = sum_{k<n} theta**k z(n-k)`` for ``n = 1..N``.

    ``z`` holds ``z(1), ..., z(N)``. ``method="fft"`` evaluates the same convolution by FFT for
    long sequences.
    """
    if not -1.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (-1, 1), got {theta}")
    values = as_array(z)
    n = values.size
    kernel = theta ** np.arange(n, dtype=np.float64)
    if method == "direct":
        return np.convolve(values, kernel)[:n]
    if method == "fft":
        return np.asarray(signal.fftconvolve(values, kernel)[:n], dtype=np.float64)
    raise ValueError(f"unknown method {method!r}")


def _window(half_width: int) -> Array:
    return np.arange(-half_width, half_width + 1, dtype=np.float64)


def evaluate(
    config: ApproximatorConfig,
    family: WaveFamily,
    noise: Optional[NoiseSequence],
    gammas: Optional[GammaProcesses],
    half_width: int,
    t: float,
) -> Approximation:
    """Assemble ``(q~, p~)`` on ``j = -M..M`` at lattice time t."""
    eps = config.epsilon
    j = _window(half_width)
    w = eps * (j - t)
    l = eps * (j + t)  # noqa: E741
    T = eps**3 * t
    A = family.right(w, T)
    B = family.left(l, T)
    q0 = A.value + B.value
    p0 = B.value - A.value
    if config.order is ApproximatorOrder.LEADING:
        return eps**2 * q0, eps**2 * p0

    if noise is None or gammas is None:
        raise ValueError("the extended approximator requires noise and gamma processes")
    if noise.half_width != half_width or gammas.half_width != half_width:
        raise ValueError("noise, gammas and the evaluation window must share M")
    zeta = noise.window
    dzeta = noise.forward_difference()
    corr = corrector_terms(A, B, family.sigma2)

    dX_q0 = A.d1 + B.d1
    dtau_p0 = A.d1 + B.d1
    dX3_q0 = A.d3 + B.d3
    dX3_p0 = B.d3 - A.d3
    dT_p0 = family.left_time_derivative(B) - family.right_time_derivative(A)

    q1 = 0.5 * dX_q0 + dzeta * dtau_p0
    q2 = corr.a2 + corr.b2 - zeta * (A.d2 + B.d2)
    p2 = corr.b2 - corr.a2 + zeta * (B.d2 - A.d2)
    q3 = (
        (gammas.gamma2 + 0.5 * zeta) * dX3_q0
        - dzeta * (2.0 * q0 * dX_q0)
        + dzeta * (dT_p0 - corr.a2_tau + corr.b2_tau)
    )
    p3 = gammas.gamma1 * dX3_p0

    q = eps**2 * q0 + eps**3 * q1 + eps**4 * q2 + eps**5 * q3
    p = eps**2 * p0 + eps**4 * p2 + eps**5 * p3
    return q, p


class ResidualNorms(BaseModel):
    model_config = ConfigDict(frozen=True)

    res1_l2: float
    res2_l2: float


class AlphaBeta(BaseModel):
    """Size, time-derivative, residual and lower-size diagnostics over sampled times."""

    model_config = ConfigDict(frozen=True)

    alpha1: float
    alpha2: float
    alpha3: float
    beta1: float


def _residuals(
    approx: Callable[[float], Approximation], mass: MassProfile, t: float, h: float
) -> Tuple[Approximation, Array, Array, Array]:
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h}")
    q, p = approx(t)
    q_plus, p_plus = approx(t + h)
    q_minus, p_minus = approx(t - h)
    dq_dt = (q_plus - q_minus) / (2.0 * h)
    dp_dt = (p_plus - p_minus) / (2.0 * h)
    res1 = dplus(p) - dq_dt
    res2 = dminus(spring_force(q)) / mass.values - dp_dt
    return (q, p), dq_dt, res1, res2


def residual_norms_of(
    approx: Callable[[float], Approximation], mass: MassProfile, t: float, h: float = DEFAULT_STEP
) -> ResidualNorms:
    """Residual norms of any time-parametrized lattice approximation."""
    _, _, res1, res2 = _residuals(approx, mass, t, h)
    return ResidualNorms(res1_l2=float(np.linalg.norm(res1)), res2_l2=float(np.linalg.norm(res2)))


def _approximation(
    config: ApproximatorConfig,
    family: WaveFamily,
    noise: Optional[NoiseSequence],
    gammas: Optional[GammaProcesses],
    mass: MassProfile,
) -> Callable[[float], Approximation]:
    def approx(t: float) -> Approximation:
        return evaluate(config, family, noise, gammas, mass.half_width, t)

    return approx


def residual_norms(
    config: ApproximatorConfig,
    family: WaveFamily,
    noise: Optional[NoiseSequence],
    gammas: Optional[GammaProcesses],
    mass: MassProfile,
    t: float,
    h: float = DEFAULT_STEP,
) -> ResidualNorms:
    """ℓ² norms of ``Res1 = delta+ p~ - d_t q~`` and ``Res2 = delta-[V'(q~)] / m - d_t p~``.

    Time derivatives are centered differences of step h.
    """
    return residual_norms_of(_approximation(config, family, noise, gammas, mass), mass, t, h)


def sample_times(config: ApproximatorConfig, samples: int = DEFAULT_SAMPLES) -> List[float]:
    """Uniform sample times on ``[0, T0 / eps**3]``."""
    if samples < 1:
        raise ValueError("samples must be positive")
    return [float(t) for t in np.linspace(0.0, config.t_end, samples)]


def alpha_beta(
    config: ApproximatorConfig,
    family: WaveFamily,
    noise: Optional[NoiseSequence],
    gammas: Optional[GammaProcesses],
    mass: MassProfile,
    times: Optional[Sequence[float]] = None,
    h: float = DEFAULT_STEP,
) -> AlphaBeta:
    """Discrete suprema and infimum of the approximation diagnostics.

    alpha1 and beta1 are the sup and inf of ``||q~, p~||``, alpha2 the sup of ``||d_t q~||_inf``
    and alpha3 the sup of ``||Res1|| + ||Res2||``.
    """
    sampled = sample_times(config) if times is None else list(times)
    if not sampled:
        raise ValueError("at least one sample time is required")
    if any(abs(t) > config.t_end * (1.0 + 1e-12) for t in sampled):
        raise ValueError(f"sample times must satisfy |t| <= {config.t_end}")
    approx = _approximation(config, family, noise, gammas, mass)
    sizes: List[float] = []
    slopes: List[float] = []
    defects: List[float] = []
    for t in sampled:
        (q, p), dq_dt, res1, res2 = _residuals(approx, mass, t, h)
        sizes.append(float(np.linalg.norm(q) + np.linalg.norm(p)))
        slopes.append(float(np.max(np.abs(dq_dt))) if dq_dt.size else 0.0)
        defects.append(float(np.linalg.norm(res1) + np.linalg.norm(res2)))
    return AlphaBeta(alpha1=max(sizes), alpha2=max(slopes), alpha3=max(defects), beta1=min(sizes))


class ScalingRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float
    scaled_l2: float
    scaled_e0_plus: float
    scaled_e0_minus: float


class ScalingReport(BaseModel):
    """Long-wave scaling of ``f(j) F(eps j)`` and of the commutator terms E0+ and E0-."""

    model_config = ConfigDict(frozen=True)

    rows: List[ScalingRow]
    spread: float
    e0_plus_spread: float
    e0_minus_spread: float


def spread_ratio(values: Sequence[float]) -> float:
    """max / min of nonnegative values; 1 when all vanish."""
    top, bottom = max(values), min(values)
    if top == 0.0:
        return 1.0
    return top / bottom if bottom > 0.0 else math.inf


def lwa_scaling_check(
    f: Any, F: Callable[[Any], Any], epsilons: Sequence[float], extent: float = 20.0
) -> ScalingReport:
    """Check ``||f(.) F(eps .)||_l2 ~ eps**(-1/2)`` over a sweep.

    Parameters
    ----------
    f
        Bounded sequence on a symmetric window ``[-J, J]``.
    F
        Smooth profile, negligible beyond ``|X| > extent``.
    epsilons
        The sweep.
    extent, optional
        Half-width in X of the summation window.
    """
    seq = as_array(f)
    if seq.ndim != 1 or seq.size % 2 == 0:
        raise ValueError("f must be given on a symmetric window of odd length")
    J = (seq.size - 1) // 2
    rows: List[ScalingRow] = []
    for eps in epsilons:
        jmax = int(math.ceil(extent / eps))
        if jmax + 1 > J:
            raise ValueError(f"f window J={J} too short for epsilon={eps} (needs {jmax + 1})")
        j = np.arange(-jmax, jmax + 1)
        here = as_array(F(eps * j))
        ahead = as_array(F(eps * (j + 1)))
        behind = as_array(F(eps * (j - 1)))
        u = seq[J + j] * here
        e0_plus = seq[J + j + 1] * (ahead - here) / eps
        e0_minus = seq[J + j - 1] * (here - behind) / eps
        root = math.sqrt(eps)
        rows.append(
            ScalingRow(
                epsilon=eps,
                scaled_l2=float(np.linalg.norm(u)) * root,
                scaled_e0_plus=float(np.linalg.norm(e0_plus)) * root,
                scaled_e0_minus=float(np.linalg.norm(e0_minus)) * root,
            )
        )
    return ScalingReport(
        rows=rows,
        spread=spread_ratio([r.scaled_l2 for r in rows]),
        e0_plus_spread=spread_ratio([r.scaled_e0_plus for r in rows]),
        e0_minus_spread=spread_ratio([r.scaled_e0_minus for r in rows]),
    )
