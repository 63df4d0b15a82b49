"""Experiment runners behind the ``fput-kdv`` subcommands.

Every runner fans its cells out through :func:`fput_kdv.harness.pool.run_cells`, gathers rows in
cell order and writes CSV tables with :func:`fput_kdv.harness.output.write_csv`.
"""

import logging
import math
import time
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fput_kdv import rng
from fput_kdv.approximator import (
    ApproximatorConfig,
    ApproximatorOrder,
    GammaProcesses,
    alpha_beta,
    ar1_reference,
    evaluate,
    gamma_build,
    lwa_scaling_check,
    sample_times,
    spread_ratio,
)
from fput_kdv.exceptions import DegenerateFitError, NonFiniteError
from fput_kdv.harness.fitting import SlopeFit, fit_slope
from fput_kdv.harness.output import sibling, write_csv, write_gnuplot_script
from fput_kdv.harness.pool import run_cells
from fput_kdv.harness.spec import ErrorReport, ErrorRow, ExperimentKind, ExperimentSpec
from fput_kdv.integrator import IntegrationPlan, default_dt, integrate
from fput_kdv.kdv import SolitonFamily, WaveFamily, ZeroWaveFamily, sech2, soliton
from fput_kdv.lattice_core import (
    Array,
    LatticeState,
    MassModel,
    MassProfile,
    NoiseSequence,
    hamiltonian,
    make_mass,
    norms,
    sample_noise,
)

_logger = logging.getLogger(__name__)

Row = Dict[str, Any]

RANDOM_MODELS = (MassModel.TRANSPARENT, MassModel.TRANSLUCENT, MassModel.IID)
REFERENCE_MODELS = (MassModel.CONSTANT, MassModel.TRANSPARENT)
RESIDUAL_COLUMNS = ("a1n", "a2n", "a3n", "b1n")
GAMMA_WINDOW_SCALE = 10.0
SCALING_EXTENT = 20.0


class CellOutcome(NamedTuple):
    """Rows produced by one cell and, after a numerical abort, where it stopped."""

    rows: List[Row]
    failure: Optional[str] = None
    failed_at: Optional[float] = None


def _log_weight(n: Array) -> Array:
    return np.sqrt(np.log(np.e + np.abs(n)))


def _realizations(spec: ExperimentSpec, model: MassModel) -> range:
    return range(spec.realizations) if model in RANDOM_MODELS else range(1)


def _model_path(spec: ExperimentSpec, model: MassModel) -> Path:
    if len(spec.mass_models) == 1:
        return Path(spec.output_path)
    return sibling(spec.output_path, model.value)


def _make_lattice(
    spec: ExperimentSpec, model: MassModel, half_width: int, realization: int
) -> Tuple[MassProfile, Optional[NoiseSequence]]:
    """Mass profile of one realization and the noise it was built from, if any."""
    noise = None
    if model in (MassModel.TRANSPARENT, MassModel.TRANSLUCENT):
        noise = sample_noise(
            support_bound=spec.support_bound, seed=spec.seed, half_width=half_width, realization=realization
        )
    mass = make_mass(model, half_width, noise, seed=spec.seed, realization=realization)
    return mass, noise


def _initial_soliton(family: SolitonFamily, epsilon: float, half_width: int) -> LatticeState:
    """``q = 3 eps**2 sech**2(k eps j)`` with ``p = -q``: a right-moving solitary wave."""
    j = np.arange(-half_width, half_width + 1, dtype=np.float64)
    q = epsilon**2 * family.profile(epsilon * j)
    return LatticeState(q=q, p=-q, t=0.0, half_width=half_width)


def _plan(spec: ExperimentSpec, mass: MassProfile, epsilon: float) -> IntegrationPlan:
    dt = spec.dt_override if spec.dt_override is not None else default_dt(mass)
    return IntegrationPlan.uniform(dt, spec.T0 / epsilon**3, spec.samples)


def _safe_fit(points: Sequence[Tuple[float, float]], what: str) -> Optional[SlopeFit]:
    try:
        fit = fit_slope(points)
    except DegenerateFitError as err:
        _logger.warning("No slope for %s: %s", what, err)
        return None
    _logger.info("Fitted slope for %s: %.6f (residual %.3g)", what, fit.slope, fit.residual)
    return fit


def _fit_columns(fit: Optional[SlopeFit]) -> Row:
    if fit is None:
        return {"slope": math.nan, "intercept": math.nan, "fit_residual": math.nan}
    return {"slope": fit.slope, "intercept": fit.intercept, "fit_residual": fit.residual}


def _emit(
    frame: pd.DataFrame,
    path: Path,
    spec: ExperimentSpec,
    invocation: str,
    plot: Optional[Tuple[str, str, bool]] = None,
) -> Path:
    written = write_csv(frame, path, invocation)
    if spec.gnuplot and plot is not None and not frame.empty:
        x, y, logscale = plot
        write_gnuplot_script(written, x, y, frame.columns, logscale=logscale, title=spec.kind.value)
    return written


def _raise_first_failure(outcomes: Sequence[CellOutcome]) -> None:
    for outcome in outcomes:
        if outcome.failure is not None:
            raise NonFiniteError(outcome.failure, outcome.failed_at)


# amplitude


def _amplitude_cell(spec: ExperimentSpec, cell: Tuple[MassModel, float, int]) -> CellOutcome:
    model, epsilon, realization = cell
    half_width = spec.lattice_half_width(epsilon)
    mass, _ = _make_lattice(spec, model, half_width, realization)
    state = _initial_soliton(soliton(0.0), epsilon, half_width)
    rows: List[Row] = []

    def observe(t: float, current: LatticeState) -> None:
        linf_q = float(np.max(np.abs(current.q)))
        linf_p = float(np.max(np.abs(current.p)))
        rows.append(
            {
                "T": epsilon**3 * t,
                "scaled_amplitude": (linf_q + linf_p) / epsilon**2,
                "scaled_amplitude_max": max(linf_q, linf_p) / epsilon**2,
                "epsilon": epsilon,
                "mass_model": model.value,
                "seed": spec.seed,
                "realization": realization,
            }
        )

    _logger.info("amplitude: %s eps=%g r=%d M=%d", model.value, epsilon, realization, half_width)
    try:
        integrate(state, mass, _plan(spec, mass, epsilon), observe)
    except NonFiniteError as err:
        _logger.error("amplitude cell %s eps=%g r=%d aborted: %s", model.value, epsilon, realization, err)
        return CellOutcome(rows, str(err), err.time)
    return CellOutcome(rows)


def run_amplitude(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> pd.DataFrame:
    """Scaled pair amplitude ``||q, p||_inf / eps**2`` against ``T = eps**3 t``.

    One CSV per mass model. After a numerical abort the rows gathered so far are still written
    before :class:`NonFiniteError` is raised.
    """
    frames: List[pd.DataFrame] = []
    outcomes: List[CellOutcome] = []
    for model in spec.mass_models:
        cells = [(model, eps, r) for eps in spec.epsilon_list for r in _realizations(spec, model)]
        model_outcomes = run_cells(partial(_amplitude_cell, spec), cells, threads)
        frame = pd.DataFrame(
            [row for outcome in model_outcomes for row in outcome.rows],
            columns=["T", "scaled_amplitude", "scaled_amplitude_max", "epsilon", "mass_model", "seed", "realization"],
        )
        _emit(frame, _model_path(spec, model), spec, invocation, ("T", "scaled_amplitude", False))
        frames.append(frame)
        outcomes.extend(model_outcomes)
    _raise_first_failure(outcomes)
    return pd.concat(frames, ignore_index=True)


# error sweep


def _error_cell(spec: ExperimentSpec, cell: Tuple[float, int]) -> CellOutcome:
    epsilon, realization = cell
    started = time.perf_counter()
    half_width = spec.lattice_half_width(epsilon)
    mass, _ = _make_lattice(spec, spec.mass_model, half_width, realization)
    family = soliton(mass.sigma2)
    config = ApproximatorConfig(epsilon=epsilon, T0=spec.T0, order=ApproximatorOrder.LEADING)
    q_err = p_err = 0.0

    def observe(t: float, state: LatticeState) -> None:
        nonlocal q_err, p_err
        q_ref, p_ref = evaluate(config, family, None, None, half_width, t)
        q_err = max(q_err, float(np.linalg.norm(state.q - q_ref)))
        p_err = max(p_err, float(np.linalg.norm(state.p - p_ref)))

    _logger.info("error_sweep: eps=%g r=%d M=%d", epsilon, realization, half_width)
    try:
        integrate(_initial_soliton(family, epsilon, half_width), mass, _plan(spec, mass, epsilon), observe)
    except NonFiniteError as err:
        _logger.error("error_sweep cell eps=%g r=%d aborted: %s", epsilon, realization, err)
        return CellOutcome([], str(err), err.time)
    runtime = time.perf_counter() - started if spec.timings else None
    row = {
        "epsilon": epsilon,
        "E_eps": q_err + p_err,
        "runtime_s": runtime,
        "seed": spec.seed,
        "realization": realization,
    }
    return CellOutcome([row])


def run_error_sweep(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> List[ErrorReport]:
    """Absolute error of the lattice solution against the solitary wave, per epsilon and realization.

    Writes the per-cell table and ``<stem>.slopes.csv`` with one log-log fit per realization.
    """
    realizations = list(_realizations(spec, spec.mass_model))
    cells = [(eps, r) for r in realizations for eps in spec.epsilon_list]
    outcomes = run_cells(partial(_error_cell, spec), cells, threads)
    frame = pd.DataFrame(
        [row for outcome in outcomes for row in outcome.rows],
        columns=["epsilon", "E_eps", "runtime_s", "seed", "realization"],
    )
    path = _emit(frame, Path(spec.output_path), spec, invocation, ("epsilon", "E_eps", True))

    reports: List[ErrorReport] = []
    slopes: List[Row] = []
    for r in realizations:
        subset = frame[frame["realization"] == r]
        rows = [
            ErrorRow(
                epsilon=float(item.epsilon),
                E_eps=float(item.E_eps),
                runtime_seconds=None if pd.isna(item.runtime_s) else float(item.runtime_s),
            )
            for item in subset.itertuples(index=False)
        ]
        fit = _safe_fit([(row.epsilon, row.E_eps) for row in rows], f"error sweep realization {r}")
        columns = _fit_columns(fit)
        reports.append(
            ErrorReport(
                rows=rows,
                fitted_slope=columns["slope"],
                fit_intercept=columns["intercept"],
                fit_residual=columns["fit_residual"],
                seed=spec.seed,
                realization=r,
            )
        )
        slopes.append({"realization": r, **columns, "seed": spec.seed})
    write_csv(
        pd.DataFrame(slopes, columns=["realization", "slope", "intercept", "fit_residual", "seed"]),
        sibling(path, "slopes"),
        invocation,
    )
    _raise_first_failure(outcomes)
    return reports


# gamma and AR bounds


class GammaMaxima(NamedTuple):
    gamma2: float
    both: float


def gamma_maxima(gammas: GammaProcesses) -> GammaMaxima:
    """``max_j |gamma2(j)| / sqrt(ln(e + |j|))`` and the same for ``|gamma1| + |gamma2|``."""
    j = np.arange(-gammas.half_width, gammas.half_width + 1)
    weight = _log_weight(j)
    return GammaMaxima(
        gamma2=float(np.max(np.abs(gammas.gamma2) / weight)),
        both=float(np.max((np.abs(gammas.gamma1) + np.abs(gammas.gamma2)) / weight)),
    )


def gamma_half_width(spec: ExperimentSpec, epsilon: float) -> int:
    if spec.M_override is not None:
        return spec.M_override
    return int(math.ceil(GAMMA_WINDOW_SCALE / epsilon**3))


def _gamma_cell(spec: ExperimentSpec, cell: Tuple[float, int]) -> CellOutcome:
    epsilon, realization = cell
    half_width = gamma_half_width(spec, epsilon)
    noise = sample_noise(
        support_bound=spec.support_bound, seed=spec.seed, half_width=half_width, realization=realization
    )
    maxima = gamma_maxima(gamma_build(noise, epsilon))
    _logger.debug("gamma_bound: eps=%g r=%d max=%g", epsilon, realization, maxima.gamma2)
    row = {
        "param": epsilon,
        "realization": realization,
        "max_normalized": maxima.gamma2,
        "max_normalized_sum": maxima.both,
        "max_scaled": maxima.gamma2 * math.sqrt(epsilon),
        "seed": spec.seed,
    }
    return CellOutcome([row])


def _bound_summary(
    frame: pd.DataFrame, abscissa: Callable[[float], float], what: str, seed: int
) -> pd.DataFrame:
    medians = frame.groupby("param", sort=False)[["max_normalized", "max_scaled"]].median()
    fit = _safe_fit([(abscissa(float(p)), float(m)) for p, m in medians["max_normalized"].items()], what)
    spread = spread_ratio([float(v) for v in medians["max_scaled"]])
    _logger.info("%s: scaled median spread %.4g", what, spread)
    return pd.DataFrame([{**_fit_columns(fit), "scaled_spread": spread, "seed": seed}])


def run_gamma_bound(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> pd.DataFrame:
    """Monte-Carlo suprema of the log-normalized AR(1) correctors across the epsilon list.

    The summary regresses the median supremum against ``1 / eps``.
    """
    cells = [(eps, r) for eps in spec.epsilon_list for r in range(spec.realizations)]
    outcomes = run_cells(partial(_gamma_cell, spec), cells, threads)
    frame = pd.DataFrame(
        [row for outcome in outcomes for row in outcome.rows],
        columns=["param", "realization", "max_normalized", "max_normalized_sum", "max_scaled", "seed"],
    )
    path = _emit(frame, Path(spec.output_path), spec, invocation, ("param", "max_normalized", True))
    summary = _bound_summary(frame, lambda eps: 1.0 / eps, "gamma bound", spec.seed)
    write_csv(summary, sibling(path, "summary"), invocation)
    return frame


class ArMaxima(NamedTuple):
    normalized: float
    exceedances: int
    envelope_constant: float


def hoeffding_envelope(n: Array, theta: float, support_bound: float) -> Array:
    """``sqrt(ln(e + n) 4 a**2 (1 - theta**(2n)) / (1 - theta**2))``."""
    variance = 4.0 * support_bound**2 * (1.0 - theta ** (2.0 * n)) / (1.0 - theta**2)
    return np.sqrt(np.log(np.e + n) * variance)


def ar_maxima(z: Any, theta: float, support_bound: float) -> ArMaxima:
    """Normalized supremum of the AR(1) sums of ``z`` and how they sit under the envelope."""
    chi = np.abs(ar1_reference(z, theta, method="fft"))
    if chi.size == 0:
        return ArMaxima(0.0, 0, 0.0)
    n = np.arange(1, chi.size + 1, dtype=np.float64)
    envelope = hoeffding_envelope(n, theta, support_bound)
    return ArMaxima(
        normalized=float(np.max(chi / _log_weight(n))),
        exceedances=int(np.count_nonzero(chi >= envelope)),
        envelope_constant=float(np.max(chi / envelope)),
    )


def _ar_cell(spec: ExperimentSpec, realization: int) -> CellOutcome:
    a = spec.support_bound
    z = rng.generator(spec.seed, realization, rng.DRIVER_STREAM).uniform(-a, a, size=spec.length)
    rows: List[Row] = []
    for theta in spec.theta_list:
        maxima = ar_maxima(z, theta, a)
        rows.append(
            {
                "param": theta,
                "realization": realization,
                "max_normalized": maxima.normalized,
                "max_scaled": maxima.normalized * math.sqrt(1.0 - theta**2),
                "exceedances": maxima.exceedances,
                "envelope_constant": maxima.envelope_constant,
                "seed": spec.seed,
            }
        )
    return CellOutcome(rows)


def run_ar_bound(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> pd.DataFrame:
    """Monte-Carlo suprema of AR(1) sums; every theta reuses the same drivers of a realization."""
    outcomes = run_cells(partial(_ar_cell, spec), list(range(spec.realizations)), threads)
    rows = sorted(
        (row for outcome in outcomes for row in outcome.rows),
        key=lambda row: (spec.theta_list.index(row["param"]), row["realization"]),
    )
    frame = pd.DataFrame(
        rows,
        columns=[
            "param",
            "realization",
            "max_normalized",
            "max_scaled",
            "exceedances",
            "envelope_constant",
            "seed",
        ],
    )
    path = _emit(frame, Path(spec.output_path), spec, invocation, ("param", "max_normalized", False))
    summary = _bound_summary(frame, lambda theta: 1.0 / (1.0 - theta**2), "AR bound", spec.seed)
    write_csv(summary, sibling(path, "summary"), invocation)
    return frame


# long-wave scaling


def _gaussian(x: Any) -> Any:
    return np.exp(-np.square(x))


def _scaling_cell(spec: ExperimentSpec, cell: Tuple[str, int]) -> CellOutcome:
    case, realization = cell
    half_width = int(math.ceil(SCALING_EXTENT / min(spec.epsilon_list))) + 1
    if case == "noise_difference":
        noise = sample_noise(
            support_bound=spec.support_bound, seed=spec.seed, half_width=half_width, realization=realization
        )
        report = lwa_scaling_check(noise.forward_difference(), sech2, spec.epsilon_list, SCALING_EXTENT)
    else:
        report = lwa_scaling_check(np.ones(2 * half_width + 1), _gaussian, spec.epsilon_list, SCALING_EXTENT)
    rows = [
        {
            "case": case,
            "realization": realization,
            "epsilon": row.epsilon,
            "scaled_l2": row.scaled_l2,
            "scaled_e0_plus": row.scaled_e0_plus,
            "scaled_e0_minus": row.scaled_e0_minus,
            "spread": report.spread,
            "e0_plus_spread": report.e0_plus_spread,
            "e0_minus_spread": report.e0_minus_spread,
            "seed": spec.seed,
        }
        for row in report.rows
    ]
    return CellOutcome(rows)


def run_scaling_check(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> pd.DataFrame:
    """``eps**(1/2)``-scaled l2 sizes of long-wave products, for noisy and constant microstructure."""
    cells = [("noise_difference", r) for r in range(spec.realizations)] + [("constant", 0)]
    outcomes = run_cells(partial(_scaling_cell, spec), cells, threads)
    frame = pd.DataFrame(
        [row for outcome in outcomes for row in outcome.rows],
        columns=[
            "case",
            "realization",
            "epsilon",
            "scaled_l2",
            "scaled_e0_plus",
            "scaled_e0_minus",
            "spread",
            "e0_plus_spread",
            "e0_minus_spread",
            "seed",
        ],
    )
    _emit(frame, Path(spec.output_path), spec, invocation, ("epsilon", "scaled_l2", True))
    return frame


# residual check


def _wave_family(spec: ExperimentSpec, sigma2: float) -> WaveFamily:
    return soliton(sigma2) if spec.wave == "soliton" else ZeroWaveFamily(sigma2)


def _pair_l2(first: Array, second: Array) -> float:
    return float(np.linalg.norm(first) + np.linalg.norm(second))


def _residual_cell(spec: ExperimentSpec, cell: Tuple[float, int]) -> CellOutcome:
    epsilon, realization = cell
    half_width = spec.lattice_half_width(epsilon)
    mass, noise = _make_lattice(spec, MassModel.TRANSPARENT, half_width, realization)
    assert noise is not None
    gammas = gamma_build(noise, epsilon)
    family = _wave_family(spec, noise.sigma2)
    config = ApproximatorConfig(epsilon=epsilon, T0=spec.T0, order=ApproximatorOrder.EXTENDED)
    leading = ApproximatorConfig(epsilon=epsilon, T0=spec.T0, order=ApproximatorOrder.LEADING)
    times = sample_times(config, spec.samples)

    _logger.info("residual_check: eps=%g r=%d M=%d", epsilon, realization, half_width)
    diagnostics = alpha_beta(config, family, noise, gammas, mass, times)
    check = 0.0
    for t in times:
        q_ext, p_ext = evaluate(config, family, noise, gammas, half_width, t)
        q_lead, p_lead = evaluate(leading, family, None, None, half_width, t)
        check = max(check, _pair_l2(q_ext - q_lead, p_ext - p_lead))
    log_factor = math.sqrt(abs(math.log(epsilon)))
    row = {
        "epsilon": epsilon,
        "a1n": diagnostics.alpha1 / epsilon**1.5,
        "a2n": diagnostics.alpha2 / epsilon**3,
        "a3n": diagnostics.alpha3 / (epsilon**5 * log_factor),
        "b1n": diagnostics.beta1 / epsilon**1.5,
        "a3n_nolog": diagnostics.alpha3 / epsilon**5,
        "check_n": check / epsilon**2.5,
        "seed": spec.seed,
        "realization": realization,
    }
    return CellOutcome([row])


def residual_flags(frame: pd.DataFrame, spread_limit: float, suppress: bool = False) -> pd.DataFrame:
    """Spread of each normalized diagnostic across the epsilon list, per realization."""
    rows: List[Row] = []
    for realization, subset in frame.groupby("realization", sort=True):
        for column in RESIDUAL_COLUMNS:
            spread = spread_ratio([float(v) for v in subset[column]])
            flagged = not suppress and spread > spread_limit
            if flagged:
                _logger.warning(
                    "residual_check: %s spread %.4g exceeds %.4g (realization %s)",
                    column,
                    spread,
                    spread_limit,
                    realization,
                )
            rows.append({"realization": realization, "column": column, "spread": spread, "flagged": int(flagged)})
    return pd.DataFrame(rows, columns=["realization", "column", "spread", "flagged"])


def run_residual_check(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> pd.DataFrame:
    """Normalized size, slope, residual and lower-size diagnostics of the extended approximator.

    Writes the table and ``<stem>.flags.csv``; flags are suppressed for the zero wave.
    """
    cells = [(eps, r) for r in range(spec.realizations) for eps in spec.epsilon_list]
    outcomes = run_cells(partial(_residual_cell, spec), cells, threads)
    frame = pd.DataFrame(
        [row for outcome in outcomes for row in outcome.rows],
        columns=["epsilon", "a1n", "a2n", "a3n", "b1n", "a3n_nolog", "check_n", "seed", "realization"],
    )
    path = _emit(frame, Path(spec.output_path), spec, invocation, ("epsilon", "a3n", True))
    flags = residual_flags(frame, spec.spread_limit, suppress=spec.wave == "zero")
    write_csv(flags, sibling(path, "flags"), invocation)
    return frame


# simulate


def _simulate_cell(spec: ExperimentSpec, cell: Tuple[MassModel, float, int]) -> CellOutcome:
    model, epsilon, realization = cell
    half_width = spec.lattice_half_width(epsilon)
    mass, noise = _make_lattice(spec, model, half_width, realization)
    family = soliton(mass.sigma2)
    references = model in REFERENCE_MODELS
    leading = ApproximatorConfig(epsilon=epsilon, T0=spec.T0, order=ApproximatorOrder.LEADING)
    extended = ApproximatorConfig(epsilon=epsilon, T0=spec.T0, order=ApproximatorOrder.EXTENDED)
    gammas: Optional[GammaProcesses] = None
    if references:
        noise = noise if noise is not None else NoiseSequence.zeros(half_width)
        gammas = gamma_build(noise, epsilon)
    rows: List[Row] = []

    def observe(t: float, state: LatticeState) -> None:
        size = norms(state)
        row: Row = {
            "t": t,
            "T": epsilon**3 * t,
            "l2": size.l2,
            "linf": size.linf,
            "hamiltonian": hamiltonian(state, mass),
            "err_leading": math.nan,
            "err_extended": math.nan,
            "rel_err_leading": math.nan,
            "rel_err_extended": math.nan,
        }
        if references:
            for name, config in (("leading", leading), ("extended", extended)):
                q_ref, p_ref = evaluate(config, family, noise, gammas, half_width, t)
                error = _pair_l2(state.q - q_ref, state.p - p_ref)
                scale = _pair_l2(q_ref, p_ref)
                row[f"err_{name}"] = error
                row[f"rel_err_{name}"] = error / scale if scale > 0.0 else math.nan
        row.update({"epsilon": epsilon, "mass_model": model.value, "seed": spec.seed, "realization": realization})
        rows.append(row)

    _logger.info("simulate: %s eps=%g r=%d M=%d", model.value, epsilon, realization, half_width)
    try:
        integrate(_initial_soliton(family, epsilon, half_width), mass, _plan(spec, mass, epsilon), observe)
    except NonFiniteError as err:
        _logger.error("simulate cell %s eps=%g r=%d aborted: %s", model.value, epsilon, realization, err)
        return CellOutcome(rows, str(err), err.time)
    return CellOutcome(rows)


SIMULATE_COLUMNS = [
    "t",
    "T",
    "l2",
    "linf",
    "hamiltonian",
    "err_leading",
    "err_extended",
    "rel_err_leading",
    "rel_err_extended",
    "epsilon",
    "mass_model",
    "seed",
    "realization",
]


def run_simulate(spec: ExperimentSpec, threads: int = 1, invocation: str = "") -> pd.DataFrame:
    """Time series of norms, energy and approximator errors for solitary-wave data."""
    frames: List[pd.DataFrame] = []
    outcomes: List[CellOutcome] = []
    for model in spec.mass_models:
        cells = [(model, eps, r) for eps in spec.epsilon_list for r in _realizations(spec, model)]
        model_outcomes = run_cells(partial(_simulate_cell, spec), cells, threads)
        frame = pd.DataFrame([row for outcome in model_outcomes for row in outcome.rows], columns=SIMULATE_COLUMNS)
        _emit(frame, _model_path(spec, model), spec, invocation, ("T", "linf", False))
        frames.append(frame)
        outcomes.extend(model_outcomes)
    _raise_first_failure(outcomes)
    return pd.concat(frames, ignore_index=True)


RUNNERS: Dict[ExperimentKind, Callable[[ExperimentSpec, int, str], Any]] = {
    ExperimentKind.AMPLITUDE: run_amplitude,
    ExperimentKind.ERROR_SWEEP: run_error_sweep,
    ExperimentKind.GAMMA_BOUND: run_gamma_bound,
    ExperimentKind.AR_BOUND: run_ar_bound,
    ExperimentKind.SCALING_CHECK: run_scaling_check,
    ExperimentKind.RESIDUAL_CHECK: run_residual_check,
    ExperimentKind.SIMULATE: run_simulate,
}


def run_experiment(spec: ExperimentSpec, threads: int = 1, invocation: Optional[str] = None) -> Any:
    """Dispatch ``spec`` to its runner; ``invocation`` defaults to the spec rendered as JSON."""
    header = invocation if invocation is not None else spec.model_dump_json()
    _logger.info("Running %s into %s", spec.kind.value, spec.output_path)
    return RUNNERS[spec.kind](spec, threads, header)
