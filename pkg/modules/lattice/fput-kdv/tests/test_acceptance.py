"""Desk-scale versions of the long ensemble sweeps. Run with ``pytest -m slow``."""

import pandas as pd
import pytest

from fput_kdv.harness import (
    ExperimentKind,
    ExperimentSpec,
    run_amplitude,
    run_ar_bound,
    run_error_sweep,
    run_gamma_bound,
    run_residual_check,
    run_scaling_check,
)

pytestmark = pytest.mark.slow

THREADS = 0


def _summary(path) -> pd.Series:
    return pd.read_csv(path, comment="#").iloc[0]


def test_error_sweep_slope(tmp_path) -> None:
    spec = ExperimentSpec(
        kind=ExperimentKind.ERROR_SWEEP,
        output_path=str(tmp_path / "errors.csv"),
        epsilon_list=[0.5, 0.25, 0.125],
        T0=3.0,
        realizations=3,
    )

    reports = run_error_sweep(spec, threads=THREADS)

    assert len(reports) == 3
    for report in reports:
        assert 2.0 <= report.fitted_slope <= 3.0


def test_error_sweep_is_insensitive_to_step_refinement(tmp_path) -> None:
    errors = []
    for dt in (0.1, 0.05):
        spec = ExperimentSpec(
            kind=ExperimentKind.ERROR_SWEEP,
            output_path=str(tmp_path / f"errors-{dt}.csv"),
            epsilon_list=[0.25],
            T0=3.0,
            realizations=1,
            dt_override=dt,
        )
        (report,) = run_error_sweep(spec, threads=THREADS)
        errors.append(report.rows[0].E_eps)

    assert errors[1] == pytest.approx(errors[0], rel=0.05)


def test_amplitude_dichotomy(tmp_path) -> None:
    spec = ExperimentSpec(
        kind=ExperimentKind.AMPLITUDE,
        output_path=str(tmp_path / "amplitude.csv"),
        epsilon_list=[0.125],
        T0=3.0,
        mass_models=["constant", "periodic", "transparent", "iid"],
        realizations=1,
        samples=90,
    )

    frame = run_amplitude(spec, threads=THREADS)

    for model in ("constant", "periodic", "transparent"):
        series = frame[frame["mass_model"] == model]["scaled_amplitude"].to_numpy()
        plateau = series[-len(series) // 3 :]
        assert (plateau.max() - plateau.min()) / plateau.max() < 0.15
        assert series[-1] >= 0.7 * plateau.mean()
    disordered = frame[frame["mass_model"] == "iid"]["scaled_amplitude"].to_numpy()
    assert disordered[-1] < 0.6 * disordered[0]


def test_amplitude_holds_for_constant_masses(tmp_path) -> None:
    spec = ExperimentSpec(
        kind=ExperimentKind.AMPLITUDE,
        output_path=str(tmp_path / "constant.csv"),
        epsilon_list=[0.25],
        T0=3.0,
        mass_models=["constant"],
        realizations=1,
        samples=30,
    )

    series = run_amplitude(spec, threads=THREADS)["scaled_amplitude"].to_numpy()

    assert series[0] == pytest.approx(6.0)
    assert abs(series[-1] - series[0]) <= 0.15 * series[0]


def test_gamma_bound_growth(tmp_path) -> None:
    out = tmp_path / "gamma.csv"
    spec = ExperimentSpec(
        kind=ExperimentKind.GAMMA_BOUND,
        output_path=str(out),
        epsilon_list=[2.0**-k for k in range(2, 7)],
        realizations=200,
    )

    run_gamma_bound(spec, threads=THREADS)

    assert _summary(tmp_path / "gamma.summary.csv")["slope"] == pytest.approx(0.5, abs=0.2)


def test_ar_bound_scaling(tmp_path) -> None:
    spec = ExperimentSpec(
        kind=ExperimentKind.AR_BOUND,
        output_path=str(tmp_path / "ar.csv"),
        theta_list=[0.5, 0.9, 0.99],
        realizations=500,
        length=100_000,
    )

    frame = run_ar_bound(spec, threads=THREADS)

    assert _summary(tmp_path / "ar.summary.csv")["scaled_spread"] < 3.0
    assert (frame["exceedances"] >= 0).all()


def test_residual_order(tmp_path) -> None:
    spec = ExperimentSpec(
        kind=ExperimentKind.RESIDUAL_CHECK,
        output_path=str(tmp_path / "residual.csv"),
        epsilon_list=[0.25, 0.125, 0.0625],
        T0=1.0,
        realizations=1,
        samples=50,
    )

    frame = run_residual_check(spec, threads=THREADS)

    flags = pd.read_csv(tmp_path / "residual.flags.csv", comment="#")
    assert (flags["spread"] < 10.0).all()
    unlogged = frame.groupby("epsilon")["a3n_nolog"].mean().sort_index(ascending=False)
    assert unlogged.is_monotonic_increasing


def test_long_wave_scaling_of_noise_difference(tmp_path) -> None:
    spec = ExperimentSpec(
        kind=ExperimentKind.SCALING_CHECK,
        output_path=str(tmp_path / "lwa.csv"),
        epsilon_list=[2.0**-k for k in range(2, 7)],
        realizations=3,
    )

    frame = run_scaling_check(spec, threads=THREADS)

    assert (frame[frame["case"] == "noise_difference"]["spread"] < 2.0).all()
