import math

import numpy as np
import pandas as pd
import pytest

from fput_kdv.exceptions import AliasingDetectedError, DomainExceededError
from fput_kdv.kdv import (
    GridProfile,
    Jet,
    KdVGrid,
    Representation,
    ZeroWaveFamily,
    antiderivative,
    corrector_terms,
    correctors,
    dispersion,
    kdv_evolve,
    sech2,
    soliton,
    spectral_derivative,
    split_initial_data,
    weighted_l2_norm,
)

SIGMA2 = 1.0 / 192.0


def _central(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def test_dispersion() -> None:
    assert dispersion(SIGMA2) == pytest.approx(1.0 / 12.0 + 1.0 / 96.0)


def test_sech2_handles_large_arguments() -> None:
    values = sech2(np.array([0.0, 1.0, 800.0, -800.0]))

    assert values[0] == 1.0
    assert values[1] == pytest.approx(1.0 / math.cosh(1.0) ** 2)
    assert values[2] == 0.0 and values[3] == 0.0


def test_soliton_examples() -> None:
    family = soliton(SIGMA2)

    assert family.k == pytest.approx(math.sqrt(16.0 / 3.0))
    assert family.k == pytest.approx(2.309401, abs=1e-6)
    assert family.right(np.array([0.7]), 0.7).value[0] == pytest.approx(3.0)
    assert np.all(family.right(np.array([-60.0, 60.0]), 0.0).value < 1e-30)
    assert family.representation is Representation.CLOSED_FORM_SOLITON


def test_soliton_solves_kdv() -> None:
    family = soliton(SIGMA2)
    w = np.linspace(-4.0, 4.0, 81)
    T = 0.3
    h = 1e-3

    A_T = _central(lambda s: family.right(w, s).value, T, h)
    jet = family.right(w, T)
    residual = 2.0 * A_T + family.dispersion * jet.d3 + 2.0 * jet.value * jet.d1

    assert np.max(np.abs(residual)) < 1e-6
    np.testing.assert_allclose(family.right_time_derivative(jet), A_T, atol=1e-7)


def test_soliton_derivatives_are_consistent() -> None:
    family = soliton(SIGMA2)
    w = np.linspace(-3.0, 3.0, 61)
    T = 0.25
    h = 1e-3
    jet = family.right(w, T)

    np.testing.assert_allclose(_central(lambda x: family.right(x, T).value, w, h), jet.d1, atol=1e-7)
    np.testing.assert_allclose(_central(lambda x: family.right(x, T).d1, w, h), jet.d2, atol=1e-6)
    np.testing.assert_allclose(_central(lambda x: family.right(x, T).d2, w, h), jet.d3, atol=1e-5)
    np.testing.assert_allclose(_central(lambda x: family.right(x, T).anti, w, h), jet.value, atol=1e-8)
    assert family.right(np.array([0.0]), T).anti[0] == pytest.approx(0.0, abs=1e-15)


def test_soliton_left_mover_vanishes() -> None:
    jet = soliton(SIGMA2).left(np.linspace(-1.0, 1.0, 5), 0.5)

    for part in jet:
        np.testing.assert_array_equal(part, 0.0)


def test_split_initial_data_callables() -> None:
    family = soliton(0.0)
    w = np.linspace(-2.0, 2.0, 9)

    a0, b0 = split_initial_data(family.profile, lambda x: -family.profile(x))
    np.testing.assert_allclose(a0(w), family.profile(w))
    np.testing.assert_allclose(b0(w), 0.0)

    a0, b0 = split_initial_data(family.profile, family.profile)
    np.testing.assert_allclose(a0(w), 0.0)
    np.testing.assert_allclose(b0(w), family.profile(w))


def test_split_initial_data_grid_profiles() -> None:
    grid = KdVGrid(length=20.0, modes=64)
    zero = GridProfile(grid=grid, values=np.zeros(64))

    a0, b0 = split_initial_data(zero, zero)

    assert isinstance(a0, GridProfile) and isinstance(b0, GridProfile)
    np.testing.assert_array_equal(a0.values, 0.0)
    np.testing.assert_array_equal(b0.values, 0.0)
    with pytest.raises(TypeError):
        split_initial_data(zero, lambda x: x)


def test_grid_rejects_odd_modes() -> None:
    with pytest.raises(ValueError):
        KdVGrid(length=10.0, modes=33)


def test_spectral_derivative_of_gaussian() -> None:
    grid = KdVGrid(length=40.0, modes=512)
    w = grid.points
    profile = GridProfile(grid=grid, values=np.exp(-(w**2)))

    derivative = spectral_derivative(profile, 1)

    np.testing.assert_allclose(derivative.values, -2.0 * w * np.exp(-(w**2)), atol=1e-12)


def test_antiderivative_of_zero() -> None:
    grid = KdVGrid(length=20.0, modes=64)

    anti = antiderivative(GridProfile(grid=grid, values=np.zeros(64)))

    np.testing.assert_array_equal(anti.values, 0.0)


def test_antiderivative_of_soliton_on_grid() -> None:
    family = soliton(SIGMA2)
    grid = KdVGrid(length=40.0, modes=1024)

    anti = antiderivative(GridProfile.sample(family.profile, grid))

    assert anti.values[grid.modes // 2] == pytest.approx(0.0, abs=1e-12)
    assert anti.values[-1] == pytest.approx(3.0 / family.k, abs=1e-9)
    assert anti.values[-1] - anti.values[0] == pytest.approx(6.0 / family.k, abs=1e-9)


def test_antiderivative_of_callable_uses_quadrature() -> None:
    family = soliton(SIGMA2)

    anti = antiderivative(family.profile)

    np.testing.assert_allclose(anti(np.array([-30.0, 0.0, 30.0])), [-3.0 / family.k, 0.0, 3.0 / family.k])


def test_antiderivative_bound() -> None:
    generator = np.random.default_rng(12)
    grid = KdVGrid(length=40.0, modes=1024)
    w = grid.points
    for _ in range(100):
        centers = generator.uniform(-5.0, 5.0, size=4)
        widths = generator.uniform(0.5, 2.0, size=4)
        weights = generator.normal(size=4)
        values = sum(a * np.exp(-((w - c) ** 2) / s) for a, c, s in zip(weights, centers, widths))
        profile = GridProfile(grid=grid, values=values)

        anti = antiderivative(profile)

        assert np.max(np.abs(anti.values)) <= math.sqrt(math.pi) * weighted_l2_norm(profile) + 1e-9


def test_weighted_l2_norm_of_gaussian() -> None:
    grid = KdVGrid(length=40.0, modes=1024)
    profile = GridProfile(grid=grid, values=np.exp(-(grid.points**2)))

    assert weighted_l2_norm(profile, r=0.0) == pytest.approx((math.pi / 2.0) ** 0.25, rel=1e-10)


def test_kdv_evolve_zero_data() -> None:
    grid = KdVGrid(length=20.0, modes=64)

    family = kdv_evolve(GridProfile(grid=grid, values=np.zeros(64)), SIGMA2, 1.0)
    jet = family.right(np.linspace(-5.0, 5.0, 11), 0.5)

    for part in jet:
        np.testing.assert_array_equal(part, 0.0)


def test_kdv_evolve_tracks_soliton() -> None:
    exact = soliton(SIGMA2)
    grid = KdVGrid(length=32.0, modes=4096)
    family = kdv_evolve(GridProfile.sample(exact.profile, grid), SIGMA2, 1.0)

    fine = np.linspace(0.0, 2.0, 8 * 256 + 1)
    values = family.right(fine, 1.0).value
    peak = fine[int(np.argmax(values))]
    assert abs(peak - 1.0) <= grid.spacing
    assert np.max(values) == pytest.approx(3.0, abs=1e-3)

    error = family.right(grid.points, 1.0).value - exact.right(grid.points, 1.0).value
    assert math.sqrt(grid.spacing * float(np.sum(error**2))) < 1e-3


def test_kdv_evolve_conserves_mass() -> None:
    exact = soliton(SIGMA2)
    grid = KdVGrid(length=32.0, modes=1024)
    family = kdv_evolve(GridProfile.sample(exact.profile, grid), SIGMA2, 0.5)
    edges = np.array([-100.0, 100.0])

    start = family.right(edges, 0.0).anti
    end = family.right(edges, 0.5).anti

    assert end[1] - end[0] == pytest.approx(start[1] - start[0], rel=1e-10)
    assert start[1] - start[0] == pytest.approx(6.0 / exact.k, rel=1e-8)


@pytest.mark.parametrize("shape", ["soliton", "mixed"])
def test_kdv_evolve_conserves_mass_and_energy(shape) -> None:
    grid = KdVGrid.from_epsilon(0.5)
    w = grid.points
    if shape == "soliton":
        initial = GridProfile.sample(soliton(SIGMA2).profile, grid)
    else:
        initial = GridProfile(grid=grid, values=2.0 * np.exp(-(w**2)) - 0.5 * np.exp(-((w + 4.0) ** 2)))
    family = kdv_evolve(initial, SIGMA2, 3.0)

    def integrals(T):
        values = family.right(w, T).value
        return grid.spacing * float(np.sum(values)), grid.spacing * float(np.sum(values**2))

    mass, energy = integrals(0.0)
    for T in (1.0, 2.0, 3.0):
        later_mass, later_energy = integrals(T)
        assert later_mass == pytest.approx(mass, rel=1e-8)
        assert later_energy == pytest.approx(energy, rel=1e-8)


def test_kdv_evolve_queries_outside_the_domain() -> None:
    grid = KdVGrid(length=32.0, modes=1024)
    family = kdv_evolve(GridProfile.sample(soliton(SIGMA2).profile, grid), SIGMA2, 0.1)

    jet = family.right(np.array([50.0]), 0.1)

    assert jet.value[0] == 0.0 and jet.d1[0] == 0.0
    with pytest.raises(DomainExceededError):
        family.right(np.array([0.0]), 5.0)


def test_kdv_evolve_left_mover_is_mirrored() -> None:
    exact = soliton(SIGMA2)
    grid = KdVGrid(length=32.0, modes=1024)
    zero = GridProfile(grid=grid, values=np.zeros(grid.modes))
    family = kdv_evolve(zero, SIGMA2, 0.1, B0=GridProfile.sample(exact.profile, grid))
    l = np.linspace(-2.0, 2.0, 21)  # noqa: E741

    jet = family.left(l, 0.0)

    np.testing.assert_allclose(jet.value, exact.profile(l), atol=1e-8)
    np.testing.assert_allclose(jet.d1, -exact.right(-l, 0.0).d1, atol=1e-6)
    np.testing.assert_allclose(jet.anti, exact.right(l, 0.0).anti, atol=1e-8)


def test_kdv_evolve_rejects_undecayed_data() -> None:
    grid = KdVGrid(length=8.0, modes=64)

    with pytest.raises(ValueError):
        kdv_evolve(GridProfile(grid=grid, values=np.ones(64)), SIGMA2, 0.1)


def test_kdv_evolve_detects_aliasing() -> None:
    grid = KdVGrid(length=32.0, modes=256)
    w = grid.points
    rough = GridProfile(grid=grid, values=1e-4 * np.exp(-(w**2)) * np.cos(22.0 * w))

    with pytest.raises(AliasingDetectedError):
        kdv_evolve(rough, SIGMA2, 0.1)


def test_spectral_family_to_csv(tmp_path) -> None:
    grid = KdVGrid(length=32.0, modes=1024)
    family = kdv_evolve(GridProfile.sample(soliton(SIGMA2).profile, grid), SIGMA2, 0.05)
    target = tmp_path / "profile.csv"

    family.to_csv(target, 0.05)

    frame = pd.read_csv(target)
    assert list(frame.columns) == ["w", "A", "A_w", "A_ww", "A_www"]
    assert len(frame) == 1024


def test_correctors_of_pure_right_mover() -> None:
    family = soliton(SIGMA2)
    a2, b2 = correctors(family)
    w = np.linspace(-2.0, 2.0, 9)
    l = np.zeros(9)  # noqa: E741

    np.testing.assert_array_equal(a2(w, l, 0.0), 0.0)
    jet = family.right(w, 0.0)
    np.testing.assert_allclose(b2(w, l, 0.0), 0.25 * ((0.25 - 2 * SIGMA2) * jet.d2 - jet.value**2))
    assert b2(np.array([0.4]), np.array([0.0]), 0.4)[0] == pytest.approx(-25.0 / 6.0)


def test_correctors_of_zero_family() -> None:
    a2, b2 = correctors(ZeroWaveFamily(SIGMA2))
    x = np.linspace(-1.0, 1.0, 5)

    np.testing.assert_array_equal(a2(x, x, 0.0), 0.0)
    np.testing.assert_array_equal(b2(x, x, 0.0), 0.0)


def test_corrector_tau_derivatives() -> None:
    right = soliton(SIGMA2)
    left = soliton(SIGMA2)
    X = np.linspace(-1.0, 1.0, 11)
    tau = 0.3
    h = 1e-4

    def terms(s):
        return corrector_terms(right.right(X - s, 0.0), _mirror(left, X + s), SIGMA2)

    expected = corrector_terms(right.right(X - tau, 0.0), _mirror(left, X + tau), SIGMA2)
    np.testing.assert_allclose(_central(lambda s: terms(s).a2, tau, h), expected.a2_tau, atol=1e-7)
    np.testing.assert_allclose(_central(lambda s: terms(s).b2, tau, h), expected.b2_tau, atol=1e-7)


def _mirror(family, l):  # noqa: E741
    jet = family.right(-l, 0.0)
    return Jet(jet.value, -jet.d1, jet.d2, -jet.d3, -jet.anti)
