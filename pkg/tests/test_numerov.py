import math

import numpy as np
import pytest

from tepskit.numerov import (
    NumerovGrid,
    calibrate_kinetic_coeff,
    default_grid,
    numerov_integrate,
    phase_from_matching,
    phase_shift,
)
from tepskit.potentials import (
    GAUSS_1_2,
    GAUSS_2_4,
    LJ_H_NOBLE,
    MOLECULAR_MEV_ANGSTROM,
    NUCLEAR_MEV_FM,
    GaussianPotential,
    TabulatedPotential,
    UnitSystem,
)

FREE = GaussianPotential(v0=0.0, sigma=1.0)


def test_free_solution_is_sine():
    k = 1.3
    grid = NumerovGrid(spacing=0.01, r_min=0.0, r_max=30.0)
    run = numerov_integrate(FREE, NUCLEAR_MEV_FM, k * k, 0, grid)
    ref = np.sin(k * run.r)
    # fix the arbitrary scale on a quarter-wave point
    i = np.argmax(np.abs(ref))
    scale = run.u[i] / ref[i]
    assert np.allclose(run.u, scale * ref, atol=1e-8 * abs(scale))


def test_free_phase_shift_is_zero():
    delta = phase_shift(FREE, NUCLEAR_MEV_FM, 1.3)
    assert abs(delta) < 1e-8


def square_well_delta(v0, radius, k):
    # closed-form s-wave phase shift of an attractive square well
    kp = math.sqrt(k * k + v0)
    return -k * radius + math.atan2(k * math.tan(kp * radius), kp)


@pytest.mark.parametrize("k", [0.6, 1.1, 2.3])
def test_square_well_matches_closed_form(k):
    # the sharp edge costs two orders of local accuracy, so the step is finer
    v0, radius = 2.0, 3.0
    edge = np.nextafter(radius, 0.0)
    tab = TabulatedPotential([0.0, edge, radius], [-v0, -v0, 0.0])
    grid = NumerovGrid(spacing=radius / 24000, r_min=0.0, r_max=30.0)
    run = numerov_integrate(tab, NUCLEAR_MEV_FM, k * k, 0, grid)
    delta = phase_from_matching(run, k, r_a=20.0)
    exact = square_well_delta(v0, radius, k)
    exact = (exact + math.pi / 2) % math.pi - math.pi / 2
    assert delta == pytest.approx(exact, abs=2e-4)


# Frozen oracle values, cross-verified against an independent high-accuracy
# RK integration of the same radial equation (agreement to 1e-6).
@pytest.mark.parametrize(
    "pot,k,expected",
    [
        (GAUSS_1_2, 1.466, -0.6508176),
        (GAUSS_1_2, 2.252, -0.4086543),
        (GAUSS_1_2, 0.351, -0.4995546),
        (GAUSS_2_4, 1.9107, 1.0462973),
        (GAUSS_2_4, 0.662, 0.1122070),
    ],
)
def test_gaussian_regression_values(pot, k, expected):
    assert phase_shift(pot, NUCLEAR_MEV_FM, k) == pytest.approx(expected, abs=2e-5)


def test_matching_point_invariance():
    k = 1.73
    run = numerov_integrate(GAUSS_1_2, NUCLEAR_MEV_FM, k * k)
    base = phase_from_matching(run)
    lam = 2 * math.pi / k
    for shift in (0.35 * lam, 0.8 * lam, 1.6 * lam):
        alt = phase_from_matching(run, r_a=run.r_asym + shift)
        assert alt == pytest.approx(base, abs=1e-4)


def test_step_halving_converged():
    k = 1.73
    grid = default_grid(GAUSS_1_2, NUCLEAR_MEV_FM, k * k, 0)
    half = NumerovGrid(grid.spacing / 2, grid.r_min, grid.r_max)
    d1 = phase_from_matching(numerov_integrate(GAUSS_1_2, NUCLEAR_MEV_FM, k * k, 0, grid))
    d2 = phase_from_matching(numerov_integrate(GAUSS_1_2, NUCLEAR_MEV_FM, k * k, 0, half))
    assert abs(d1 - d2) < 1e-6


def test_lennard_jones_core_triggers_rescale():
    run = numerov_integrate(LJ_H_NOBLE, MOLECULAR_MEV_ANGSTROM,
                            MOLECULAR_MEV_ANGSTROM.energy_from_momentum(1.06))
    assert run.rescale_count > 0
    assert np.all(np.isfinite(run.u))
    assert run.grid.r_min == pytest.approx(0.1 * LJ_H_NOBLE.sigma)


def test_lennard_jones_regression_value():
    # frozen at the calibrated kinetic coefficient
    delta = phase_shift(LJ_H_NOBLE, MOLECULAR_MEV_ANGSTROM, 1.06)
    assert delta == pytest.approx(-1.4403, abs=5e-4)


def test_calibration_roundtrip():
    target_units = UnitSystem("angstrom", "meV", 2.115)
    k = 0.9
    target = phase_shift(LJ_H_NOBLE, target_units, k)
    recovered = calibrate_kinetic_coeff(LJ_H_NOBLE, k, target, bracket=(2.0, 2.2))
    assert recovered.kinetic_coeff == pytest.approx(2.115, abs=1e-6)


def test_calibration_rejects_bad_bracket():
    with pytest.raises(ValueError):
        calibrate_kinetic_coeff(LJ_H_NOBLE, 0.9, 0.0, bracket=(2.10, 2.12))


def test_grid_must_resolve_wavelength():
    grid = NumerovGrid(spacing=1.0, r_min=0.0, r_max=30.0)
    with pytest.raises(ValueError):
        numerov_integrate(FREE, NUCLEAR_MEV_FM, 4.0, 0, grid)


def test_energy_must_be_positive():
    with pytest.raises(ValueError):
        numerov_integrate(FREE, NUCLEAR_MEV_FM, -1.0)
