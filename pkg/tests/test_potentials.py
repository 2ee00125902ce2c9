import math

import numpy as np
import pytest

from tepskit.potentials import (
    GAUSS_1_2,
    LJ_H_NOBLE,
    GaussianPotential,
    LennardJonesPotential,
    TabulatedPotential,
    UnitSystem,
    evaluate_potential,
    potential_range,
)


def test_gaussian_reference_points():
    assert evaluate_potential(GAUSS_1_2, 0.0) == pytest.approx(1.0)
    assert evaluate_potential(GAUSS_1_2, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_gaussian_monotone_decay():
    r = np.linspace(0.0, 30.0, 400)
    v = evaluate_potential(GAUSS_1_2, r)
    assert np.all(np.diff(v) < 0)
    assert v[-1] < 1e-12


def test_lennard_jones_zero_and_minimum():
    lj = LennardJonesPotential(epsilon=5.9, sigma=3.57)
    assert evaluate_potential(lj, lj.sigma) == pytest.approx(0.0, abs=1e-12)
    r_min = 2.0 ** (1.0 / 6.0) * lj.sigma
    assert evaluate_potential(lj, r_min) == pytest.approx(-lj.epsilon, rel=1e-12)
    # the minimum really is a minimum
    eps = 1e-4
    assert evaluate_potential(lj, r_min) < evaluate_potential(lj, r_min - eps)
    assert evaluate_potential(lj, r_min) < evaluate_potential(lj, r_min + eps)


def test_lennard_jones_flat_core():
    lj = LJ_H_NOBLE
    assert lj.r_core == pytest.approx(0.4 * lj.sigma)
    core = evaluate_potential(lj, lj.r_core)
    assert evaluate_potential(lj, 0.2 * lj.sigma) == core
    assert evaluate_potential(lj, 0.0) == core
    # continuity across the cutoff
    assert evaluate_potential(lj, lj.r_core + 1e-9) == pytest.approx(core, rel=1e-6)


def test_evaluate_is_pure_and_vectorized():
    r = np.linspace(0.0, 10.0, 57)
    first = evaluate_potential(GAUSS_1_2, r)
    second = evaluate_potential(GAUSS_1_2, r)
    assert np.array_equal(first, second)
    assert first.shape == r.shape
    assert isinstance(evaluate_potential(GAUSS_1_2, 1.0), float)


def test_tabulated_potential_interpolation():
    tab = TabulatedPotential([0.0, 1.0, 2.0], [-3.0, -3.0, 0.0])
    assert evaluate_potential(tab, 0.5) == pytest.approx(-3.0)
    assert evaluate_potential(tab, 1.5) == pytest.approx(-1.5)
    assert evaluate_potential(tab, 5.0) == 0.0


def test_validation_errors():
    with pytest.raises(ValueError):
        GaussianPotential(v0=1.0, sigma=-1.0)
    with pytest.raises(ValueError):
        LennardJonesPotential(epsilon=1.0, sigma=1.0, r_core=-0.1)
    with pytest.raises(ValueError):
        UnitSystem(kinetic_coeff=0.0)
    with pytest.raises(ValueError):
        evaluate_potential(GAUSS_1_2, -1.0)
    with pytest.raises(ValueError):
        TabulatedPotential([1.0, 0.5], [0.0, 0.0])


def test_potential_range_bounds_tail():
    energy = 2.0
    for pot in (GAUSS_1_2, LJ_H_NOBLE):
        r0 = potential_range(pot, energy, rel_tol=1e-6)
        r = np.linspace(r0, r0 + 50.0, 1000)
        assert np.all(np.abs(evaluate_potential(pot, r)) <= 1e-6 * energy * (1 + 1e-12))


def test_unit_system_momentum_energy_roundtrip():
    units = UnitSystem("fm", "MeV", 1.7)
    k = 1.23
    assert units.momentum_from_energy(units.energy_from_momentum(k)) == pytest.approx(k, rel=1e-14)
