"""Unit systems and the two central potentials of the toolkit.

All radial quantities use a single length unit and a single energy unit;
time is measured in 1/energy (hbar = 1).  The kinetic coefficient is the
combination hbar^2/(2 mu) in energy * length^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "UnitSystem",
    "GaussianPotential",
    "LennardJonesPotential",
    "TabulatedPotential",
    "PotentialSpec",
    "evaluate_potential",
    "potential_range",
    "NUCLEAR_MEV_FM",
    "MOLECULAR_MEV_ANGSTROM",
    "GAUSS_1_2",
    "GAUSS_2_4",
    "LJ_H_NOBLE",
]


@dataclass(frozen=True)
class UnitSystem:
    """Length/energy labels plus the kinetic coefficient hbar^2/(2 mu)."""

    length_unit: str = "fm"
    energy_unit: str = "MeV"
    kinetic_coeff: float = 1.0

    def __post_init__(self):
        if not self.kinetic_coeff > 0:
            raise ValueError("kinetic_coeff must be positive")

    def energy_from_momentum(self, k: float) -> float:
        return self.kinetic_coeff * k * k

    def momentum_from_energy(self, energy) -> float:
        return np.sqrt(np.asarray(energy) / self.kinetic_coeff)


@dataclass(frozen=True)
class GaussianPotential:
    """Repulsive (or attractive) Gaussian bump V0 * exp(-r^2/sigma^2)."""

    v0: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class LennardJonesPotential:
    """12-6 Lennard-Jones with a flat core below r_core.

    The value for r <= r_core is frozen at V(r_core), which keeps the
    potential finite and continuous at the cutoff.
    """

    epsilon: float
    sigma: float
    r_core: float = field(default=0.0)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.r_core == 0.0:
            object.__setattr__(self, "r_core", 0.4 * self.sigma)
        if not self.r_core > 0:
            raise ValueError("r_core must be positive")


class TabulatedPotential:
    """Potential sampled on a radial grid; linear interpolation, zero beyond.

    Supports the harness's custom-potential input; below the first node the
    first value is held constant.
    """

    def __init__(self, r_nodes, values):
        self.r_nodes = np.asarray(r_nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.r_nodes.ndim != 1 or self.r_nodes.shape != self.values.shape:
            raise ValueError("r_nodes and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.r_nodes) <= 0) or self.r_nodes[0] < 0:
            raise ValueError("r_nodes must be strictly increasing and non-negative")

    def __eq__(self, other):
        return (isinstance(other, TabulatedPotential)
                and np.array_equal(self.r_nodes, other.r_nodes)
                and np.array_equal(self.values, other.values))


PotentialSpec = Union[GaussianPotential, LennardJonesPotential, TabulatedPotential]


def _lj_bare(spec: LennardJonesPotential, r):
    x6 = (spec.sigma / r) ** 6
    return 4.0 * spec.epsilon * (x6 * x6 - x6)


def evaluate_potential(spec: PotentialSpec, r):
    """Evaluate the potential at radius r (scalar or array), r >= 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    if isinstance(spec, GaussianPotential):
        out = spec.v0 * np.exp(-((r / spec.sigma) ** 2))
    elif isinstance(spec, LennardJonesPotential):
        core_value = _lj_bare(spec, spec.r_core)
        out = np.where(r > spec.r_core, _lj_bare(spec, np.maximum(r, spec.r_core)), core_value)
    elif isinstance(spec, TabulatedPotential):
        out = np.interp(r, spec.r_nodes, spec.values, left=spec.values[0], right=0.0)
    else:
        raise TypeError(f"unknown potential spec {type(spec).__name__}")
    return out if out.ndim else float(out)


def potential_range(spec: PotentialSpec, energy: float, rel_tol: float = 1e-6) -> float:
    """Smallest radius beyond which |V(r)| stays below rel_tol * energy.

    Uses the analytic tail envelope of each variant (Gaussian tail, or the
    attractive r^-6 tail for Lennard-Jones).
    """
    if not energy > 0:
        raise ValueError("energy must be positive")
    floor = rel_tol * energy
    if isinstance(spec, GaussianPotential):
        if abs(spec.v0) <= floor:
            return 0.0
        return spec.sigma * math.sqrt(math.log(abs(spec.v0) / floor))
    if isinstance(spec, LennardJonesPotential):
        # beyond the zero crossing |V| <= 4 eps (sigma/r)^6
        r = spec.sigma * (4.0 * spec.epsilon / floor) ** (1.0 / 6.0)
        return max(r, spec.sigma)
    if isinstance(spec, TabulatedPotential):
        above = np.abs(spec.values) > floor
        if not np.any(above):
            return 0.0
        return float(spec.r_nodes[np.nonzero(above)[0][-1]])
    raise TypeError(f"unknown potential spec {type(spec).__name__}")


# Standard unit systems.  The molecular kinetic coefficient is hbar^2/(2 mu)
# in meV A^2 for a hydrogen/noble-gas pair, calibrated against the reference
# Lennard-Jones phase shifts (see tepskit.numerov.calibrate_kinetic_coeff);
# it sits between the H-Ar (2.125) and H-Kr (2.098) reduced-mass values.
NUCLEAR_MEV_FM = UnitSystem("fm", "MeV", 1.0)
MOLECULAR_MEV_ANGSTROM = UnitSystem("angstrom", "meV", 2.115)

# Benchmark potentials used across the test suite and the experiment registry.
GAUSS_1_2 = GaussianPotential(v0=1.0, sigma=2.0)
GAUSS_2_4 = GaussianPotential(v0=2.0, sigma=4.0)
LJ_H_NOBLE = LennardJonesPotential(epsilon=5.9, sigma=3.57)
