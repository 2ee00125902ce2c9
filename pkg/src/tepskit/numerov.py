"""Ground-truth radial integrator: Numerov recurrence plus asymptotic matching.

This module is deliberately independent of the time-evolution machinery so
it can serve as the oracle the rest of the toolkit is verified against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import spherical_jn, spherical_yn

from ._util import wrap_half_pi
from .potentials import (
    LennardJonesPotential,
    PotentialSpec,
    UnitSystem,
    evaluate_potential,
    potential_range,
)

__all__ = [
    "NumerovGrid",
    "NumerovRun",
    "default_grid",
    "numerov_integrate",
    "phase_from_matching",
    "phase_shift",
    "calibrate_kinetic_coeff",
]

# |V(r)| < ASYMPTOTIC_RTOL * E defines the asymptotic (matching) region.
ASYMPTOTIC_RTOL = 1e-10

# Rescale the outward solution whenever it outgrows this magnitude; the
# classically forbidden Lennard-Jones core amplifies u by hundreds of
# orders of magnitude otherwise.
_RESCALE_LIMIT = 1e200


@dataclass(frozen=True)
class NumerovGrid:
    spacing: float
    r_min: float
    r_max: float

    def __post_init__(self):
        if not (self.spacing > 0 and self.r_max > self.r_min >= 0):
            raise ValueError("need spacing > 0 and r_max > r_min >= 0")

    @property
    def n_points(self) -> int:
        return int(round((self.r_max - self.r_min) / self.spacing)) + 1

    def nodes(self) -> np.ndarray:
        return self.r_min + self.spacing * np.arange(self.n_points)


@dataclass
class NumerovRun:
    """Outward-integrated reduced radial solution u(r) at one energy."""

    grid: NumerovGrid
    energy: float
    ell: int
    k: float
    r: np.ndarray
    u: np.ndarray
    r_asym: float
    rescale_count: int


def default_grid(pot: PotentialSpec, units: UnitSystem, energy: float, ell: int = 0) -> NumerovGrid:
    """Pick a uniform grid that resolves both the local wavelength and the core.

    The step is capped at lambda/200 in the allowed region and at
    0.25/kappa in the classically forbidden core (kappa the largest local
    decay constant), so the recurrence stays fourth-order accurate.
    """
    k = units.momentum_from_energy(energy)
    lam = 2.0 * math.pi / k
    r_asym = potential_range(pot, energy, rel_tol=ASYMPTOTIC_RTOL)
    r_min = 0.1 * pot.sigma if isinstance(pot, LennardJonesPotential) else 0.0
    r_max = r_asym + 2.5 * lam
    h = lam / 200.0
    probe = np.linspace(max(r_min, 1e-12), r_max, 4001)
    w_min = float(np.min(energy - evaluate_potential(pot, probe)))
    if w_min < 0.0:
        kappa = math.sqrt(-w_min / units.kinetic_coeff)
        h = min(h, 0.25 / kappa)
    n_steps = int(math.ceil((r_max - r_min) / h))
    return NumerovGrid(spacing=(r_max - r_min) / n_steps, r_min=r_min, r_max=r_max)


def numerov_integrate(
    pot: PotentialSpec,
    units: UnitSystem,
    energy: float,
    ell: int = 0,
    grid: NumerovGrid | None = None,
) -> NumerovRun:
    """Integrate u'' = -w(r) u outward with u(r_min) = 0, u(r_min + a) = a.

    w = (E - V - centrifugal)/kinetic_coeff.  The overall scale of u is
    arbitrary; overflow in the forbidden core is handled by renormalizing
    the history (count recorded on the run).
    """
    if not energy > 0:
        raise ValueError("energy must be positive")
    if ell < 0:
        raise ValueError("ell must be non-negative")
    k = units.momentum_from_energy(energy)
    if grid is None:
        grid = default_grid(pot, units, energy, ell)
    if grid.spacing > 2.0 * math.pi / k / 20.0:
        raise ValueError("grid does not resolve the wavelength (need >= 20 points per period)")

    r = grid.nodes()
    r_safe = np.where(r > 0, r, np.inf)
    w = (energy - evaluate_potential(pot, r)
         - units.kinetic_coeff * ell * (ell + 1) / r_safe**2) / units.kinetic_coeff
    h2 = grid.spacing**2
    # coefficients of the three-term recurrence for u'' = f u with f = -w;
    # the loop runs on plain floats (numpy scalar indexing is ~4x slower)
    c = (1.0 + h2 * w / 12.0).tolist()
    u = [0.0] * len(r)
    u[1] = grid.spacing
    rescales = 0
    u_prev, u_cur = 0.0, grid.spacing
    for i in range(1, len(r) - 1):
        u_next = ((12.0 - 10.0 * c[i]) * u_cur - c[i - 1] * u_prev) / c[i + 1]
        if abs(u_next) > _RESCALE_LIMIT:
            inv = 1.0 / _RESCALE_LIMIT
            for j in range(i + 1):
                u[j] *= inv
            u_cur *= inv
            u_next *= inv
            rescales += 1
        u[i + 1] = u_next
        u_prev, u_cur = u_cur, u_next
    u = np.asarray(u)
    r_asym = potential_range(pot, energy, rel_tol=ASYMPTOTIC_RTOL)
    return NumerovRun(grid=grid, energy=energy, ell=ell, k=k, r=r, u=u,
                      r_asym=r_asym, rescale_count=rescales)


def phase_from_matching(run: NumerovRun, k: float | None = None,
                        r_a: float | None = None, r_b: float | None = None) -> float:
    """Phase shift (principal branch) from matching u at two asymptotic radii.

    With rho = u(r_a) r_b / (u(r_b) r_a),

        tan(delta) = (rho j_L(k r_b) - j_L(k r_a)) / (rho y_L(k r_b) - y_L(k r_a)).

    A nearly vanishing denominator triggers a quarter-wavelength shift of
    r_b (up to four retries).
    """
    if k is None:
        k = run.k
    lam = 2.0 * math.pi / k
    if r_a is None:
        r_a = max(run.r_asym, 0.125 * lam)
    if r_b is None:
        r_b = r_a + 0.25 * lam
    if not run.r[0] <= r_a < r_b:
        raise ValueError("match points must be ordered and inside the grid")

    def node(rx):
        i = int(round((rx - run.grid.r_min) / run.grid.spacing))
        if not 0 <= i < len(run.r):
            raise ValueError(f"match radius {rx} outside the integration grid")
        return i

    ia = max(node(r_a), 1)
    for attempt in range(5):
        ib = node(r_b + attempt * 0.25 * lam)
        ra, rb = run.r[ia], run.r[ib]
        ua, ub = run.u[ia], run.u[ib]
        if ub == 0.0:
            continue
        rho = ua * rb / (ub * ra)
        ja, jb = spherical_jn(run.ell, k * ra), spherical_jn(run.ell, k * rb)
        ya, yb = spherical_yn(run.ell, k * ra), spherical_yn(run.ell, k * rb)
        num = rho * jb - ja
        den = rho * yb - ya
        scale = max(abs(rho * yb), abs(ya), 1e-300)
        if abs(den) > 1e-14 * scale:
            return wrap_half_pi(math.atan2(num, den))
    raise ArithmeticError("matching denominator vanished for all retry offsets")


def phase_shift(pot: PotentialSpec, units: UnitSystem, k: float, ell: int = 0,
                grid: NumerovGrid | None = None) -> float:
    """Convenience wrapper: integrate at E = coeff * k^2 and match."""
    run = numerov_integrate(pot, units, units.energy_from_momentum(k), ell, grid)
    return phase_from_matching(run)


def calibrate_kinetic_coeff(
    pot: PotentialSpec,
    k: float,
    target_delta: float,
    bracket: tuple[float, float],
    ell: int = 0,
    length_unit: str = "angstrom",
    energy_unit: str = "meV",
    xtol: float = 1e-10,
) -> UnitSystem:
    """Tune hbar^2/(2 mu) so the computed phase shift matches a reference value.

    Root-finds the principal-branch mismatch over the given coefficient
    bracket; raises if the bracket does not straddle a solution.
    """

    def mismatch(coeff):
        units = UnitSystem(length_unit, energy_unit, coeff)
        return wrap_half_pi(phase_shift(pot, units, k, ell) - target_delta)

    lo, hi = bracket
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"bracket {bracket} does not straddle the target phase shift "
                         f"(mismatch {f_lo:.4f} .. {f_hi:.4f})")
    coeff = brentq(mismatch, lo, hi, xtol=xtol)
    return UnitSystem(length_unit, energy_unit, coeff)
