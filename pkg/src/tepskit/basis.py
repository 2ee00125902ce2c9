"""Radial bases, Hamiltonian builders, and spectral decompositions.

Two bases are supported: a uniform radial lattice with Dirichlet walls
(tridiagonal Hamiltonian) and a finite set of free spherical waves, two
per momentum (first and second kind), turned into a dense generalized
eigenproblem by quadrature.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal, solve
from scipy.special import erf, spherical_jn, spherical_yn

from ._util import simpson_weights
from .errors import ConditioningError
from .potentials import PotentialSpec, UnitSystem, evaluate_potential

__all__ = [
    "LatticeBasis",
    "BesselBasis",
    "Basis",
    "HamiltonianMatrix",
    "SpectralDecomposition",
    "build_lattice_hamiltonian",
    "build_bessel_hamiltonian",
    "decompose",
    "nearest_kinetic_momentum",
    "bessel_table",
]

# Relative eigenvalue floor below which the overlap matrix is considered
# linearly dependent.
OVERLAP_CONDITION_FLOOR = 1e-10


@dataclass(frozen=True)
class LatticeBasis:
    """Uniform radial grid r_m = (m+1) a, m = 0..points-1.

    The wavefunction is implicitly zero at r = 0 and at r = (points+1) a,
    so no node sits on the centrifugal singularity.
    """

    spacing: float
    points: int

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.points < 2:
            raise ValueError("need at least two lattice points")

    @property
    def r_max(self) -> float:
        return self.points * self.spacing

    @property
    def size(self) -> int:
        return self.points

    def nodes(self) -> np.ndarray:
        return self.spacing * (1.0 + np.arange(self.points))

    def kinetic_momentum(self, n: int, units: UnitSystem) -> float:
        """Momentum equivalent sqrt(E_n/coeff) of the n-th kinetic eigenvalue."""
        theta = n * math.pi / (self.points + 1)
        return 2.0 / self.spacing * math.sin(0.5 * theta)

    def grid_momentum(self, k: float) -> float:
        """Spatial momentum whose lattice kinetic energy matches coeff k^2.

        Waves on the lattice at energy coeff k^2 oscillate as sin(k~ r_m)
        with (2 - 2 cos(k~ a))/a^2 = k^2; initial/detector patterns must use
        k~ or they dephase against the evolved wave across the box.
        """
        half = 0.5 * k * self.spacing
        if not 0.0 < half < 1.0:
            raise ValueError("momentum outside the lattice band")
        return math.acos(1.0 - 2.0 * half * half) / self.spacing

    def kinetic_eigenvalue(self, n: int, units: UnitSystem) -> float:
        theta = n * math.pi / (self.points + 1)
        return units.kinetic_coeff * (2.0 - 2.0 * math.cos(theta)) / self.spacing**2


@dataclass(frozen=True)
class BesselBasis:
    """Free spherical waves r j_L(k_i r) and r y_L(k_i r) on [0, r_max].

    Momenta are k_i = k0 + i dk for i = 0..n_k-1, two member functions per
    momentum (basis size 2 n_k).  Second-kind members are multiplied by a
    one-sided erf step so they vanish at the origin; the defaults place the
    step at reg_r = 0.05 r_max with width reg_r/4 (reliable for s-waves,
    the only case exercised quantitatively).
    """

    k0: float
    dk: float
    n_k: int
    r_max: float
    reg_r: float = 0.0
    reg_width: float = 0.0
    quad_intervals: int = 2**15

    def __post_init__(self):
        if not (self.k0 > 0 and self.dk > 0 and self.n_k >= 1 and self.r_max > 0):
            raise ValueError("need k0, dk, r_max > 0 and n_k >= 1")
        if self.quad_intervals % 2 or self.quad_intervals < 8:
            raise ValueError("quad_intervals must be even and >= 8")
        if self.reg_r == 0.0:
            object.__setattr__(self, "reg_r", 0.05 * self.r_max)
        if self.reg_width == 0.0:
            object.__setattr__(self, "reg_width", 0.25 * self.reg_r)

    @property
    def size(self) -> int:
        return 2 * self.n_k

    def momenta(self) -> np.ndarray:
        return self.k0 + self.dk * np.arange(self.n_k)

    @classmethod
    def for_box(cls, k0: float, n_k: int, r_max: float, **kw) -> "BesselBasis":
        """Default momentum spacing dk = 2 pi / r_max."""
        return cls(k0=k0, dk=2.0 * math.pi / r_max, n_k=n_k, r_max=r_max, **kw)


Basis = Union[LatticeBasis, BesselBasis]


@dataclass(frozen=True)
class BesselTable:
    """Sampled basis functions on the quadrature grid (fixed L)."""

    r: np.ndarray          # quadrature nodes
    weights: np.ndarray    # Simpson weights
    phi: np.ndarray        # (size, n_nodes) normalized member functions
    t_phi: np.ndarray      # kinetic action applied to each member / coeff
    overlap: np.ndarray    # S_ij

    def project(self, target: np.ndarray) -> np.ndarray:
        """Expansion coefficients of a sampled radial function."""
        b = self.phi @ (self.weights * target)
        return solve(self.overlap, b, assume_a="pos")

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.phi


@functools.lru_cache(maxsize=8)
def bessel_table(basis: BesselBasis, ell: int) -> BesselTable:
    """Sample (and cache) the regularized member functions for one L."""
    n = basis.quad_intervals
    r = np.linspace(0.0, basis.r_max, n + 1)
    w = simpson_weights(n + 1, r[1] - r[0])
    ks = basis.momenta()

    # one-sided erf step and its derivatives
    x = (r - basis.reg_r) / basis.reg_width
    g = 0.5 * (1.0 + erf(x))
    gp = np.exp(-(x**2)) / (basis.reg_width * math.sqrt(math.pi))
    gpp = -2.0 * x / basis.reg_width * gp

    size = 2 * basis.n_k
    phi = np.empty((size, r.size))
    t_phi = np.empty_like(phi)
    rs = r.copy()
    rs[0] = 1.0  # dummy, value at r = 0 fixed below
    for i, k in enumerate(ks):
        kr = k * rs
        u = rs * spherical_jn(ell, kr)
        u[0] = 0.0
        phi[2 * i] = u
        t_phi[2 * i] = k * k * u  # free waves are kinetic eigenfunctions

        y = spherical_yn(ell, kr)
        yp = spherical_yn(ell, kr, derivative=True)
        v = rs * y
        vp = y + kr * yp
        v[0] = vp[0] = 0.0
        phi[2 * i + 1] = g * v
        # T(g v) = k^2 (g v) - (g'' v + 2 g' v'), everything in units of coeff
        t_phi[2 * i + 1] = k * k * g * v - (gpp * v + 2.0 * gp * vp)
        phi[2 * i + 1][0] = t_phi[2 * i + 1][0] = 0.0

    norms = np.sqrt(np.einsum("in,n,in->i", phi, w, phi))
    phi /= norms[:, None]
    t_phi /= norms[:, None]
    overlap = np.einsum("in,n,jn->ij", phi, w, phi)
    overlap = 0.5 * (overlap + overlap.T)
    return BesselTable(r=r, weights=w, phi=phi, t_phi=t_phi, overlap=overlap)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Radial Hamiltonian in one of the bases.

    Lattice Hamiltonians are stored as (diagonal, off-diagonal); the dense
    field is populated only for the spherical-wave case, together with its
    overlap matrix.
    """

    basis: Basis
    ell: int
    units: UnitSystem
    diagonal: Optional[np.ndarray] = None
    off_diagonal: Optional[np.ndarray] = None
    dense: Optional[np.ndarray] = None
    overlap: Optional[np.ndarray] = None

    @property
    def is_tridiagonal(self) -> bool:
        return self.diagonal is not None

    @property
    def size(self) -> int:
        return len(self.diagonal) if self.is_tridiagonal else self.dense.shape[0]

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        if self.is_tridiagonal:
            out = self.diagonal * vec
            out[:-1] += self.off_diagonal * vec[1:]
            out[1:] += self.off_diagonal * vec[:-1]
            return out
        return self.dense @ vec

    def to_dense(self) -> np.ndarray:
        if not self.is_tridiagonal:
            return self.dense
        h = np.diag(self.diagonal)
        idx = np.arange(self.size - 1)
        h[idx, idx + 1] = self.off_diagonal
        h[idx + 1, idx] = self.off_diagonal
        return h


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of H psi = E S psi, eigenvalues ascending, S-orthonormal."""

    energies: np.ndarray
    vectors: np.ndarray            # columns are eigenvectors
    basis: Basis
    ell: int
    units: UnitSystem
    overlap: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.energies)

    def to_eigenbasis(self, coeffs: np.ndarray) -> np.ndarray:
        """Amplitudes on the eigenvectors (uses the S metric when present)."""
        if self.overlap is None:
            return self.vectors.T @ coeffs
        return self.vectors.T @ (self.overlap @ coeffs)

    def from_eigenbasis(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.vectors @ amplitudes


def build_lattice_hamiltonian(basis: LatticeBasis, pot: PotentialSpec,
                              units: UnitSystem, ell: int = 0) -> HamiltonianMatrix:
    """Second-order central-difference Hamiltonian with Dirichlet walls."""
    if ell < 0:
        raise ValueError("ell must be non-negative")
    r = basis.nodes()
    coeff = units.kinetic_coeff
    diag = 2.0 * coeff / basis.spacing**2 + evaluate_potential(pot, r)
    if ell > 0:
        if np.any(r == 0.0):
            raise ValueError("centrifugal term undefined on a node at r = 0")
        diag = diag + coeff * ell * (ell + 1) / r**2
    off = np.full(basis.points - 1, -coeff / basis.spacing**2)
    return HamiltonianMatrix(basis=basis, ell=ell, units=units,
                             diagonal=diag, off_diagonal=off)


def build_bessel_hamiltonian(basis: BesselBasis, pot: PotentialSpec,
                             units: UnitSystem, ell: int = 0) -> HamiltonianMatrix:
    """Dense H_ij = <phi_i|T+V|phi_j> and overlap S_ij by composite quadrature.

    The kinetic action on each free wave is k_i^2 plus the exact correction
    from the origin regularizer; the residual asymmetry (a boundary flux at
    r_max, relative ~1e-4) is removed by symmetrizing.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    table = bessel_table(basis, ell)
    s_eigs = np.linalg.eigvalsh(table.overlap)
    if s_eigs[0] < OVERLAP_CONDITION_FLOOR * s_eigs[-1]:
        raise ConditioningError(
            f"overlap matrix condition {s_eigs[-1] / s_eigs[0]:.2e} exceeds the "
            f"floor; the member functions are (numerically) linearly dependent")
    v = evaluate_potential(pot, table.r)
    kinetic = np.einsum("in,n,jn->ij", table.phi, table.weights, table.t_phi)
    kinetic *= units.kinetic_coeff
    potential = np.einsum("in,n,jn->ij", table.phi, table.weights * v, table.phi)
    h = 0.5 * (kinetic + kinetic.T) + 0.5 * (potential + potential.T)
    return HamiltonianMatrix(basis=basis, ell=ell, units=units,
                             dense=h, overlap=table.overlap.copy())


def decompose(ham: HamiltonianMatrix) -> SpectralDecomposition:
    """Full (generalized) spectral decomposition, eigenvalues ascending."""
    if ham.is_tridiagonal:
        energies, vectors = eigh_tridiagonal(ham.diagonal, ham.off_diagonal)
        return SpectralDecomposition(energies=energies, vectors=vectors,
                                     basis=ham.basis, ell=ham.ell, units=ham.units)
    if ham.overlap is None:
        energies, vectors = eigh(ham.dense)
        return SpectralDecomposition(energies=energies, vectors=vectors,
                                     basis=ham.basis, ell=ham.ell, units=ham.units)
    # symmetric (Loewdin) orthogonalization of S
    s, u = eigh(ham.overlap)
    if s[0] < OVERLAP_CONDITION_FLOOR * s[-1]:
        raise ConditioningError("overlap matrix below the conditioning floor")
    x = (u / np.sqrt(s)) @ u.T
    a = x @ ham.dense @ x
    energies, c = eigh(0.5 * (a + a.T))
    return SpectralDecomposition(energies=energies, vectors=x @ c,
                                 basis=ham.basis, ell=ham.ell, units=ham.units,
                                 overlap=ham.overlap)


def nearest_kinetic_momentum(basis: Basis, units: UnitSystem, k_request: float) -> float:
    """Kinetic-operator eigen-momentum closest to the requested one.

    Lattice: k_n = sqrt(E_n / coeff) for the V=0 spectrum (closed form).
    Spherical-wave basis: nearest member momentum.
    """
    if not k_request > 0:
        raise ValueError("k_request must be positive")
    if isinstance(basis, BesselBasis):
        ks = basis.momenta()
        return float(ks[np.argmin(np.abs(ks - k_request))])
    half = 0.5 * k_request * basis.spacing
    if half >= 1.0:
        n_guess = basis.points
    else:
        theta = 2.0 * math.asin(half)
        n_guess = int(round(theta * (basis.points + 1) / math.pi))
    best = None
    for n in (n_guess - 1, n_guess, n_guess + 1):
        if 1 <= n <= basis.points:
            k_n = basis.kinetic_momentum(n, units)
            if best is None or abs(k_n - k_request) < abs(best - k_request):
                best = k_n
    return best
