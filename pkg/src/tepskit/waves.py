"""Filtered plane-wave initial states, detector states, and normalizations.

States are complex amplitude vectors over a basis: plain grid values on
the lattice, expansion coefficients (with the overlap-matrix metric) in
the spherical-wave basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import erf, spherical_jn

from .basis import Basis, BesselBasis, LatticeBasis, bessel_table
from .errors import DetectorWindowError, StatePreparationError

__all__ = [
    "FermiFilter",
    "ErfFilter",
    "FilterSpec",
    "filter_value",
    "WaveState",
    "DetectorSpec",
    "detector_window",
    "window_ints_near",
    "NormalizationSet",
    "prepare_initial",
    "prepare_detector",
    "normalizations",
    "free_wave_target",
]

# Detectors may not come closer to the outer wall than this fraction of the
# box, unless explicitly overridden (boundary reflections contaminate the
# overlap there).
DEFAULT_WALL_MARGIN = 0.2


@dataclass(frozen=True)
class FermiFilter:
    """Logistic step 1/(1 + exp(-(r - r0)/gamma))."""

    r0: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class ErfFilter:
    """Two-sided window (A/2)(erf((r-r1)/gamma) + erf((r2-r)/gamma))."""

    r1: float
    r2: float
    gamma: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.r1 < self.r2:
            raise ValueError("need r1 < r2")


FilterSpec = Union[FermiFilter, ErfFilter, None]


def filter_value(filt: FilterSpec, r):
    """Filter amplitude at radius r; None means no filtering (unity)."""
    r = np.asarray(r, dtype=float)
    if filt is None:
        out = np.ones_like(r)
    elif isinstance(filt, FermiFilter):
        out = 1.0 / (1.0 + np.exp(-(r - filt.r0) / filt.gamma))
    elif isinstance(filt, ErfFilter):
        out = 0.5 * filt.amplitude * (erf((r - filt.r1) / filt.gamma)
                                      + erf((filt.r2 - r) / filt.gamma))
    else:
        raise TypeError(f"unknown filter spec {type(filt).__name__}")
    return out if out.ndim else float(out)


@dataclass
class WaveState:
    """Complex amplitudes over a basis, with norm and provenance metadata."""

    coeffs: np.ndarray
    basis: Basis
    ell: int
    k_label: float
    norm: float = 1.0
    filt: FilterSpec = None

    def computed_norm(self) -> float:
        return math.sqrt(abs(self.inner(self)))

    def inner(self, other: "WaveState") -> complex:
        """S-weighted inner product <self|other>."""
        if self.basis != other.basis:
            raise ValueError("states live on different bases")
        if isinstance(self.basis, BesselBasis):
            s = bessel_table(self.basis, self.ell).overlap
            return complex(np.vdot(self.coeffs, s @ other.coeffs))
        return complex(np.vdot(self.coeffs, other.coeffs))

    def position_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """(r, psi(r)) samples: lattice nodes, or the quadrature grid."""
        if isinstance(self.basis, LatticeBasis):
            return self.basis.nodes(), self.coeffs
        table = bessel_table(self.basis, self.ell)
        return table.r, table.synthesize(self.coeffs)


@dataclass
class DetectorSpec:
    """Windowed free-wave detector: Box(r, r1, r2) sin(k r + L pi/2 + delta_v).

    The window endpoints satisfy r1 = (2 pi n_i + delta_v)/k_in and
    r2 = (2 pi n_f + delta_v)/k_in, so the window always spans n_d = n_f - n_i
    whole periods and the scan phase shifts the window with it.  c_dect is
    recorded by prepare_detector.
    """

    r1: float
    r2: float
    n_d: int
    delta_v: float
    ell: int
    k_in: float
    c_dect: Optional[float] = None

    def __post_init__(self):
        if not (self.k_in > 0 and 0 <= self.r1 < self.r2):
            raise ValueError("need k_in > 0 and 0 <= r1 < r2")


def detector_window(k_in: float, n_i: int, n_f: int, delta_v: float = 0.0,
                    ell: int = 0) -> DetectorSpec:
    """DetectorSpec from window integers (n_i, n_f) and the scan phase."""
    if not n_i < n_f:
        raise ValueError("need n_i < n_f")
    r1 = (2.0 * math.pi * n_i + delta_v) / k_in
    r2 = (2.0 * math.pi * n_f + delta_v) / k_in
    if r1 < 0:
        raise ValueError("window start is negative; increase n_i")
    return DetectorSpec(r1=r1, r2=r2, n_d=n_f - n_i, delta_v=delta_v,
                        ell=ell, k_in=k_in)


def window_ints_near(k_in: float, r1: float, width: float) -> tuple[int, int]:
    """(n_i, n_f) whose delta_v = 0 window best matches [r1, r1 + width]."""
    n_i = max(0, round(k_in * r1 / (2.0 * math.pi)))
    n_f = n_i + max(1, round(k_in * width / (2.0 * math.pi)))
    return n_i, n_f


@dataclass(frozen=True)
class NormalizationSet:
    """Continuum normalization integrals of the initial and detector targets.

    c_L = c_dect / c_init is the overlap amplitude between the normalized
    detector and the normalized (filtered) free wave; the plateau obeys
    P = c_L^2 cos^2(delta).
    """

    c_init: float
    c_dect: float
    c_L: float


def free_wave_target(r: np.ndarray, k: float, ell: int, delta: float = 0.0) -> np.ndarray:
    """Asymptotic free-wave pattern sin(k r + L pi/2 + delta)."""
    return np.sin(k * r + 0.5 * math.pi * ell + delta)


def _pattern_momentum(basis: Basis, k: float) -> float:
    """Momentum of the spatial oscillation that matches energy coeff k^2."""
    return basis.grid_momentum(k) if isinstance(basis, LatticeBasis) else k


def _initial_target(r: np.ndarray, k: float, ell: int, filt: FilterSpec) -> np.ndarray:
    return filter_value(filt, r) * (k * r) * spherical_jn(ell, k * r)


def prepare_initial(basis: Basis, k_in: float, ell: int, filt: FilterSpec) -> WaveState:
    """Filtered free wave f(r) (k r) j_L(k r), normalized on the basis.

    k_in should come from nearest_kinetic_momentum so the state is close to
    a kinetic eigenstate.  Raises if the filter annihilates the state.
    """
    if isinstance(basis, LatticeBasis):
        target = _initial_target(basis.nodes(), _pattern_momentum(basis, k_in), ell, filt)
        norm = float(np.linalg.norm(target))
        if norm < 1e-8:
            raise StatePreparationError("filter annihilated the initial state")
        return WaveState(coeffs=target.astype(complex) / norm, basis=basis,
                         ell=ell, k_label=k_in, filt=filt)
    table = bessel_table(basis, ell)
    coeffs = table.project(_initial_target(table.r, k_in, ell, filt))
    norm = math.sqrt(abs(coeffs @ table.overlap @ coeffs))
    if norm < 1e-8:
        raise StatePreparationError("filter annihilated the initial state")
    return WaveState(coeffs=coeffs.astype(complex) / norm, basis=basis,
                     ell=ell, k_label=k_in, filt=filt)


def prepare_detector(basis: Basis, spec: DetectorSpec, *,
                     interaction_radius: float = 0.0,
                     wall_margin: float = DEFAULT_WALL_MARGIN) -> WaveState:
    """Normalized windowed free wave; window endpoints snap to the grid.

    Guards: the window must stay outside interaction_radius (pass 0 to
    disable) and at least wall_margin * r_max away from the outer wall.
    """
    if spec.r1 < interaction_radius:
        raise DetectorWindowError(
            f"window start {spec.r1:.3f} inside the interaction region "
            f"(radius {interaction_radius:.3f})")
    r_wall = (1.0 - wall_margin) * basis.r_max
    if spec.r2 > r_wall:
        raise DetectorWindowError(
            f"window end {spec.r2:.3f} beyond the wall margin {r_wall:.3f}")

    k_pat = _pattern_momentum(basis, spec.k_in)
    if isinstance(basis, LatticeBasis):
        # snap endpoints to nodes; half-open so the sum covers whole periods
        r = basis.nodes()
        m1 = int(round(spec.r1 / basis.spacing)) - 1
        m2 = int(round(spec.r2 / basis.spacing)) - 1
        m1, m2 = max(m1, 0), min(m2, basis.points)
        target = np.zeros(basis.points)
        window = slice(m1, m2)
        target[window] = free_wave_target(r[window], k_pat, spec.ell, spec.delta_v)
        norm = float(np.linalg.norm(target))
        spec.c_dect = norm * math.sqrt(basis.spacing)
        return WaveState(coeffs=target.astype(complex) / norm, basis=basis,
                         ell=spec.ell, k_label=spec.k_in)

    table = bessel_table(basis, spec.ell)
    box = (table.r >= spec.r1) & (table.r <= spec.r2)
    target = np.where(box, free_wave_target(table.r, spec.k_in, spec.ell, spec.delta_v), 0.0)
    spec.c_dect = math.sqrt(float(np.sum(table.weights * target**2)))
    coeffs = table.project(target)
    norm = math.sqrt(abs(coeffs @ table.overlap @ coeffs))
    if norm < 1e-12:
        raise DetectorWindowError("detector projects to zero in this basis")
    return WaveState(coeffs=coeffs.astype(complex) / norm, basis=basis,
                     ell=spec.ell, k_label=spec.k_in)


def normalizations(initial: WaveState, detector: DetectorSpec) -> NormalizationSet:
    """Continuum integrals c_init, c_dect and the overlap amplitude c_L.

    Both integrals use the same free-wave target as the prepared states, so
    the ratio matches the paper-style r^2 j_L^2 definitions.
    """
    if initial.k_label != detector.k_in or initial.ell != detector.ell:
        raise ValueError("initial state and detector disagree on k or L")
    basis = initial.basis
    if isinstance(basis, LatticeBasis):
        r, h = basis.nodes(), basis.spacing
        weights = np.full(r.size, h)
    else:
        table = bessel_table(basis, initial.ell)
        r, weights = table.r, table.weights
    init_target = _initial_target(r, detector.k_in, detector.ell, initial.filt)
    c_init = math.sqrt(float(np.sum(weights * init_target**2)))
    box = (r >= detector.r1) & (r <= detector.r2)
    dect_target = np.where(box, free_wave_target(r, detector.k_in, detector.ell, 0.0), 0.0)
    c_dect = math.sqrt(float(np.sum(weights * dect_target**2)))
    return NormalizationSet(c_init=c_init, c_dect=c_dect, c_L=c_dect / c_init)
