"""Phase-shift extraction: overlap plateaus, variational scans, cos^2 fits.

The plateau route gives |delta| from P = c_L^2 cos^2(delta); the
variational route scans a fictitious detector phase delta_v and reads the
signed shift off the maximum of P(delta_v) = b0 cos^2(delta_v - delta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from ._util import wrap_half_pi
from .basis import Basis, BesselBasis, LatticeBasis, bessel_table
from .errors import NormalizationError, NormalizationWarning, PeakSearchError
from .waves import (
    DEFAULT_WALL_MARGIN,
    DetectorSpec,
    WaveState,
    detector_window,
    prepare_detector,
)

__all__ = [
    "PhaseSeries",
    "ScanResult",
    "FitResult",
    "overlap_probability",
    "teps_phase",
    "plateau_onset",
    "detect_plateau",
    "average_plateau",
    "detector_bank",
    "vteps_scan",
    "vteps_scan_states",
    "fit_cos2",
    "cross_section_partial",
    "peak_shift_phase",
]

# Overlap ratios sqrt(P)/c_L in (1, 1 + CLAMP_TOL] are clamped with a
# warning; anything larger means the normalizations are inconsistent.
CLAMP_TOL = 5e-2

DEFAULT_PLATEAU_WINDOW = 8
DEFAULT_PLATEAU_VAR_TOL = 0.02**2


@dataclass
class PhaseSeries:
    """Overlap probabilities and extracted phases on a time grid.

    `delta` holds |delta| for plateau runs (arccos branch, [0, pi/2]) and
    the signed maximizer for variational runs ((-pi/2, pi/2]).
    """

    times: np.ndarray
    probabilities: np.ndarray
    delta: np.ndarray
    plateau: Optional[tuple[float, float]] = None


@dataclass
class ScanResult:
    """Overlap probability sampled on a detector-phase grid."""

    delta_grid: np.ndarray
    probabilities: np.ndarray
    shots: Optional[int] = None

    def argmax_phase(self) -> float:
        return float(self.delta_grid[int(np.argmax(self.probabilities))])


@dataclass
class FitResult:
    """Parameters of P(delta_v) = A cos^2(delta_v + B) + C.

    The maximizer delta_star = -B (mod pi) is mapped to (-pi/2, pi/2];
    sigma fields are 1-sigma uncertainties from the fit Jacobian.
    """

    amplitude: float
    phase: float
    offset: float
    sigma_amplitude: float
    sigma_phase: float
    sigma_offset: float
    covariance: np.ndarray
    residual: float
    degenerate: bool
    delta_star: Optional[float]
    sigma_delta: Optional[float]


def overlap_probability(detector: WaveState, psi: WaveState) -> float:
    """|<detector|psi>|^2 (S-weighted inner product off the lattice)."""
    return float(abs(detector.inner(psi)) ** 2)


def teps_phase(probability: float, c_l: float) -> float:
    """|delta| = arccos(sqrt(P)/c_L), clamped near 1 with a warning."""
    if not c_l > 0:
        raise ValueError("c_l must be positive")
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    ratio = math.sqrt(probability) / c_l
    if ratio > 1.0 + CLAMP_TOL:
        raise NormalizationError(
            f"sqrt(P)/c_L = {ratio:.4f} exceeds 1 by more than {CLAMP_TOL}; "
            "initial/detector normalizations are inconsistent")
    if ratio > 1.0:
        warnings.warn(f"sqrt(P)/c_L = {ratio:.6f} clamped to 1", NormalizationWarning)
        ratio = 1.0
    return math.acos(ratio)


def plateau_onset(k_in: float, r0: float, r1: float, r2: float) -> float:
    """Empirical plateau start: free passing time from r0 via the origin to
    the detector midpoint r_d = (r1 + r2)/2."""
    if min(r0, r1, r2) < 0 or not k_in > 0:
        raise ValueError("lengths must be non-negative and k_in positive")
    return (r0 + 0.5 * (r1 + r2)) / k_in


def detect_plateau(series: PhaseSeries, window: int = DEFAULT_PLATEAU_WINDOW,
                   var_tol: float = DEFAULT_PLATEAU_VAR_TOL,
                   t_min: float = 0.0) -> Optional[tuple[float, float]]:
    """Longest contiguous interval with sliding-window variance <= var_tol,
    starting no earlier than t_min.  None when nothing qualifies."""
    t, d = np.asarray(series.times), np.asarray(series.delta)
    if len(t) < window:
        raise ValueError(f"need at least {window} points")
    n_win = len(t) - window + 1
    ok = np.empty(n_win, dtype=bool)
    for i in range(n_win):
        ok[i] = (t[i] >= t_min) and (np.var(d[i:i + window]) <= var_tol)
    best = None
    i = 0
    while i < n_win:
        if ok[i]:
            j = i
            while j + 1 < n_win and ok[j + 1]:
                j += 1
            span = (float(t[i]), float(t[j + window - 1]))
            if best is None or span[1] - span[0] > best[1] - best[0]:
                best = span
            i = j + 1
        else:
            i += 1
    series.plateau = best
    return best


def average_plateau(series: PhaseSeries, interval: tuple[float, float]) -> tuple[float, float]:
    """Mean and standard deviation of the extracted phase over the interval."""
    t = np.asarray(series.times)
    mask = (t >= interval[0]) & (t <= interval[1])
    if not np.any(mask):
        raise ValueError("interval contains no series points")
    values = np.asarray(series.delta)[mask]
    return float(np.mean(values)), float(np.std(values))


def detector_bank(basis: Basis, k_in: float, ell: int, window: tuple[int, int],
                  delta_grid: Sequence[float], *, interaction_radius: float = 0.0,
                  wall_margin: float | None = None,
                  ) -> tuple[list[DetectorSpec], np.ndarray]:
    """Detector states for every scan phase, stacked as matrix rows.

    Rows are ready for a single mat-vec against state coefficient vectors;
    in the spherical-wave basis the overlap metric is already folded in.
    """
    margin = DEFAULT_WALL_MARGIN if wall_margin is None else wall_margin
    n_i, n_f = window
    specs, rows = [], []
    for dv in delta_grid:
        spec = detector_window(k_in, n_i, n_f, delta_v=float(dv), ell=ell)
        state = prepare_detector(basis, spec, interaction_radius=interaction_radius,
                                 wall_margin=margin)
        specs.append(spec)
        rows.append(state.coeffs)
    bank = np.asarray(rows)
    if isinstance(basis, BesselBasis):
        bank = bank @ bessel_table(basis, ell).overlap
    return specs, bank


def vteps_scan_states(states: Sequence[WaveState], k_in: float, ell: int,
                      window: tuple[int, int], delta_grid: Sequence[float], *,
                      interaction_radius: float = 0.0,
                      wall_margin: float | None = None) -> np.ndarray:
    """P(delta_v) for many states at once; rows follow the input states."""
    basis = states[0].basis
    _, bank = detector_bank(basis, k_in, ell, window, delta_grid,
                            interaction_radius=interaction_radius,
                            wall_margin=wall_margin)
    coeff_matrix = np.stack([s.coeffs for s in states], axis=1)
    return np.abs(bank.conj() @ coeff_matrix).T ** 2


def vteps_scan(psi_t: WaveState, k_in: float, ell: int, window: tuple[int, int],
               delta_grid: Sequence[float], shots: Optional[int] = None,
               seed: Optional[int] = None, *, interaction_radius: float = 0.0,
               wall_margin: float | None = None) -> ScanResult:
    """Overlap probability versus detector phase at one evolved state.

    Each grid point rebuilds the detector with its shifted window; with
    `shots`, probabilities are replaced by binomial sample means (seeded).
    """
    grid = np.asarray(delta_grid, dtype=float)
    if np.ptp(grid) < math.pi * (1.0 - 1e-9):
        raise ValueError("scan grid must span at least one pi period")
    probs = vteps_scan_states([psi_t], k_in, ell, window, grid,
                              interaction_radius=interaction_radius,
                              wall_margin=wall_margin)[0]
    probs = np.clip(probs, 0.0, 1.0)
    if shots is not None:
        rng = np.random.default_rng(seed)
        probs = rng.binomial(shots, probs) / shots
    return ScanResult(delta_grid=grid, probabilities=probs, shots=shots)


def _cos2_model(delta_v, amplitude, phase, offset):
    return amplitude * np.cos(delta_v + phase) ** 2 + offset


def fit_cos2(scan: ScanResult, with_offset: bool = False) -> FitResult:
    """Nonlinear least squares of A cos^2(delta_v + B) [+ C].

    The initial guess comes from the discrete second-harmonic Fourier
    component; fits with A consistent with zero are flagged degenerate and
    carry no maximizer.
    """
    grid, probs = scan.delta_grid, scan.probabilities
    if len(grid) < 5:
        raise ValueError("need at least five scan points")
    if np.ptp(grid) < math.pi / 2 * (1.0 - 1e-9):
        raise ValueError("scan must span at least half a period")

    z = 4.0 * np.mean(probs * np.exp(-2j * grid))
    a0 = abs(z)
    b0 = 0.5 * np.angle(z)
    c0 = max(float(np.mean(probs) - 0.5 * a0), 0.0)

    sigma = None
    if scan.shots:
        sigma = np.sqrt(np.maximum(probs * (1.0 - probs), 0.5 / scan.shots) / scan.shots)

    if with_offset:
        model, p0 = _cos2_model, [a0, b0, c0]
    else:
        model, p0 = (lambda dv, a, b: _cos2_model(dv, a, b, 0.0)), [a0, b0]
    try:
        popt, pcov = curve_fit(model, grid, probs, p0=p0, sigma=sigma,
                               absolute_sigma=sigma is not None, maxfev=20000)
    except RuntimeError:
        nan = float("nan")
        return FitResult(nan, nan, 0.0, nan, nan, nan, np.full((3, 3), np.nan),
                         nan, True, None, None)

    perr = np.sqrt(np.diag(pcov))
    amplitude, phase = float(popt[0]), float(popt[1])
    offset = float(popt[2]) if with_offset else 0.0
    sig_a, sig_b = float(perr[0]), float(perr[1])
    sig_c = float(perr[2]) if with_offset else 0.0
    if amplitude < 0.0:
        # A cos^2(x+B) + C == -A cos^2(x+B+pi/2) + (C+A): canonicalize to A > 0
        offset += amplitude
        amplitude = -amplitude
        phase += 0.5 * math.pi
    phase = wrap_half_pi(phase)
    residual = float(np.sqrt(np.mean((model(grid, *popt) - probs) ** 2)))
    degenerate = not np.isfinite(sig_a) or amplitude <= 2.0 * sig_a
    delta_star = None if degenerate else wrap_half_pi(-phase)
    sigma_delta = None if degenerate else sig_b
    return FitResult(amplitude=amplitude, phase=phase, offset=offset,
                     sigma_amplitude=sig_a, sigma_phase=sig_b, sigma_offset=sig_c,
                     covariance=pcov, residual=residual, degenerate=degenerate,
                     delta_star=delta_star, sigma_delta=sigma_delta)


def cross_section_partial(delta: float, k_in: float, ell: int = 0) -> float:
    """Single-partial-wave cross section 4 pi (2L+1) sin^2(delta)/k^2."""
    if not k_in > 0:
        raise ValueError("k_in must be positive")
    return 4.0 * math.pi * (2 * ell + 1) * math.sin(delta) ** 2 / k_in**2


def _local_maxima(r: np.ndarray, amp: np.ndarray, min_frac: float) -> np.ndarray:
    floor = min_frac * np.max(amp)
    idx = np.nonzero((amp[1:-1] > amp[:-2]) & (amp[1:-1] >= amp[2:])
                     & (amp[1:-1] > floor))[0] + 1
    return r[idx]


def peak_shift_phase(psi_t: WaveState, free_wave: WaveState, k_in: float,
                     region: tuple[float, float],
                     min_height_frac: float = 0.2) -> tuple[np.ndarray, float]:
    """Per-peak phase estimates k (r_free - r_full), principal branch.

    Successive |psi| maxima of the evolved and free states inside the
    asymptotic region are paired by order; the common uncertainty is half a
    grid spacing, k a / 2.  Peak spacings are half-wavelengths, so any
    constant pairing offset drops out modulo pi.
    """
    if psi_t.basis != free_wave.basis or not isinstance(psi_t.basis, LatticeBasis):
        raise ValueError("need two states on the same lattice")
    r, full = psi_t.position_profile()
    _, free = free_wave.position_profile()
    mask = (r >= region[0]) & (r <= region[1])
    peaks_full = _local_maxima(r[mask], np.abs(full[mask]), min_height_frac)
    peaks_free = _local_maxima(r[mask], np.abs(free[mask]), min_height_frac)
    n = min(len(peaks_full), len(peaks_free))
    if n < 2:
        raise PeakSearchError("fewer than two usable peaks in the region")
    deltas = wrap_half_pi(k_in * (peaks_free[:n] - peaks_full[:n]))
    return deltas, 0.5 * k_in * psi_t.basis.spacing
