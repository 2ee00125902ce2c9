"""Unitary real-time propagation: exact spectral or short-iterative Lanczos."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .basis import HamiltonianMatrix, SpectralDecomposition, decompose
from .errors import PropagationError
from .waves import WaveState

__all__ = ["PropagatorSpec", "evolve", "evolve_series", "energy_expectation"]

# Spectral propagation is the default up to this many lattice points;
# larger problems fall back to Lanczos stepping.
SPECTRAL_SIZE_LIMIT = 4096


@dataclass(frozen=True)
class PropagatorSpec:
    """How to apply exp(-i t H): t plus the method and its knobs."""

    t: float
    method: str = "auto"        # "auto" | "spectral" | "krylov"
    krylov_dim: int = 30
    krylov_tol: float = 1e-10
    max_substeps: int = 500_000

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be non-negative")
        if self.method not in ("auto", "spectral", "krylov"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.krylov_dim >= 4 and self.krylov_tol > 0):
            raise ValueError("need krylov_dim >= 4 and krylov_tol > 0")


Operator = Union[HamiltonianMatrix, SpectralDecomposition]


def _resolve_method(operator: Operator, spec: PropagatorSpec) -> str:
    if spec.method != "auto":
        return spec.method
    if isinstance(operator, SpectralDecomposition):
        return "spectral"
    if not operator.is_tridiagonal or operator.size <= SPECTRAL_SIZE_LIMIT:
        return "spectral"
    return "krylov"


def _spectral_state(decomp: SpectralDecomposition, amplitudes: np.ndarray,
                    t: float, template: WaveState) -> WaveState:
    coeffs = decomp.from_eigenbasis(np.exp(-1j * decomp.energies * t) * amplitudes)
    state = WaveState(coeffs=coeffs, basis=template.basis, ell=template.ell,
                      k_label=template.k_label, filt=template.filt)
    state.norm = state.computed_norm()
    return state


def _lanczos_step(ham: HamiltonianMatrix, v: np.ndarray, dt: float,
                  m: int) -> tuple[np.ndarray, float]:
    """One Krylov approximation of exp(-i dt H) v with an error estimate."""
    norm_v = np.linalg.norm(v)
    basis = [v / norm_v]
    alphas, betas = [], []
    w = ham.matvec(basis[0])
    a = np.vdot(basis[0], w).real
    w = w - a * basis[0]
    alphas.append(a)
    beta_next = 0.0
    for _ in range(1, m):
        beta = np.linalg.norm(w)
        if beta < 1e-14:
            beta_next = 0.0
            break
        q = w / beta
        w = ham.matvec(q) - beta * basis[-1]
        a = np.vdot(q, w).real
        w = w - a * q
        basis.append(q)
        alphas.append(a)
        betas.append(beta)
        beta_next = np.linalg.norm(w)
    evals, evecs = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))
    y = evecs @ (np.exp(-1j * evals * dt) * evecs[0])
    out = norm_v * (np.stack(basis, axis=1) @ y)
    err = beta_next * abs(y[-1]) * abs(dt) if len(basis) == m else 0.0
    return out, err


def _krylov_evolve(ham: HamiltonianMatrix, v: np.ndarray, t: float,
                   spec: PropagatorSpec) -> np.ndarray:
    if not ham.is_tridiagonal and ham.overlap is not None:
        raise PropagationError("Lanczos stepping needs an orthonormal basis; "
                               "use the spectral path for generalized problems")
    remaining = t
    dt = t
    budget = spec.max_substeps
    # error budget is spent proportionally to the sub-step length, so the
    # accumulated error over the whole interval stays below krylov_tol
    tol_total = spec.krylov_tol * np.linalg.norm(v)
    while remaining > 0:
        if budget <= 0:
            raise PropagationError(f"Krylov propagation did not converge within "
                                   f"{spec.max_substeps} substeps (t = {t})")
        budget -= 1
        step = min(dt, remaining)
        out, err = _lanczos_step(ham, v, step, spec.krylov_dim)
        allowed = tol_total * (step / t)
        if err > 0.5 * allowed:
            dt = 0.5 * step
            continue
        v = out
        remaining -= step
        if err < 0.05 * allowed:
            dt = min(2.0 * step, t)
    return v


def evolve(state: WaveState, operator: Operator, spec: PropagatorSpec) -> WaveState:
    """Apply exp(-i t H) to a state; unitary to the propagator tolerance."""
    method = _resolve_method(operator, spec)
    if method == "spectral":
        decomp = operator if isinstance(operator, SpectralDecomposition) else decompose(operator)
        amps = decomp.to_eigenbasis(state.coeffs)
        return _spectral_state(decomp, amps, spec.t, state)
    if isinstance(operator, SpectralDecomposition):
        raise PropagationError("Krylov stepping needs the Hamiltonian matrix")
    coeffs = _krylov_evolve(operator, state.coeffs.astype(complex), spec.t, spec)
    out = WaveState(coeffs=coeffs, basis=state.basis, ell=state.ell,
                    k_label=state.k_label, filt=state.filt)
    out.norm = out.computed_norm()
    return out


def evolve_series(state: WaveState, operator: Operator, times: Sequence[float],
                  spec: PropagatorSpec | None = None) -> list[WaveState]:
    """States at each time (ascending); the spectral path reuses one
    decomposition, the Krylov path steps incrementally between times."""
    times = list(times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be ascending")
    if spec is None:
        spec = PropagatorSpec(t=0.0)
    method = _resolve_method(operator, spec)
    if method == "spectral":
        decomp = operator if isinstance(operator, SpectralDecomposition) else decompose(operator)
        amps = decomp.to_eigenbasis(state.coeffs)
        return [_spectral_state(decomp, amps, t, state) for t in times]
    out = []
    current = state
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            current = evolve(current, operator, replace(spec, t=t - t_prev))
            t_prev = t
        out.append(current)
    return out


def energy_expectation(ham: HamiltonianMatrix, state: WaveState) -> float:
    """<psi|H|psi> for a normalized state (S-metric normalization)."""
    return float(np.vdot(state.coeffs, ham.matvec(state.coeffs)).real)
