"""Independent ground-truth propagators used by every acceptance check.

Nothing here shares code with the divided-difference or segment machinery:
time-ordered propagators are integrated with an adaptive high-order
Runge-Kutta method (DOP853), and the two-level oscillating model has an
exact rotating-frame closed form for frequencies an ODE cannot resolve in
reasonable time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .pham import PermExpHamiltonian

MAX_PIPELINE_QUBITS = 8


class StiffnessError(RuntimeError):
    """The integrator stalled (step underflow) or lost unitarity."""


@dataclass(frozen=True)
class PropagatorResult:
    U: np.ndarray
    est_error: float
    steps_taken: int


def hamiltonian_evaluator(h):
    """Return a fast t -> H(t) callable for a model or pass a callable through."""
    if callable(h) and not isinstance(h, PermExpHamiltonian):
        return h
    dim = h.dim
    z = np.arange(dim)
    diag_idx = (z, z)
    entries = []
    for term in h.vterms:
        rows = z ^ term.mask
        amps = np.stack([et.amp[rows] for et in term.exp_terms])
        rates = np.stack([et.rate[rows] for et in term.exp_terms])
        entries.append((rows, amps, rates))

    def evaluate(t: float) -> np.ndarray:
        mat = np.zeros((dim, dim), dtype=complex)
        mat[diag_idx] = h.h0_diag
        for rows, amps, rates in entries:
            mat[rows, z] += (amps * np.exp(rates * t)).sum(axis=0)
        return mat

    return evaluate


def _integrate(h_of_t, dim: int, t0: float, t1: float, tol: float) -> PropagatorResult:
    def rhs(t, y):
        u = y.reshape(dim, dim)
        return (-1j * (h_of_t(t) @ u)).reshape(-1)

    y0 = np.eye(dim, dtype=complex).reshape(-1)
    if t1 == t0:
        return PropagatorResult(U=np.eye(dim, dtype=complex), est_error=tol, steps_taken=0)
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853",
                    rtol=tol / 100.0, atol=tol / 100.0)
    if not sol.success:
        raise StiffnessError(f"integrator failed on [{t0}, {t1}]: {sol.message}")
    u = sol.y[:, -1].reshape(dim, dim)
    defect = np.linalg.norm(u.conj().T @ u - np.eye(dim), 2)
    if defect > 10.0 * tol:
        raise StiffnessError(
            f"unitarity defect {defect:.3e} exceeds 10x requested tolerance {tol:.1e}")
    return PropagatorResult(U=u, est_error=tol, steps_taken=len(sol.t) - 1)


def _check_pre(h, tol: float) -> None:
    if tol < 1e-13:
        raise ValueError("tolerance below 1e-13 is not resolvable in double precision")
    if isinstance(h, PermExpHamiltonian) and h.n > MAX_PIPELINE_QUBITS:
        raise ValueError(f"ODE oracle rated for n <= {MAX_PIPELINE_QUBITS} qubits")


def propagate_ode(h, t0: float, t1: float, tol: float = 1e-10) -> PropagatorResult:
    """Time-ordered propagator of H(t) on [t0, t1] by adaptive Runge-Kutta.

    h is a PermExpHamiltonian or a callable t -> dense Hermitian matrix.
    Columns of U are the evolved computational basis vectors.
    """
    _check_pre(h, tol)
    h_of_t = hamiltonian_evaluator(h)
    dim = h.dim if isinstance(h, PermExpHamiltonian) else h_of_t(t0).shape[0]
    return _integrate(h_of_t, dim, t0, t1, tol)


def propagate_interaction(h: PermExpHamiltonian, t0: float, t1: float,
                          tol: float = 1e-10) -> PropagatorResult:
    """Propagator of the interaction-frame generator e^{iH0 t} V(t) e^{-iH0 t}."""
    _check_pre(h, tol)
    full = hamiltonian_evaluator(h)
    energies = h.h0_diag
    dim = h.dim

    def h_int(t: float) -> np.ndarray:
        v = full(t)
        v[np.arange(dim), np.arange(dim)] -= energies
        phase = np.exp(1j * energies * t)
        return (phase[:, None] * v) * phase.conj()[None, :]

    return _integrate(h_int, dim, t0, t1, tol)


def two_level_oscillating_propagator(h_field: float, gamma: float, alpha: float,
                                     t: float) -> np.ndarray:
    """Exact propagator of h*Z + gamma*(e^{-i a t}|0><1| + h.c.).

    In the frame rotating at alpha the generator is the static
    (h - alpha/2) Z + gamma X, so U(t) = e^{-i alpha t Z / 2} e^{-i H_rot t}.
    """
    a = h_field - alpha / 2.0
    w = math.hypot(a, gamma)
    eye = np.eye(2, dtype=complex)
    axis = np.array([[a, gamma], [gamma, -a]], dtype=complex)
    if w == 0.0:
        rot = eye
    else:
        rot = math.cos(w * t) * eye - 1j * math.sin(w * t) * axis / w
    frame = np.diag([np.exp(-0.5j * alpha * t), np.exp(0.5j * alpha * t)])
    return frame @ rot
