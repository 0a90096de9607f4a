"""Reference propagation in a truncated number (Fock) basis.

Independent of the phase-space grid: the Hamiltonian is the diagonal
oscillator part plus the Fock matrix of the antinormally ordered ``H₁``,
and each step applies ``exp(-i H(t_mid) dt / ħ)`` exactly through a
Hermitian eigendecomposition.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .algebra import PhysicalParams, fock_matrix, ladder_matrices, position_to_antinormal
from .models import PotentialSpec, anharmonic_part, double_well

__all__ = [
    "FockState",
    "ConvergenceError",
    "coherent_in_fock",
    "hamiltonian_matrix",
    "evolve_oracle",
    "tunneling_splitting",
    "transfer_time",
    "desk_Q0",
    "fock_expectation_Q",
    "fock_expectation_Q2",
]

log = logging.getLogger(__name__)

DEFAULT_DIM = 200
# cap on cached per-step unitaries for periodic drives (bytes)
UNITARY_CACHE_BYTES = 512 * 2**20


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class FockState:
    c: np.ndarray
    time: float = 0.0

    @property
    def dim(self) -> int:
        return self.c.size

    @property
    def norm(self) -> float:
        return float(np.vdot(self.c, self.c).real)


def coherent_in_fock(alpha: complex, dim: int) -> FockState:
    """``c_n = e^{-|α|²/2} α^n / √(n!)``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        c = np.zeros(dim, dtype=complex)
        c[0] = 1.0
    else:
        logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        c = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    loss = 1.0 - float(np.vdot(c, c).real)
    if loss > 1e-8:
        log.warning("coherent state alpha=%s loses %.3g of its norm at dim=%d", alpha, loss, dim)
    return FockState(c, 0.0)


def _position_matrix(dim: int, lam: float) -> np.ndarray:
    a, ad = ladder_matrices(dim)
    return lam * (a + ad)


def hamiltonian_matrix(spec: PotentialSpec, t: float, params: PhysicalParams, dim: int) -> np.ndarray:
    """``ħω₀(a†a + 1/2) + H₁(t)`` in the first ``dim`` number states."""
    h1 = position_to_antinormal(anharmonic_part(spec, params, t), params)
    H = fock_matrix(h1, dim)
    H[np.diag_indices(dim)] += params.hbar * params.omega0 * (np.arange(dim) + 0.5)
    return 0.5 * (H + H.conj().T)


def _step_unitary(H: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    e, U = np.linalg.eigh(H)
    return (U * np.exp(-1j * e * dt / hbar)) @ U.conj().T


def _drive_period_steps(spec: PotentialSpec, dt: float) -> Optional[int]:
    """Steps per drive period when it is an integer (to 1e-9), else ``None``."""
    if not spec.is_driven or spec.drive_frequency == 0:
        return None
    ratio = 2 * math.pi / abs(spec.drive_frequency) / dt
    m = round(ratio)
    if m >= 1 and abs(ratio - m) <= 1e-9 * ratio:
        return int(m)
    return None


def evolve_oracle(
    initial: FockState,
    spec: PotentialSpec,
    t_total: float,
    n_steps: int,
    params: PhysicalParams,
    observer: Optional[Callable[[float, FockState], None]] = None,
) -> FockState:
    """Step ``initial`` with ``exp(-i H(t_mid) dt/ħ)``.

    Static potentials diagonalize once and advance in the eigenbasis. For
    periodic drives whose period is a whole number of steps, the unitaries
    of one period are cached (up to :data:`UNITARY_CACHE_BYTES`).
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps!r}")
    dim = initial.dim
    dt = t_total / n_steps
    t0 = initial.time
    c = initial.c.astype(complex)

    if not spec.is_driven:
        e, U = np.linalg.eigh(hamiltonian_matrix(spec, t0, params, dim))
        phase = np.exp(-1j * e * dt / params.hbar)
        b = U.conj().T @ c
        state = initial
        for k in range(n_steps):
            b = phase * b
            if observer is not None or k + 1 == n_steps:
                state = FockState(U @ b, t0 + (k + 1) * dt)
                if observer is not None:
                    observer(state.time, state)
        return state

    period = _drive_period_steps(spec, dt)
    cacheable = period is not None and period * dim * dim * 16 <= UNITARY_CACHE_BYTES
    cache: dict = {}
    # the linear drive only shifts the Q coefficient, so reuse the static part
    h_static = hamiltonian_matrix(replace_drive(spec), 0.0, params, dim)
    q = _position_matrix(dim, params.lam)
    state = initial
    for k in range(n_steps):
        key = k % period if cacheable else None
        U = cache.get(key) if cacheable else None
        if U is None:
            t_mid = t0 + (k + 0.5) * dt
            U = _step_unitary(h_static + spec.drive(t_mid) * q, dt, params.hbar)
            if cacheable:
                cache[key] = U
        c = U @ c
        state = FockState(c, t0 + (k + 1) * dt)
        if observer is not None:
            observer(state.time, state)
    return state


def replace_drive(spec: PotentialSpec) -> PotentialSpec:
    """The same potential with the drive switched off."""
    return PotentialSpec(spec.static, 0.0, spec.drive_frequency, False)


def fock_expectation_Q(state: FockState, params: PhysicalParams) -> float:
    c = state.c
    # <Q> = 2λ Re Σ √(n+1) c_n* c_{n+1}
    off = np.sqrt(np.arange(1, c.size)) * c[:-1].conj() * c[1:]
    return float(2 * params.lam * off.sum().real / state.norm)


def fock_expectation_Q2(state: FockState, params: PhysicalParams) -> float:
    qc = _position_matrix(state.dim + 1, params.lam)[:, :-1] @ state.c
    return float(np.vdot(qc, qc).real / state.norm)


def _lowest_pair(spec: PotentialSpec, params: PhysicalParams, dim: int):
    H = hamiltonian_matrix(spec, 0.0, params, dim)
    if all(c == 0 for c in spec.static.coeffs[1::2]):
        # even potential: H does not couple even and odd n, and the blocks
        # resolve a tiny splitting without cancellation between doublet members
        even = np.linalg.eigvalsh(H[0::2, 0::2])[0]
        odd = np.linalg.eigvalsh(H[1::2, 1::2])[0]
        return tuple(sorted((even, odd)))
    e = np.linalg.eigvalsh(H)
    return e[0], e[1]


def tunneling_splitting(
    spec: PotentialSpec, params: PhysicalParams, dim: int = DEFAULT_DIM, rtol: float = 1e-8
) -> float:
    """``E₁ - E₀`` of the static potential, checked against ``dim + 20``."""
    if spec.is_driven:
        raise ValueError("tunneling splitting is defined for the undriven potential")
    e0, e1 = _lowest_pair(spec, params, dim)
    f0, f1 = _lowest_pair(spec, params, dim + 20)
    split, ref = e1 - e0, f1 - f0
    if not abs(split - ref) <= rtol * abs(ref):
        raise ConvergenceError(
            f"splitting not converged at dim={dim}: {split:.12g} vs {ref:.12g} at dim={dim + 20}"
        )
    if not split > 0:
        raise ConvergenceError(f"non-positive splitting {split!r}")
    return float(split)


def transfer_time(spec: PotentialSpec, params: PhysicalParams, dim: int = DEFAULT_DIM) -> float:
    """Well-to-well transfer time ``πħ/ΔE`` (half the tunneling period)."""
    return math.pi * params.hbar / tunneling_splitting(spec, params, dim)


def desk_Q0(
    target_transfer: float,
    params: PhysicalParams,
    dim: int = DEFAULT_DIM,
    bracket=(2.5, 4.5),
    xtol: float = 1e-12,
) -> float:
    """Double-well half-distance whose transfer time ``πħ/ΔE`` equals ``target_transfer``."""

    def f(q0):
        return math.log(transfer_time(double_well(params, q0), params, dim) / target_transfer)

    return float(brentq(f, *bracket, xtol=xtol))
