"""Coherent-state path-integral propagation as repeated matrix-vector products.

A wave packet lives on a :class:`QuadratureGrid` as ``v_j = √w_j <α_j|ψ>``.
One step of length ``dt`` multiplies by

    P_ij = √(w_i w_j) e^{-iω₀dt/2} <α_i e^{iω₀dt}|α_j> G₋(α_i e^{iω₀dt/2}; dt)

where ``G₋`` is the antinormal symbol of the Taylor-truncated kernel
``Σ_{n≤K} (-i dt H₁/ħ)^n/n!`` and ``H₁`` the anharmonic part of the
potential. The oscillator frequency ω₀ (not the drive frequency) sets
the phase-space rotation.

``P`` factors as ``diag(g) · A``: the harmonic kernel ``A`` depends only on
grid and ``dt``, the row factors ``g`` on the potential. Driven runs keep
``A`` and refresh ``g`` every step at the midpoint time.

Observables are quadrature quadratic forms ``v† M v`` with analytic
coherent-state matrix elements, normalized by the same form for ``1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import PhysicalParams, PositionPolynomial
from .models import PotentialSpec, anharmonic_part
from .quadrature import QuadratureGrid, coherent_overlap
from .symbols import (
    DEFAULT_DEGREE_CAP,
    DegreeCapError,
    SymbolPolynomial,
    SymbolTruncation,
    _desmoothing_table,
    build_G_symbol,
    kernel_position_coeffs,
)

__all__ = [
    "CSState",
    "StepMatrix",
    "NumericalAbort",
    "coherent_overlap",
    "project_initial",
    "harmonic_kernel",
    "build_step_matrix",
    "step",
    "propagate",
    "norm_estimate",
    "expectation_Q",
    "expectation_Q2",
]

log = logging.getLogger(__name__)

DEFAULT_NORM_FLOOR = 0.5
DEFAULT_NORM_CEILING = 2.0
DEFAULT_NORM_CHECK_EVERY = 100


class NumericalAbort(RuntimeError):
    """Propagation left the regime the grid can represent."""


@dataclass(frozen=True, eq=False)
class CSState:
    v: np.ndarray
    grid: QuadratureGrid
    time: float = 0.0

    def __post_init__(self):
        if self.v.shape != (self.grid.size,):
            raise ValueError(f"state vector has shape {self.v.shape}, grid has {self.grid.size} nodes")


@dataclass(frozen=True, eq=False)
class StepMatrix:
    """One propagation step, stored as row factors times the harmonic kernel."""

    kernel: np.ndarray
    row_factors: np.ndarray
    dt: float
    built_for_time: float
    omega0: float
    K: Optional[int]
    grid: QuadratureGrid = field(repr=False)

    @property
    def P(self) -> np.ndarray:
        return self.row_factors[:, None] * self.kernel

    @property
    def shape(self):
        return self.kernel.shape

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.row_factors * (self.kernel @ v)


def project_initial(grid: QuadratureGrid, alpha0: complex, warn_below: float = 0.99) -> CSState:
    """Sample the coherent state ``|α₀>`` on the grid."""
    v = grid.sqrt_weights * coherent_overlap(grid.nodes, complex(alpha0))
    state = CSState(v, grid, 0.0)
    nrm = norm_estimate(state)
    if nrm < warn_below:
        log.warning(
            "initial coherent state alpha0=%s is poorly covered by the grid (norm estimate %.4g)",
            alpha0,
            nrm,
        )
    return state


def harmonic_kernel(grid: QuadratureGrid, dt: float, params: PhysicalParams) -> np.ndarray:
    """``√(w_i w_j) e^{-iω₀dt/2} <α_i e^{iω₀dt}|α_j>``, i.e. ``e^{-iH₀dt/ħ}`` on the grid."""
    theta = params.omega0 * dt
    rotated = grid.nodes * np.exp(1j * theta)
    sw = grid.sqrt_weights
    a = coherent_overlap(rotated[:, None], grid.nodes[None, :])
    a *= np.exp(-0.5j * theta) * sw[:, None]
    a *= sw[None, :]
    return a


def _symbol_nodes(grid: QuadratureGrid, dt: float, params: PhysicalParams) -> np.ndarray:
    return grid.nodes * np.exp(0.5j * params.omega0 * dt)


def build_step_matrix(
    grid: QuadratureGrid,
    G_sym: SymbolPolynomial,
    dt: float,
    params: PhysicalParams,
    *,
    built_for_time: float = 0.0,
    K: Optional[int] = None,
    kernel: Optional[np.ndarray] = None,
) -> StepMatrix:
    """Assemble ``P(dt)``; pass ``kernel`` to reuse a harmonic kernel built for the same ``dt``."""
    if kernel is None:
        kernel = harmonic_kernel(grid, dt, params)
    g = np.asarray(G_sym(_symbol_nodes(grid, dt, params)), dtype=complex)
    return StepMatrix(kernel, g, float(dt), float(built_for_time), params.omega0, K, grid)


def step(state: CSState, M: StepMatrix) -> CSState:
    if state.grid is not M.grid and state.grid.size != M.grid.size:
        raise ValueError("state and step matrix live on different grids")
    return CSState(M.apply(state.v), state.grid, state.time + M.dt)


def norm_estimate(state: CSState) -> float:
    """``<ψ|ψ>`` from the grid's Gram form."""
    v = state.v
    return float(np.vdot(v, state.grid.gram @ v).real)


def _quadratic_expectation(state: CSState, form: np.ndarray) -> float:
    nrm = norm_estimate(state)
    if not nrm > 0:
        raise ValueError("expectation value of a zero-norm state")
    val = np.vdot(state.v, form @ state.v)
    if abs(val.imag) > 1e-8 * max(abs(val.real), nrm):
        raise ArithmeticError(f"expectation value has imaginary residue {val.imag:.3e}")
    return float(val.real / nrm)


def expectation_Q(state: CSState, params: PhysicalParams) -> float:
    return _quadratic_expectation(state, state.grid.position_form(params.lam))


def expectation_Q2(state: CSState, params: PhysicalParams) -> float:
    return _quadratic_expectation(state, state.grid.position2_form(params.lam))


class _KernelSymbols:
    """Row factors of ``P`` for any anharmonic part, at fixed grid and ``dt``."""

    def __init__(self, grid, dt, trunc, params, degree_cap):
        self.x = 2.0 * _symbol_nodes(grid, dt, params).real
        self.dt = dt
        self.trunc = trunc
        self.params = params
        self.degree_cap = degree_cap

    def row_factors(self, h1: PositionPolynomial) -> np.ndarray:
        if h1.degree * self.trunc.K > self.degree_cap:
            raise DegreeCapError(
                f"kernel degree {h1.degree}·{self.trunc.K} exceeds cap {self.degree_cap}"
            )
        gq = kernel_position_coeffs(h1.as_array(), self.dt, self.trunc.K, self.params.hbar)
        xc = _desmoothing_table(gq.size - 1, self.params.lam) @ gq
        return np.polynomial.polynomial.polyval(self.x, xc)


def propagate(
    initial: CSState,
    spec: PotentialSpec,
    t_total: float,
    n_steps: int,
    trunc: SymbolTruncation,
    params: PhysicalParams,
    observer: Optional[Callable[[float, CSState], None]] = None,
    *,
    norm_floor: float = DEFAULT_NORM_FLOOR,
    norm_ceiling: float = DEFAULT_NORM_CEILING,
    check_every: int = DEFAULT_NORM_CHECK_EVERY,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> CSState:
    """Advance ``initial`` by ``n_steps`` steps of ``t_total / n_steps``.

    A static potential builds ``P`` once. With an active drive, ``H₁`` is
    evaluated at each step's midpoint and the row factors are refreshed.
    ``observer(t, state)`` runs after every step. The norm is checked every
    ``check_every`` steps and after the last one; leaving
    ``[norm_floor, norm_ceiling]`` raises :class:`NumericalAbort`.
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps!r}")
    grid = initial.grid
    dt = t_total / n_steps
    t0 = initial.time
    kernel = harmonic_kernel(grid, dt, params)

    if spec.is_driven:
        symbols = _KernelSymbols(grid, dt, trunc, params, degree_cap)

        def matrix_for(k):
            t_mid = t0 + (k + 0.5) * dt
            g = symbols.row_factors(anharmonic_part(spec, params, t_mid))
            return StepMatrix(kernel, g, dt, t_mid, params.omega0, trunc.K, grid)

    else:
        G = build_G_symbol(anharmonic_part(spec, params, t0), dt, trunc, params, degree_cap)
        static = build_step_matrix(
            grid, G, dt, params, built_for_time=t0 + 0.5 * dt, K=trunc.K, kernel=kernel
        )
        # materialized once so each step is a single matrix-vector product
        dense = static.P

    v = initial.v
    state = initial
    for k in range(n_steps):
        if spec.is_driven:
            v = matrix_for(k).apply(v)
        else:
            v = dense @ v
        # time from the step index, so long runs do not accumulate rounding
        state = CSState(v, grid, t0 + (k + 1) * dt)
        if (k + 1) % check_every == 0 or k + 1 == n_steps:
            nrm = norm_estimate(state)
            if not (norm_floor <= nrm <= norm_ceiling):
                raise NumericalAbort(
                    f"norm estimate {nrm:.6g} left [{norm_floor}, {norm_ceiling}] at t={state.time:.6g}; "
                    "the wave packet escaped the grid or the step is too large for the kernel"
                )
        if observer is not None:
            observer(state.time, state)
    return state
