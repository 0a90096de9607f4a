"""Wave-packet propagation with the antinormal coherent-state path integral.

The propagator discretizes the path integral on a phase-space quadrature
grid, where one time step is a dense matrix-vector product. A truncated
Fock-basis propagator serves as an independent reference.
"""

from .algebra import (
    LadderPolynomial,
    PhysicalParams,
    PositionPolynomial,
    fock_matrix,
    position_to_antinormal,
    reorder_antinormal,
)
from .models import PotentialSpec, anharmonic_part, double_well, harmonic, potential_at
from .oracle import (
    FockState,
    coherent_in_fock,
    evolve_oracle,
    fock_expectation_Q,
    hamiltonian_matrix,
    tunneling_splitting,
)
from .propagator import (
    CSState,
    NumericalAbort,
    StepMatrix,
    build_step_matrix,
    coherent_overlap,
    expectation_Q,
    expectation_Q2,
    norm_estimate,
    project_initial,
    propagate,
    step,
)
from .quadrature import QuadratureGrid, gauss_hermite_rule, identity_residual, product_grid
from .symbols import SymbolPolynomial, SymbolTruncation, build_G_symbol, q_power_symbols, symbol_of

__all__ = [
    "LadderPolynomial",
    "PhysicalParams",
    "PositionPolynomial",
    "fock_matrix",
    "position_to_antinormal",
    "reorder_antinormal",
    "FockState",
    "coherent_in_fock",
    "evolve_oracle",
    "fock_expectation_Q",
    "hamiltonian_matrix",
    "tunneling_splitting",
    "CSState",
    "NumericalAbort",
    "StepMatrix",
    "build_step_matrix",
    "coherent_overlap",
    "expectation_Q",
    "expectation_Q2",
    "norm_estimate",
    "project_initial",
    "propagate",
    "step",
    "PotentialSpec",
    "anharmonic_part",
    "double_well",
    "harmonic",
    "potential_at",
    "QuadratureGrid",
    "gauss_hermite_rule",
    "identity_residual",
    "product_grid",
    "SymbolPolynomial",
    "SymbolTruncation",
    "build_G_symbol",
    "q_power_symbols",
    "symbol_of",
]

__version__ = "0.1.0"
