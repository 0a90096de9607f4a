"""Polynomial potentials with an optional ``S sin(ωt) Q`` drive."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .algebra import PhysicalParams, PositionPolynomial

__all__ = ["PotentialSpec", "double_well", "harmonic", "potential_at", "anharmonic_part"]


@dataclass(frozen=True)
class PotentialSpec:
    static: PositionPolynomial
    drive_amplitude: float = 0.0
    drive_frequency: float = 0.0
    drive_active: bool = False

    @property
    def is_driven(self) -> bool:
        return self.drive_active and self.drive_amplitude != 0.0

    def drive(self, t: float) -> float:
        """Coefficient of ``Q`` contributed by the drive at time ``t``."""
        if not self.is_driven:
            return 0.0
        return self.drive_amplitude * math.sin(self.drive_frequency * t)


def double_well(
    params: PhysicalParams, Q0: float, S: float = 0.0, omega: float = 0.0
) -> PotentialSpec:
    """``(mω₀²/8Q₀²)(Q² - Q₀²)² + S sin(ωt) Q``; minima at ``±Q0`` with local frequency ω₀."""
    if not Q0 > 0:
        raise ValueError(f"Q0 must be positive, got {Q0!r}")
    c = params.mass * params.omega0**2 / (8.0 * Q0**2)
    static = PositionPolynomial((c * Q0**4, 0.0, -2.0 * c * Q0**2, 0.0, c))
    return PotentialSpec(static, float(S), float(omega), drive_active=S != 0.0)


def harmonic(params: PhysicalParams, S: float = 0.0, omega: float = 0.0) -> PotentialSpec:
    """The reference oscillator potential ``mω₀²Q²/2`` itself."""
    static = PositionPolynomial((0.0, 0.0, 0.5 * params.mass * params.omega0**2))
    return PotentialSpec(static, float(S), float(omega), drive_active=S != 0.0)


def potential_at(spec: PotentialSpec, t: float) -> PositionPolynomial:
    f = spec.drive(t)
    if f == 0.0:
        return spec.static
    return spec.static + PositionPolynomial((0.0, f))


def anharmonic_part(spec: PotentialSpec, params: PhysicalParams, t: float = 0.0) -> PositionPolynomial:
    ref = PositionPolynomial((0.0, 0.0, 0.5 * params.mass * params.omega0**2))
    return potential_at(spec, t) - ref
