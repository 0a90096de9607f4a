"""Run configuration: a strict JSON schema plus the objects it builds."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .algebra import PhysicalParams
from .models import PotentialSpec, double_well, harmonic
from .quadrature import MAX_RULE_ORDER, QuadratureGrid, product_grid
from .symbols import DEFAULT_DEGREE_CAP, SymbolTruncation

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Physical(_Strict):
    hbar: float = Field(1.0, gt=0, allow_inf_nan=False)
    mass: float = Field(1.0, gt=0, allow_inf_nan=False)
    omega0: float = Field(1.0, gt=0, allow_inf_nan=False)


class Potential(_Strict):
    type: Literal["double_well", "harmonic"]
    Q0: Optional[float] = Field(None, gt=0, allow_inf_nan=False)
    # alternative to Q0: pick Q0 so that the transfer time πħ/ΔE matches
    transfer_time: Optional[float] = Field(None, gt=0, allow_inf_nan=False)
    S: float = Field(0.0, allow_inf_nan=False)
    omega: float = Field(0.0, ge=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _q0(self):
        if self.type == "double_well":
            if (self.Q0 is None) == (self.transfer_time is None):
                raise ValueError("double_well needs exactly one of Q0 or transfer_time")
        elif self.Q0 is not None or self.transfer_time is not None:
            raise ValueError("harmonic potential takes no Q0/transfer_time")
        if self.S != 0 and self.omega == 0:
            raise ValueError("a drive (S != 0) needs omega > 0")
        return self


class Initial(_Strict):
    alpha0: Tuple[float, float]


class Grid(_Strict):
    n_re: int = Field(ge=1, le=MAX_RULE_ORDER)
    n_im: int = Field(ge=1, le=MAX_RULE_ORDER)
    s_re: float = Field(1.0, gt=0, allow_inf_nan=False)
    s_im: float = Field(1.0, gt=0, allow_inf_nan=False)
    center: Tuple[float, float] = (0.0, 0.0)


class Stepping(_Strict):
    t_total: float = Field(gt=0, allow_inf_nan=False)
    n_steps: int = Field(ge=1)
    K: int = Field(6, ge=1)


class Oracle(_Strict):
    dim: int = Field(200, ge=1)
    n_steps: Optional[int] = Field(None, ge=1)


class Output(_Strict):
    path: Optional[str] = None
    stride: int = Field(1, ge=1)


class Limits(_Strict):
    norm_floor: float = Field(0.5, ge=0)
    norm_ceiling: float = Field(2.0, gt=0)
    degree_cap: int = Field(DEFAULT_DEGREE_CAP, ge=1)
    check_every: int = Field(100, ge=1)


class Convergence(_Strict):
    n_steps: Optional[List[int]] = None
    K: Optional[List[int]] = None
    grid: Optional[List[int]] = None

    @model_validator(mode="after")
    def _monotone(self):
        for name in ("n_steps", "K", "grid"):
            values = getattr(self, name)
            if values is None:
                continue
            if len(values) < 2 or any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"convergence.{name} must be a strictly increasing list of >= 2 values")
            if min(values) < 1:
                raise ValueError(f"convergence.{name} values must be >= 1")
        return self


class RunConfig(_Strict):
    physical: Physical = Physical()
    potential: Potential
    initial: Initial
    grid: Optional[Grid] = None
    stepping: Stepping
    oracle: Oracle = Oracle()
    output: Output = Output()
    limits: Limits = Limits()
    convergence: Convergence = Convergence()
    # long experiments refuse to run unless explicitly allowed
    long_running: bool = False
    description: str = ""

    @model_validator(mode="after")
    def _cross(self):
        degree = 4 if self.potential.type == "double_well" else 2
        if self.oracle.dim < degree + 2:
            raise ValueError(f"oracle.dim must be >= {degree + 2} for this potential")
        if degree * self.stepping.K > self.limits.degree_cap:
            raise ValueError(
                f"kernel degree {degree}·K={degree * self.stepping.K} exceeds limits.degree_cap"
            )
        if self.limits.norm_floor >= self.limits.norm_ceiling:
            raise ValueError("limits.norm_floor must be below limits.norm_ceiling")
        return self

    # -- builders -------------------------------------------------------

    @property
    def params(self) -> PhysicalParams:
        p = self.physical
        return PhysicalParams(p.hbar, p.mass, p.omega0)

    @property
    def alpha0(self) -> complex:
        return complex(*self.initial.alpha0)

    @property
    def trunc(self) -> SymbolTruncation:
        return SymbolTruncation(self.stepping.K)

    def Q0(self) -> Optional[float]:
        pot = self.potential
        if pot.type != "double_well":
            return None
        if pot.Q0 is not None:
            return pot.Q0
        return _cached_desk_Q0(pot.transfer_time, self.params, self.oracle.dim)

    def potential_spec(self, S: Optional[float] = None) -> PotentialSpec:
        pot = self.potential
        s = pot.S if S is None else S
        if pot.type == "harmonic":
            return harmonic(self.params, s, pot.omega)
        return double_well(self.params, self.Q0(), s, pot.omega)

    def grid_settings(self) -> Grid:
        if self.grid is not None:
            return self.grid
        return default_grid(self.potential_spec(0.0), self.alpha0, self.params)

    def build_grid(self) -> QuadratureGrid:
        g = self.grid_settings()
        return product_grid(g.n_re, g.n_im, g.s_re, g.s_im, complex(*g.center))

    def with_updates(self, **sections) -> "RunConfig":
        """Copy with whole sections or fields replaced, re-validated."""
        data = self.model_dump()
        for key, value in sections.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key].update(value)
            else:
                data[key] = value
        return parse_config(data)


_DESK_Q0_CACHE: dict = {}


def _cached_desk_Q0(target: float, params: PhysicalParams, dim: int) -> float:
    from .oracle import desk_Q0

    key = (target, params, dim)
    if key not in _DESK_Q0_CACHE:
        _DESK_Q0_CACHE[key] = desk_Q0(target, params, dim)
    return _DESK_Q0_CACHE[key]


def default_grid(spec: PotentialSpec, alpha0: complex, params: PhysicalParams) -> Grid:
    """Unit-scale square grid centered at 0 covering the classical orbit.

    The covered position range is the widest ``|q|`` with
    ``V(q) <= E + ħω₀/2`` (``E`` the classical energy of the initial label,
    plus zero-point energy), widened by ``3λ``. With unit scaling the
    outermost Gauss–Hermite node sits near ``√(2n)``, so ``n`` is chosen
    with roughly two units of label margin beyond that range.
    """
    lam = params.lam
    q0 = 2 * lam * alpha0.real
    p0 = params.hbar * alpha0.imag / lam
    V = spec.static
    energy = float(np.real(V(q0))) + p0**2 / (2 * params.mass) + 0.5 * params.hbar * params.omega0
    qs = np.linspace(-50 * lam - abs(q0), 50 * lam + abs(q0), 20001)
    inside = qs[np.real(V(qs)) <= energy]
    q_max = max(np.max(np.abs(inside)) if inside.size else 0.0, abs(q0)) + 3 * lam
    reach = q_max / (2 * lam)
    n = int(math.ceil((reach + 3.0) ** 2 / 2))
    n = min(max(n, 16), MAX_RULE_ORDER)
    return Grid(n_re=n, n_im=n)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return parse_config(data)
