"""Antinormal (anti-Wick) symbols and the truncated kernel of one time step.

For an antinormally ordered monomial ``a^p a†^q`` the symbol is
``α^p α*^q``. Functions of ``Q`` alone have symbols depending only on
``x = α + α*``; those are kept as univariate coefficient arrays in ``x``
so that evaluation avoids the cancellation of a binomial expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import (
    LadderPolynomial,
    PhysicalParams,
    PositionPolynomial,
    position_to_antinormal,
)

__all__ = [
    "DEFAULT_DEGREE_CAP",
    "DegreeCapError",
    "SymbolPolynomial",
    "SymbolTruncation",
    "symbol_of",
    "q_power_symbols",
    "build_G_symbol",
    "kernel_position_coeffs",
]

DEFAULT_DEGREE_CAP = 64


class DegreeCapError(ValueError):
    """Kernel polynomial degree exceeds the configured cap."""


class SymbolPolynomial:
    """Complex polynomial ``Σ s_mn α^m (α*)^n`` in a phase-space label.

    Build from a term map, or with :meth:`from_sum_coeffs` for symbols that
    depend only on ``α + α*``. Immutable by convention.
    """

    __slots__ = ("_terms", "_xcoeffs")

    def __init__(self, terms=None):
        self._terms = {k: complex(v) for k, v in (terms or {}).items() if v != 0}
        for m, n in self._terms:
            if m < 0 or n < 0:
                raise ValueError(f"negative exponent in term {(m, n)}")
        self._xcoeffs = None

    @classmethod
    def from_sum_coeffs(cls, xcoeffs) -> "SymbolPolynomial":
        """Symbol ``Σ_k c_k (α + α*)^k``."""
        obj = cls.__new__(cls)
        c = np.array(xcoeffs, dtype=complex)
        nz = np.flatnonzero(c)
        obj._xcoeffs = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        obj._terms = None
        return obj

    @classmethod
    def constant(cls, c: complex = 1.0) -> "SymbolPolynomial":
        return cls.from_sum_coeffs([c])

    @property
    def terms(self) -> dict:
        if self._terms is None:
            terms: dict = {}
            for k, c in enumerate(self._xcoeffs):
                if c == 0:
                    continue
                for m in range(k + 1):
                    key = (m, k - m)
                    terms[key] = terms.get(key, 0) + c * math.comb(k, m)
            self._terms = {k: v for k, v in terms.items() if v != 0}
        return self._terms

    @property
    def degree(self) -> int:
        if self._xcoeffs is not None:
            return len(self._xcoeffs) - 1
        return max((m + n for m, n in self._terms), default=0)

    @property
    def sum_coeffs(self):
        """Coefficients in ``α + α*`` when known, else ``None``."""
        return None if self._xcoeffs is None else self._xcoeffs.copy()

    def __call__(self, alpha):
        alpha = np.asarray(alpha, dtype=complex)
        if self._xcoeffs is not None:
            return np.polynomial.polynomial.polyval(2.0 * alpha.real, self._xcoeffs)
        out = np.zeros(alpha.shape, dtype=complex)
        conj = alpha.conj()
        for (m, n), s in self._terms.items():
            out += s * alpha**m * conj**n
        return out

    evaluate = __call__

    def coefficient(self, m: int, n: int) -> complex:
        return self.terms.get((m, n), 0j)

    def isclose(self, other: "SymbolPolynomial", rtol=1e-10, atol=1e-14) -> bool:
        a, b = self.terms, other.terms
        return all(
            abs(a.get(k, 0) - b.get(k, 0)) <= atol + rtol * max(abs(a.get(k, 0)), abs(b.get(k, 0)))
            for k in set(a) | set(b)
        )

    def __repr__(self):
        if self._xcoeffs is not None:
            return f"SymbolPolynomial(sum_coeffs={self._xcoeffs.tolist()})"
        return f"SymbolPolynomial({self._terms})"


@dataclass(frozen=True)
class SymbolTruncation:
    """Order ``K`` of the Taylor-truncated kernel ``Σ_{n≤K} (-iΔt H₁/ħ)^n / n!``."""

    K: int = 6

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"truncation order K must be an integer >= 1, got {self.K!r}")


def symbol_of(lp: LadderPolynomial) -> SymbolPolynomial:
    if lp.ordering != "antinormal":
        raise ValueError("symbol_of needs an antinormally ordered polynomial")
    return SymbolPolynomial(dict(lp.terms))


@lru_cache(maxsize=32)
def _desmoothing_table(max_k: int, lam: float) -> np.ndarray:
    # column k: coefficients in x = α+α* of exp(-(λ²/2) d²/dq²) q^k at q = λx
    table = np.zeros((max_k + 1, max_k + 1))
    for k in range(max_k + 1):
        for j in range(k // 2 + 1):
            table[k - 2 * j, k] = (
                (-(lam**2) / 2) ** j
                * math.factorial(k)
                / (math.factorial(j) * math.factorial(k - 2 * j))
                * lam ** (k - 2 * j)
            )
    table.flags.writeable = False
    return table


def q_power_symbols(max_k: int, params: PhysicalParams, method: str = "desmoothing") -> list:
    """Symbols of ``Q^0 .. Q^max_k``.

    ``method="ordering"`` reorders ``(λ(a + a†))^k`` symbolically;
    ``method="desmoothing"`` applies ``exp(-(λ²/2) d²/dq²)`` to ``q^k``.
    The two are independent routes to the same polynomials.
    """
    if max_k < 0:
        raise ValueError("max_k must be >= 0")
    if method == "ordering":
        return [
            symbol_of(position_to_antinormal(PositionPolynomial.monomial(k), params))
            for k in range(max_k + 1)
        ]
    if method == "desmoothing":
        table = _desmoothing_table(max_k, params.lam)
        return [SymbolPolynomial.from_sum_coeffs(table[: k + 1, k]) for k in range(max_k + 1)]
    raise ValueError(f"unknown method {method!r}")


def kernel_position_coeffs(h1, dt: float, K: int, hbar: float = 1.0) -> np.ndarray:
    """Coefficients in ``Q`` of ``Σ_{n=0}^{K} (-i dt H₁/ħ)^n / n!``."""
    h1 = np.asarray(h1, dtype=complex)
    out = np.zeros(h1.size * K + 1 if h1.size else 1, dtype=complex)
    term = np.ones(1, dtype=complex)
    out[0] = 1.0
    factor = -1j * dt / hbar
    for n in range(1, K + 1):
        term = np.convolve(term, h1) * (factor / n)
        out[: term.size] += term
    nz = np.flatnonzero(out)
    return out[: nz[-1] + 1] if nz.size else out[:1]


def build_G_symbol(
    H1: PositionPolynomial,
    dt: float,
    trunc: SymbolTruncation,
    params: PhysicalParams,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> SymbolPolynomial:
    """Antinormal symbol of the truncated one-step kernel.

    The kernel is a polynomial in ``Q`` alone, so its symbol follows by
    linearity from the symbols of the powers of ``Q``.
    """
    d = H1.degree
    if d * trunc.K > degree_cap:
        raise DegreeCapError(
            f"kernel degree {d}·{trunc.K} = {d * trunc.K} exceeds cap {degree_cap}"
        )
    gq = kernel_position_coeffs(H1.as_array(), dt, trunc.K, params.hbar)
    table = _desmoothing_table(gq.size - 1, params.lam)
    return SymbolPolynomial.from_sum_coeffs(table @ gq)
