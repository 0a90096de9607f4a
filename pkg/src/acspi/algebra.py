"""Polynomials in harmonic-oscillator ladder operators.

Everything here is exact symbolic rewriting with complex coefficients.
Ladder monomials are stored antinormally ordered, ``a^p (a†)^q``, i.e. all
annihilators to the left of all creators, which is the ordering whose
coherent-state symbol is obtained by plain substitution ``a -> α``,
``a† -> α*``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "PhysicalParams",
    "LadderPolynomial",
    "PositionPolynomial",
    "parse_word",
    "reorder_antinormal",
    "position_to_antinormal",
    "fock_matrix",
    "ladder_matrices",
    "matrix_polynomial",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Units of the reference oscillator ``ħω₀(a†a + 1/2)``.

    ``lam`` is the length in ``Q = lam·(a + a†)``.
    """

    hbar: float = 1.0
    mass: float = 1.0
    omega0: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "omega0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def lam(self) -> float:
        return math.sqrt(self.hbar / (2.0 * self.mass * self.omega0))


def _prune(terms: Mapping) -> dict:
    return {k: complex(v) for k, v in terms.items() if v != 0}


@dataclass(frozen=True, eq=False)
class LadderPolynomial:
    """Antinormally ordered sum ``Σ c_pq a^p (a†)^q``, keyed by ``(p, q)``."""

    terms: dict = field(default_factory=dict)
    ordering: str = "antinormal"

    def __post_init__(self):
        if self.ordering != "antinormal":
            raise ValueError(f"unsupported ordering {self.ordering!r}")
        for p, q in self.terms:
            if p < 0 or q < 0:
                raise ValueError(f"negative exponent in term {(p, q)}")
        object.__setattr__(self, "terms", _prune(self.terms))

    @classmethod
    def identity(cls) -> "LadderPolynomial":
        return cls({(0, 0): 1.0})

    @classmethod
    def annihilator(cls) -> "LadderPolynomial":
        return cls({(1, 0): 1.0})

    @classmethod
    def creator(cls) -> "LadderPolynomial":
        return cls({(0, 1): 1.0})

    @property
    def degree(self) -> int:
        return max((p + q for p, q in self.terms), default=0)

    def __eq__(self, other):
        if not isinstance(other, LadderPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def isclose(self, other: "LadderPolynomial", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0) - other.terms.get(k, 0))
            <= atol + rtol * max(abs(self.terms.get(k, 0)), abs(other.terms.get(k, 0)))
            for k in keys
        )

    def __add__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LadderPolynomial(out)

    def __sub__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "LadderPolynomial":
        return LadderPolynomial({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, LadderPolynomial):
            return _multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __repr__(self):
        body = " + ".join(f"({v:g})·a^{p}a†^{q}" for (p, q), v in sorted(self.terms.items()))
        return f"LadderPolynomial({body or '0'})"


def _multiply(x: LadderPolynomial, y: LadderPolynomial) -> LadderPolynomial:
    # a^p a†^q · a^r a†^s; move a^r left through a†^q with
    # a†^q a^r = Σ_k (-1)^k k! C(q,k) C(r,k) a^(r-k) a†^(q-k)
    out: dict = {}
    for (p, q), cx in x.terms.items():
        for (r, s), cy in y.terms.items():
            for k in range(min(q, r) + 1):
                w = (-1) ** k * math.factorial(k) * math.comb(q, k) * math.comb(r, k)
                key = (p + r - k, q - k + s)
                out[key] = out.get(key, 0) + w * cx * cy
    return LadderPolynomial(out)


_TOKEN = re.compile(r"\s*(a†|a\^\+|a\+|adag|a)\s*")


def parse_word(word: str) -> tuple:
    """Split ``"a†a a"`` (also ``a+``/``adag`` for the creator) into ``("a†", "a", "a")``."""
    tokens = []
    pos = 0
    while pos < len(word):
        m = _TOKEN.match(word, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse ladder word {word!r} at position {pos}")
        tokens.append("a" if m.group(1) == "a" else "a†")
        pos = m.end()
    return tuple(tokens)


def reorder_antinormal(words: Iterable[tuple]) -> LadderPolynomial:
    """Antinormally order a sum of ladder words.

    ``words`` yields ``(word, coefficient)`` pairs, a word being a string
    accepted by :func:`parse_word` or a sequence of ``"a"``/``"a†"`` tokens,
    read left to right as an operator product.
    """
    a, ad = LadderPolynomial.annihilator(), LadderPolynomial.creator()
    total = LadderPolynomial()
    for word, coeff in words:
        tokens = parse_word(word) if isinstance(word, str) else tuple(word)
        acc = LadderPolynomial.identity()
        for tok in tokens:
            if tok == "a":
                acc = acc * a
            elif tok in ("a†", "ad", "adag", "a+"):
                acc = acc * ad
            else:
                raise ValueError(f"unknown ladder token {tok!r}")
        total = total + acc.scale(coeff)
    return total


@dataclass(frozen=True, eq=False)
class PositionPolynomial:
    """``Σ_k c_k Q^k`` with trailing zeros stripped."""

    coeffs: tuple = (0j,)

    def __post_init__(self):
        c = [complex(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [0j]
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "PositionPolynomial":
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0j,)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def __call__(self, q):
        return np.polynomial.polynomial.polyval(q, self.as_array())

    def __eq__(self, other):
        if not isinstance(other, PositionPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __add__(self, other: "PositionPolynomial") -> "PositionPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0j,) * (n - len(self.coeffs))
        b = other.coeffs + (0j,) * (n - len(other.coeffs))
        return PositionPolynomial(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "PositionPolynomial") -> "PositionPolynomial":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "PositionPolynomial":
        return PositionPolynomial(tuple(c * x for x in self.coeffs))

    def __mul__(self, other):
        if not isinstance(other, PositionPolynomial):
            return self.scale(other)
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return PositionPolynomial(tuple(out))

    __rmul__ = scale

    def __pow__(self, n: int) -> "PositionPolynomial":
        result = PositionPolynomial((1.0,))
        for _ in range(n):
            result = result * self
        return result

    def __repr__(self):
        return f"PositionPolynomial({list(self.coeffs)})"


def _q_powers_antinormal(max_k: int, lam: float) -> list:
    """Antinormal forms of ``Q^k`` for ``k = 0..max_k``."""
    step = LadderPolynomial({(1, 0): lam, (0, 1): lam})
    powers = [LadderPolynomial.identity()]
    for _ in range(max_k):
        powers.append(powers[-1] * step)
    return powers


def position_to_antinormal(p: PositionPolynomial, params: PhysicalParams) -> LadderPolynomial:
    """Rewrite a polynomial in ``Q = λ(a + a†)`` in antinormal order."""
    powers = _q_powers_antinormal(p.degree, params.lam)
    out = LadderPolynomial()
    for c, qk in zip(p.coeffs, powers):
        if c != 0:
            out = out + qk.scale(c)
    return out


def ladder_matrices(dim: int) -> tuple:
    """Truncated ``(a, a†)`` in the number basis."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return a, a.T.copy()


def fock_matrix(lp: LadderPolynomial, dim: int) -> np.ndarray:
    """Matrix elements ``<n|lp|n'>`` for ``0 <= n, n' < dim``.

    Products are formed in a basis padded by the polynomial degree, so the
    returned block is exact (no truncation artifacts).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    big = dim + lp.degree
    a, ad = ladder_matrices(big)
    out = np.zeros((big, big), dtype=complex)
    apow = {0: np.eye(big, dtype=complex)}
    adpow = {0: np.eye(big, dtype=complex)}

    def power(cache, base, n):
        if n not in cache:
            cache[n] = power(cache, base, n - 1) @ base
        return cache[n]

    for (p, q), c in lp.terms.items():
        out += c * (power(apow, a, p) @ power(adpow, ad, q))
    return out[:dim, :dim]


def matrix_polynomial(coeffs: Sequence[complex], m: np.ndarray) -> np.ndarray:
    """``Σ c_k M^k`` by Horner's rule."""
    out = np.zeros_like(m, dtype=complex)
    eye = np.eye(m.shape[0], dtype=complex)
    for c in reversed(list(coeffs)):
        out = out @ m + c * eye
    return out
