"""Phase-space quadrature for ``∫ d²α/π f(α)``.

A scaled Gauss–Hermite product rule whose Gaussian weight is folded back
into the weights, so integrands only need Gaussian decay around the grid
center (coherent-state overlaps provide it).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "MAX_RULE_ORDER",
    "QuadratureGrid",
    "gauss_hermite_rule",
    "product_grid",
    "identity_residual",
    "coherent_overlap",
]

MAX_RULE_ORDER = 256


def coherent_overlap(alpha, beta):
    """``<α|β> = exp(-|α|²/2 - |β|²/2 + α* β)``, broadcasting over arrays."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    return np.exp(-0.5 * (alpha.real**2 + alpha.imag**2) - 0.5 * (beta.real**2 + beta.imag**2) + alpha.conj() * beta)


def gauss_hermite_rule(n: int):
    """Nodes and weights for ``∫ f(x) e^{-x²} dx`` with ``n`` points."""
    if int(n) != n or not 1 <= n <= MAX_RULE_ORDER:
        raise ValueError(f"Gauss-Hermite order must be an integer in [1, {MAX_RULE_ORDER}], got {n!r}")
    x, w = np.polynomial.hermite.hermgauss(int(n))
    # symmetrize; hermgauss is symmetric up to rounding
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    n_re: int
    n_im: int
    s_re: float
    s_im: float
    center: complex = 0j

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if not np.all(self.weights > 0):
            raise ValueError("quadrature weights must be strictly positive")
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def size(self) -> int:
        return self.nodes.size

    def __len__(self):
        return self.nodes.size

    @cached_property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    @cached_property
    def gram(self) -> np.ndarray:
        """``√(w_i w_j) <α_i|α_j>``; the norm quadratic form."""
        sw = self.sqrt_weights
        g = coherent_overlap(self.nodes[:, None], self.nodes[None, :])
        g *= sw[:, None]
        g *= sw[None, :]
        return g

    def position_form(self, lam: float) -> np.ndarray:
        """``√(w_i w_j) <α_i|Q|α_j>`` with ``<α|Q|β> = λ(α* + β)<α|β>``."""
        return self._forms(lam)[0]

    def position2_form(self, lam: float) -> np.ndarray:
        """``√(w_i w_j) <α_i|Q²|α_j>`` with ``<α|Q²|β> = λ²((α* + β)² + 1)<α|β>``."""
        return self._forms(lam)[1]

    def _forms(self, lam: float):
        cache = self.__dict__.setdefault("_form_cache", {})
        if lam not in cache:
            s = self.nodes.conj()[:, None] + self.nodes[None, :]
            q1 = lam * s * self.gram
            q2 = lam**2 * (s * s + 1.0) * self.gram
            cache.clear()
            cache[lam] = (q1, q2)
        return cache[lam]


def product_grid(
    n_re: int,
    n_im: int,
    s_re: float = 1.0,
    s_im: float = 1.0,
    center: complex = 0j,
) -> QuadratureGrid:
    """Tensor-product Gauss–Hermite grid over the complex plane.

    Node ``(i, k)`` is ``center + s_re x_i + i s_im y_k`` with weight
    ``(s_re s_im / π) w_i w_k exp(x_i² + y_k²)``.
    """
    if not (s_re > 0 and s_im > 0):
        raise ValueError("axis scalings must be positive")
    x, wx = gauss_hermite_rule(n_re)
    y, wy = gauss_hermite_rule(n_im)
    nodes = complex(center) + (s_re * x)[:, None] + 1j * (s_im * y)[None, :]
    weights = (s_re * s_im / np.pi) * (wx * np.exp(x**2))[:, None] * (wy * np.exp(y**2))[None, :]
    return QuadratureGrid(
        nodes=nodes.ravel(),
        weights=weights.ravel(),
        n_re=int(n_re),
        n_im=int(n_im),
        s_re=float(s_re),
        s_im=float(s_im),
        center=complex(center),
    )


def identity_residual(grid: QuadratureGrid, probes) -> float:
    """Worst ``|Σ_j w_j |<β|α_j>|² - 1|`` over the probe labels ``β``."""
    probes = np.atleast_1d(np.asarray(probes, dtype=complex))
    if probes.size == 0:
        raise ValueError("need at least one probe")
    ov = np.abs(coherent_overlap(probes[:, None], grid.nodes[None, :])) ** 2
    return float(np.max(np.abs(ov @ grid.weights - 1.0)))
