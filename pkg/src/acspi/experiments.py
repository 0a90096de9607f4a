"""Experiment drivers behind the command line: time series, comparisons, convergence, diagnostics."""

from __future__ import annotations

import io
import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .algebra import (
    PhysicalParams,
    PositionPolynomial,
    fock_matrix,
    ladder_matrices,
    matrix_polynomial,
    position_to_antinormal,
)
from .config import ConfigError, RunConfig
from .oracle import (
    coherent_in_fock,
    evolve_oracle,
    fock_expectation_Q,
    fock_expectation_Q2,
)
from .propagator import (
    expectation_Q,
    expectation_Q2,
    norm_estimate,
    project_initial,
    propagate,
)
from .quadrature import identity_residual, product_grid
from .symbols import q_power_symbols

__all__ = [
    "COLUMNS",
    "Series",
    "run_propagate",
    "run_oracle",
    "run_compare",
    "run_convergence",
    "run_diagnostics",
    "scan_suppression",
    "write_csv",
    "format_float",
]

log = logging.getLogger(__name__)

COLUMNS = ("t", "mean_Q", "mean_Q2", "norm", "method")


def format_float(x: float) -> str:
    return f"{x:.15e}"


@dataclass
class Series:
    """Sampled observables of one run."""

    method: str
    t: List[float] = field(default_factory=list)
    mean_Q: List[float] = field(default_factory=list)
    mean_Q2: List[float] = field(default_factory=list)
    norm: List[float] = field(default_factory=list)
    runtime: float = 0.0

    def append(self, t, q, q2, nrm):
        self.t.append(float(t))
        self.mean_Q.append(float(q))
        self.mean_Q2.append(float(q2))
        self.norm.append(float(nrm))

    def rows(self):
        for row in zip(self.t, self.mean_Q, self.mean_Q2, self.norm):
            yield row + (self.method,)

    def as_arrays(self):
        return np.array(self.t), np.array(self.mean_Q), np.array(self.mean_Q2), np.array(self.norm)


def write_csv(series_list, stream) -> None:
    stream.write(",".join(COLUMNS) + "\n")
    for series in series_list:
        for t, q, q2, nrm, method in series.rows():
            stream.write(",".join([format_float(t), format_float(q), format_float(q2), format_float(nrm), method]) + "\n")


def csv_text(series_list) -> str:
    buf = io.StringIO()
    write_csv(series_list, buf)
    return buf.getvalue()


def _stride(cfg: RunConfig, stride: Optional[int]) -> int:
    return int(stride if stride is not None else cfg.output.stride)


def run_propagate(cfg: RunConfig, stride: Optional[int] = None, S: Optional[float] = None) -> Series:
    """Path-integral propagation, observables every ``stride`` steps (``t = 0`` included)."""
    stride = _stride(cfg, stride)
    params = cfg.params
    grid = cfg.build_grid()
    spec = cfg.potential_spec(S)
    state = project_initial(grid, cfg.alpha0)
    series = Series("acspi")

    def record(t, st):
        series.append(t, expectation_Q(st, params), expectation_Q2(st, params), norm_estimate(st))

    record(0.0, state)
    counter = {"k": 0}

    def observer(t, st):
        counter["k"] += 1
        if counter["k"] % stride == 0 or counter["k"] == cfg.stepping.n_steps:
            record(t, st)

    lim = cfg.limits
    start = time.perf_counter()
    propagate(
        state,
        spec,
        cfg.stepping.t_total,
        cfg.stepping.n_steps,
        cfg.trunc,
        params,
        observer,
        norm_floor=lim.norm_floor,
        norm_ceiling=lim.norm_ceiling,
        check_every=lim.check_every,
        degree_cap=lim.degree_cap,
    )
    series.runtime = time.perf_counter() - start
    return series


def _oracle_schedule(cfg: RunConfig, stride: int):
    """Oracle step count and sampling stride landing on the path-integral sample times."""
    n = cfg.stepping.n_steps
    n_or = cfg.oracle.n_steps or n
    if (stride * n_or) % n:
        raise ConfigError(
            f"oracle.n_steps={n_or} cannot sample every {stride} of {n} steps; "
            "stride·oracle.n_steps/n_steps must be an integer"
        )
    return n_or, stride * n_or // n


def run_oracle(cfg: RunConfig, stride: Optional[int] = None, S: Optional[float] = None) -> Series:
    """Fock-basis reference on the same sample times as :func:`run_propagate`."""
    stride = _stride(cfg, stride)
    params = cfg.params
    spec = cfg.potential_spec(S)
    n = cfg.stepping.n_steps
    n_or, stride_or = _oracle_schedule(cfg, stride)
    # the final sample of run_propagate falls on the last step even off-stride
    final_extra = n % stride != 0
    series = Series("fock")
    state = coherent_in_fock(cfg.alpha0, cfg.oracle.dim)

    def record(t, st):
        series.append(t, fock_expectation_Q(st, params), fock_expectation_Q2(st, params), st.norm)

    record(0.0, state)
    counter = {"k": 0}

    def observer(t, st):
        counter["k"] += 1
        if counter["k"] % stride_or == 0 or (final_extra and counter["k"] == n_or):
            record(t, st)

    start = time.perf_counter()
    evolve_oracle(state, spec, cfg.stepping.t_total, n_or, params, observer)
    series.runtime = time.perf_counter() - start
    return series


@dataclass
class Comparison:
    acspi: Series
    fock: Series
    delta: Series
    max_dev: float
    mean_dev: float

    def summary(self) -> str:
        return (
            f"summary max_dev={self.max_dev:.6e} mean_dev={self.mean_dev:.6e} "
            f"runtime_acspi_s={self.acspi.runtime:.3f} runtime_fock_s={self.fock.runtime:.3f}"
        )


def compare_series(a: Series, b: Series) -> Comparison:
    ta, qa, q2a, na = a.as_arrays()
    tb, qb, q2b, nb = b.as_arrays()
    if ta.shape != tb.shape or not np.allclose(ta, tb, rtol=1e-12, atol=1e-12):
        raise ValueError("series are sampled at different times")
    delta = Series("delta")
    dq = np.abs(qa - qb)
    for t, d1, d2, d3 in zip(ta, dq, np.abs(q2a - q2b), np.abs(na - nb)):
        delta.append(t, d1, d2, d3)
    return Comparison(a, b, delta, float(dq.max()), float(dq.mean()))


def run_compare(cfg: RunConfig, stride: Optional[int] = None, S: Optional[float] = None) -> Comparison:
    a = run_propagate(cfg, stride, S)
    b = run_oracle(cfg, stride, S)
    return compare_series(a, b)


@dataclass
class ConvergenceRow:
    axis: str
    value: int
    max_dev: float
    identity_residual: float
    order: float


CONVERGENCE_COLUMNS = ("axis", "value", "max_dev", "identity_residual", "order")


def _coverage_probes(cfg: RunConfig) -> np.ndarray:
    a0 = cfg.alpha0
    ring = a0 + np.exp(2j * np.pi * np.arange(8) / 8)
    probes = [a0, *ring]
    if cfg.potential.type == "double_well":
        probes += [-a0, *(-ring)]
    return np.array(probes)


def run_convergence(cfg: RunConfig, axis: str, stride: Optional[int] = None) -> List[ConvergenceRow]:
    """Max ``|<Q>_acspi - <Q>_fock|`` versus one numerical parameter.

    Defaults: ``n_steps`` doubles three times from the configured value,
    ``K`` runs 4..8, ``grid`` uses square grids of 16, 24, 32 points per axis.
    The estimated order is ``log(e_prev/e) / log(value/value_prev)``.
    """
    conv = cfg.convergence
    stride = _stride(cfg, stride)
    n0 = cfg.stepping.n_steps
    if axis == "n_steps":
        values = conv.n_steps or [n0, 2 * n0, 4 * n0, 8 * n0]
    elif axis == "K":
        values = conv.K or [4, 5, 6, 7, 8]
    elif axis == "grid":
        values = conv.grid or [16, 24, 32]
    else:
        raise ConfigError(f"unknown convergence axis {axis!r}")

    # the oracle samples on the coarsest run's times
    base_n = values[0] if axis == "n_steps" else n0
    base = cfg.with_updates(stepping={"n_steps": base_n})
    if axis == "n_steps" and cfg.oracle.n_steps is None:
        base = base.with_updates(oracle={"n_steps": values[-1]})
    reference = run_oracle(base, stride)
    _, q_ref, _, _ = reference.as_arrays()

    probes = _coverage_probes(cfg)
    rows: List[ConvergenceRow] = []
    for value in values:
        if axis == "n_steps":
            if value % base_n:
                raise ConfigError("convergence.n_steps values must be multiples of the first")
            run_cfg = cfg.with_updates(stepping={"n_steps": value})
            run_stride = stride * value // base_n
        elif axis == "K":
            run_cfg = cfg.with_updates(stepping={"K": value})
            run_stride = stride
        else:
            g = cfg.grid_settings().model_dump()
            g.update(n_re=value, n_im=value)
            run_cfg = cfg.with_updates(grid=g)
            run_stride = stride
        series = run_propagate(run_cfg, run_stride)
        _, q, _, _ = series.as_arrays()
        err = float(np.max(np.abs(q - q_ref)))
        res = identity_residual(run_cfg.build_grid(), probes)
        order = float("nan")
        if rows and err > 0 and rows[-1].max_dev > 0:
            order = math.log(rows[-1].max_dev / err) / math.log(value / rows[-1].value)
        rows.append(ConvergenceRow(axis, value, err, res, order))
        log.info("convergence %s=%s max_dev=%.3e residual=%.3e", axis, value, err, res)
    return rows


def convergence_csv(rows: List[ConvergenceRow]) -> str:
    lines = [",".join(CONVERGENCE_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                [r.axis, str(r.value), format_float(r.max_dev), format_float(r.identity_residual), format_float(r.order)]
            )
        )
    return "\n".join(lines) + "\n"


# -- diagnostics ---------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} {status} measured={self.measured:.3e} tolerance={self.tolerance:.1e}"


def fock_number_overlaps(alphas: np.ndarray, n_max: int) -> np.ndarray:
    """``<n|α>`` for ``n = 0..n_max``; rows index ``n``."""
    alphas = np.asarray(alphas, dtype=complex)
    out = np.empty((n_max + 1, alphas.size), dtype=complex)
    out[0] = np.exp(-0.5 * np.abs(alphas) ** 2)
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * alphas / math.sqrt(n)
    return out


def symbol_reconstruction_error(
    params: PhysicalParams, max_k: int = 8, n_max: int = 12, n_grid: int = 64
) -> float:
    """Worst relative error of ``∫ d²α/π S_k(α) <n|α><α|n'>`` against ``<n|Q^k|n'>``.

    Relative to the largest matrix element of each ``Q^k`` block.
    """
    grid = product_grid(n_grid, n_grid)
    overlaps = fock_number_overlaps(grid.nodes, n_max)
    symbols = q_power_symbols(max_k, params)
    a, ad = ladder_matrices(n_max + 1 + max_k)
    q = params.lam * (a + ad)
    worst = 0.0
    for k, sym in enumerate(symbols):
        weighted = overlaps * (grid.weights * sym(grid.nodes))[None, :]
        numeric = weighted @ overlaps.conj().T
        exact = np.linalg.matrix_power(q, k)[: n_max + 1, : n_max + 1]
        err = np.max(np.abs(numeric - exact)) / np.max(np.abs(exact))
        worst = max(worst, float(err))
    return worst


def ordering_oracle_error(params: PhysicalParams, n_polys: int = 50, max_degree: int = 8, dim: int = 40, block: int = 28, seed: int = 20240601) -> float:
    """Worst relative mismatch between antinormal Fock matrices and direct ``p(Q)`` matrices."""
    rng = np.random.default_rng(seed)
    a, ad = ladder_matrices(dim)
    q = params.lam * (a + ad)
    worst = 0.0
    for _ in range(n_polys):
        deg = int(rng.integers(0, max_degree + 1))
        coeffs = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        p = PositionPolynomial(tuple(coeffs))
        lhs = fock_matrix(position_to_antinormal(p, params), dim)[:block, :block]
        rhs = matrix_polynomial(p.coeffs, q)[:block, :block]
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))))
    return worst


def run_diagnostics(cfg: RunConfig) -> List[Check]:
    params = cfg.params
    checks = []
    err = symbol_reconstruction_error(params)
    checks.append(Check("symbol_reconstruction", err <= 1e-6, err, 1e-6))
    res = identity_residual(cfg.build_grid(), _coverage_probes(cfg))
    checks.append(Check("grid_identity_residual", res <= 1e-6, res, 1e-6))
    err = ordering_oracle_error(params)
    checks.append(Check("ordering_vs_fock", err <= 1e-10, err, 1e-10))
    a = q_power_symbols(8, params, "ordering")
    b = q_power_symbols(8, params, "desmoothing")
    dev = max(
        max(abs(x.coefficient(*key) - y.coefficient(*key)) for key in set(x.terms) | set(y.terms))
        for x, y in zip(a, b)
    )
    checks.append(Check("symbol_routes_agree", dev <= 1e-10, dev, 1e-10))
    return checks


# -- suppression scan ------------------------------------------------------


@dataclass
class ScanPoint:
    S: float
    min_signed_Q: float


def scan_suppression(cfg: RunConfig, amplitudes, horizon: float, n_steps: int, stride: int = 1) -> List[ScanPoint]:
    """Oracle-only scan: worst ``sign(<Q>(0))·<Q>(t)`` over ``[0, horizon]`` per drive amplitude."""
    params = cfg.params
    sign = math.copysign(1.0, cfg.alpha0.real) if cfg.alpha0.real else 1.0
    out = []
    for S in amplitudes:
        spec = cfg.potential_spec(float(S))
        state = coherent_in_fock(cfg.alpha0, cfg.oracle.dim)
        worst = [sign * fock_expectation_Q(state, params)]
        counter = {"k": 0}

        def observer(t, st):
            counter["k"] += 1
            if counter["k"] % stride == 0:
                worst[0] = min(worst[0], sign * fock_expectation_Q(st, params))

        evolve_oracle(state, spec, horizon, n_steps, params, observer)
        out.append(ScanPoint(float(S), worst[0]))
        log.info("scan S=%.6g min signed <Q>=%.4f", S, worst[0])
    return out
