import logging
import math

import numpy as np
import pytest

from acspi import oracle
from acspi.algebra import PhysicalParams
from acspi.models import double_well, harmonic
from acspi.oracle import (
    ConvergenceError,
    FockState,
    coherent_in_fock,
    desk_Q0,
    evolve_oracle,
    fock_expectation_Q,
    fock_expectation_Q2,
    hamiltonian_matrix,
    transfer_time,
    tunneling_splitting,
)
from acspi.quadrature import coherent_overlap

UNIT = PhysicalParams()
DESK_Q0 = 3.5493201436960127


def test_vacuum_in_fock():
    c = coherent_in_fock(0, 5).c
    assert c.tolist() == [1, 0, 0, 0, 0]


def test_coherent_amplitudes():
    c = coherent_in_fock(1.0, 4).c
    e = math.exp(-0.5)
    assert np.allclose(c, [e, e, e / math.sqrt(2), e / math.sqrt(6)], rtol=1e-14)


def test_coherent_truncation_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="acspi.oracle"):
        st = coherent_in_fock(5.0, 10)
    assert st.norm < 0.9
    assert "loses" in caplog.text


def test_coherent_rejects_empty():
    with pytest.raises(ValueError):
        coherent_in_fock(1.0, 0)


@pytest.mark.parametrize("alpha,beta", [(0.3, -0.4j), (2 + 1j, 1.5 - 0.5j), (-3, 3j)])
def test_fock_overlap_matches_closed_form(alpha, beta):
    a = coherent_in_fock(alpha, 80).c
    b = coherent_in_fock(beta, 80).c
    assert np.vdot(a, b) == pytest.approx(coherent_overlap(alpha, beta), abs=1e-10)


def test_harmonic_hamiltonian_is_diagonal():
    params = PhysicalParams(hbar=0.7, mass=1.3, omega0=2.0)
    H = hamiltonian_matrix(harmonic(params), 0.0, params, 12)
    assert np.allclose(H, np.diag(params.hbar * params.omega0 * (np.arange(12) + 0.5)), atol=1e-13)


def test_hamiltonian_hermitian_and_drive_couples_neighbours():
    spec = double_well(UNIT, 3.0, S=0.2, omega=0.5)
    H = hamiltonian_matrix(spec, 1.1, UNIT, 30)
    assert np.array_equal(H, H.conj().T)
    H0 = hamiltonian_matrix(spec, 0.0, UNIT, 30)
    diff = H - H0
    expected = 0.2 * math.sin(0.55) * UNIT.lam * np.sqrt(np.arange(1, 30))
    assert np.allclose(np.diag(diff, 1), expected, atol=1e-12)
    assert np.allclose(np.diag(diff), 0, atol=1e-12)


def test_harmonic_splitting_is_quantum():
    params = PhysicalParams(omega0=1.7)
    assert tunneling_splitting(harmonic(params), params, dim=40) == pytest.approx(1.7, rel=1e-10)


def test_splitting_small_and_shrinking_with_q0():
    splits = [tunneling_splitting(double_well(UNIT, q), UNIT) for q in (2.5, 3.0, 3.5, 4.0)]
    assert all(s > 0 for s in splits)
    assert all(a > b for a, b in zip(splits, splits[1:]))
    # the doublet is far below the oscillator spacing
    assert splits[-1] < 1e-3 * UNIT.hbar * UNIT.omega0


def test_splitting_rejects_driven():
    with pytest.raises(ValueError):
        tunneling_splitting(double_well(UNIT, 3.0, S=0.01, omega=0.1), UNIT)


def test_splitting_unconverged_basis():
    with pytest.raises(ConvergenceError):
        tunneling_splitting(double_well(UNIT, 4.0), UNIT, dim=20)


def test_desk_q0_frozen_value():
    q0 = desk_Q0(2000.0, UNIT)
    assert q0 == pytest.approx(DESK_Q0, rel=1e-9)
    assert transfer_time(double_well(UNIT, q0), UNIT) == pytest.approx(2000.0, rel=1e-8)


def test_evolution_preserves_norm():
    spec = double_well(UNIT, 3.0, S=0.05, omega=0.3)
    out = evolve_oracle(coherent_in_fock(2.0, 80), spec, 20.0, 200, UNIT)
    assert out.norm == pytest.approx(1.0, abs=1e-12)
    assert out.time == pytest.approx(20.0)


def test_harmonic_mean_position():
    params = PhysicalParams(hbar=1.0, mass=0.8, omega0=1.4)
    alpha0 = 1.1 + 0.4j
    devs = []

    def obs(t, st):
        expected = 2 * params.lam * abs(alpha0) * math.cos(params.omega0 * t - np.angle(alpha0))
        devs.append(abs(fock_expectation_Q(st, params) - expected))

    evolve_oracle(coherent_in_fock(alpha0, 60), harmonic(params), 10.0, 100, params, obs)
    assert max(devs) <= 1e-9


def test_static_energy_conserved():
    spec = double_well(UNIT, 3.0)
    H = hamiltonian_matrix(spec, 0.0, UNIT, 120)
    start = coherent_in_fock(3.0 / (2 * UNIT.lam), 120)
    out = evolve_oracle(start, spec, 50.0, 37, UNIT)
    e0 = np.vdot(start.c, H @ start.c).real
    e1 = np.vdot(out.c, H @ out.c).real
    assert e1 == pytest.approx(e0, rel=1e-12)


def test_static_step_count_irrelevant():
    spec = double_well(UNIT, 3.0)
    start = coherent_in_fock(2.0, 100)
    a = evolve_oracle(start, spec, 30.0, 1, UNIT)
    b = evolve_oracle(start, spec, 30.0, 300, UNIT)
    assert np.allclose(a.c, b.c, atol=1e-10)


def test_static_tunneling_transfers_packet():
    q0 = 2.5
    spec = double_well(UNIT, q0)
    tt = transfer_time(spec, UNIT)
    start = coherent_in_fock(q0 / (2 * UNIT.lam), 150)
    q_start = fock_expectation_Q(start, UNIT)
    half = evolve_oracle(start, spec, tt, 1, UNIT)
    full = evolve_oracle(start, spec, 2 * tt, 1, UNIT)
    assert fock_expectation_Q(half, UNIT) < -0.5 * q_start
    assert fock_expectation_Q(full, UNIT) > 0.5 * q_start


def test_dimension_invariance():
    spec = double_well(UNIT, DESK_Q0, S=0.02, omega=0.3)
    alpha0 = DESK_Q0 / (2 * UNIT.lam)
    qs = []
    for dim in (100, 130):
        out = evolve_oracle(coherent_in_fock(alpha0, dim), spec, 40.0, 400, UNIT)
        qs.append(fock_expectation_Q(out, UNIT))
    assert abs(qs[0] - qs[1]) <= 1e-8


def test_periodic_cache_matches_uncached():
    # the drive period is exactly 20 steps; a zero byte budget forces per-step rebuilds
    omega = 2 * math.pi / 2.0
    spec = double_well(UNIT, 3.0, S=0.1, omega=omega)
    start = coherent_in_fock(2.0, 60)
    cached = evolve_oracle(start, spec, 6.0, 60, UNIT)
    saved = oracle.UNITARY_CACHE_BYTES
    oracle.UNITARY_CACHE_BYTES = 0
    try:
        plain = evolve_oracle(start, spec, 6.0, 60, UNIT)
    finally:
        oracle.UNITARY_CACHE_BYTES = saved
    assert np.allclose(cached.c, plain.c, atol=1e-13)


def test_fock_expectations_examples():
    st = coherent_in_fock(2.0, 60)
    assert fock_expectation_Q(st, UNIT) == pytest.approx(2 * math.sqrt(2), abs=1e-10)
    assert fock_expectation_Q2(st, UNIT) == pytest.approx(8.5, abs=1e-10)
    vac = FockState(np.array([1, 0, 0], dtype=complex))
    assert fock_expectation_Q(vac, UNIT) == 0.0
    assert fock_expectation_Q2(vac, UNIT) == pytest.approx(UNIT.lam**2, rel=1e-15)


def test_rejects_bad_steps():
    with pytest.raises(ValueError):
        evolve_oracle(coherent_in_fock(0, 5), harmonic(UNIT), 1.0, 0, UNIT)
