"""Markovian propagation: vectorization, duality, analytic laws."""

import numpy as np
import pytest
from scipy.linalg import expm

from cohimpact.qops import projector, random_density, random_hermitian
from cohimpact.lindblad import (LindbladModel, adjoint_generator,
                                build_generator, heisenberg_evolve,
                                propagate_state, resolvent_effect, unvec, vec)


def _random_model(dim, n_jumps, seed):
    rng = np.random.default_rng(seed)
    H = random_hermitian(dim, rng=rng, scale=5.0)
    jumps = tuple(0.5 * (rng.standard_normal((dim, dim))
                         + 1j * rng.standard_normal((dim, dim)))
                  for _ in range(n_jumps))
    return LindbladModel(H, jumps)


def test_vec_unvec_roundtrip_is_column_major():
    M = np.arange(9.0).reshape(3, 3) + 1j
    assert np.allclose(unvec(vec(M), 3), M)
    assert vec(M)[1] == M[1, 0]  # column stacking


def test_rabi_oscillation():
    J = 3.0
    H = np.array([[0.0, J], [J, 0.0]], dtype=complex)
    model = LindbladModel(H, ())
    times = np.linspace(0.0, 2.0, 41)
    states = propagate_state(model, projector(2, 0), times)
    pops = np.real([s[0, 0] for s in states])
    assert np.allclose(pops, np.cos(J * times) ** 2, atol=1e-9)


def test_pure_dephasing_decay_rate():
    gamma = 0.8
    jumps = (np.sqrt(gamma) * projector(2, 0), np.sqrt(gamma) * projector(2, 1))
    model = LindbladModel(np.zeros((2, 2)), jumps)
    rho0 = 0.5 * np.ones((2, 2), dtype=complex)
    times = np.linspace(0.0, 3.0, 16)
    states = propagate_state(model, rho0, times)
    coh = np.abs([s[0, 1] for s in states])
    assert np.allclose(coh, 0.5 * np.exp(-gamma * times), atol=1e-9)


def test_trace_preservation_and_positivity():
    model = _random_model(4, 2, seed=0)
    rho0 = random_density(4, seed=1)
    for rho in propagate_state(model, rho0, np.linspace(0.0, 1.0, 11)):
        assert abs(np.trace(rho) - 1.0) < 1e-8
        assert np.linalg.eigvalsh(rho).min() > -1e-7


def test_heisenberg_duality():
    model = _random_model(3, 2, seed=2)
    rho0 = random_density(3, seed=3)
    M = random_hermitian(3, seed=4)
    times = np.linspace(0.0, 0.8, 9)
    states = propagate_state(model, rho0, times)
    series = heisenberg_evolve(model, M, times)
    for rho, M_t in zip(states, series.matrices):
        lhs = np.trace(M_t @ rho0).real
        rhs = np.trace(M @ rho).real
        assert abs(lhs - rhs) < 1e-8


def test_generator_matches_matrix_exponential():
    model = _random_model(3, 1, seed=5)
    L = build_generator(model, sparse=False)
    rho0 = random_density(3, seed=6)
    t = 0.37
    direct = unvec(expm(L * t) @ vec(rho0), 3)
    stepped = propagate_state(model, rho0, np.array([0.0, t]))[-1]
    assert np.abs(direct - stepped).max() < 1e-9


def test_adjoint_is_true_adjoint():
    model = _random_model(3, 2, seed=7)
    L = build_generator(model, sparse=False)
    Ld = adjoint_generator(model, sparse=False)
    assert np.allclose(Ld, L.conj().T, atol=1e-12)


def test_resolvent_effect_matches_time_integral():
    # decaying two-level system: resolvent effect equals the quadrature of
    # the Heisenberg-evolved influx operator
    kappa, gamma = 1.3, 0.4
    L_trap = np.zeros((3, 3), dtype=complex)
    L_trap[2, 1] = np.sqrt(kappa)
    L_loss = np.zeros((3, 3), dtype=complex)
    L_loss[0, 1] = np.sqrt(gamma)
    H = np.zeros((3, 3), dtype=complex)
    model = LindbladModel(H, (L_trap, L_loss))
    m_tilde = L_trap.conj().T @ L_trap
    eff = resolvent_effect(model, m_tilde, order=1, subspace=(1,))
    # analytic: eta = kappa / (kappa + gamma) from the excited level
    assert abs(eff[1, 1].real - kappa / (kappa + gamma)) < 1e-10
    order2 = resolvent_effect(model, m_tilde, order=2, subspace=(1,))
    tau = order2[1, 1].real / eff[1, 1].real
    assert abs(tau - 1.0 / (kappa + gamma)) < 1e-10


def test_times_must_be_sorted():
    model = _random_model(2, 0, seed=8)
    with pytest.raises(ValueError):
        propagate_state(model, projector(2, 0), np.array([0.5, 0.1]))
