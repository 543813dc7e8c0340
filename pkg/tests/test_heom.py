"""Hierarchy engine: bath expansion, analytic limits, reconstruction."""

import numpy as np
import pytest

from cohimpact.qops import (CM1_TO_RADPS, KELVIN_TO_RADPS, ConfigError,
                            SiteBasisLabels, projector, random_hermitian)
from cohimpact.lindblad import LindbladModel, heisenberg_evolve, propagate_state, resolvent_effect
from cohimpact.heom import (DrudeLorentzBath, HeomModel, bath_expansion,
                            build_hierarchy, heom_resolvent_effect,
                            hierarchy_indices, matsubara_residual,
                            probe_states, propagate_heom,
                            reconstruct_observable)

T300 = 300.0 * KELVIN_TO_RADPS


def test_bath_expansion_coefficients():
    bath = DrudeLorentzBath(reorg=10.0, cutoff=50.0, temperature=T300, n_matsubara=4)
    c, nu = bath_expansion(bath)
    beta = 1.0 / T300
    assert abs(nu[0] - 50.0) < 1e-12
    pole = 10.0 * 50.0 * (1.0 / np.tan(beta * 50.0 / 2.0) - 1j)
    assert abs(c[0] - pole) < 1e-9
    for k in range(1, 5):
        nuk = 2.0 * np.pi * k / beta
        assert abs(nu[k] - nuk) < 1e-9
        ck = 4.0 * 10.0 * 50.0 / beta * nuk / (nuk ** 2 - 50.0 ** 2)
        assert abs(c[k] - ck) < 1e-9


def test_drude_pole_high_temperature_amplitude():
    # classical limit: Re c_0 -> 2 E_R k_B T
    er, gc = 3.0, 10.0
    T = 12.0 * gc
    bath = DrudeLorentzBath(er, gc, T)
    c, _ = bath_expansion(bath)
    assert abs(c[0].real - 2.0 * er * T) / (2.0 * er * T) < 1e-2


def test_matsubara_residual_decreases():
    baths = [DrudeLorentzBath(5.0, 40.0, T300, n_matsubara=k) for k in (1, 3, 6)]
    res = [matsubara_residual(b) for b in baths]
    assert res[0] > res[1] > res[2] > 0.0


def test_hierarchy_index_count():
    from math import comb
    for n_exp, depth in ((2, 3), (4, 2), (3, 4)):
        indices, index_map = hierarchy_indices(n_exp, depth)
        assert len(indices) == comb(n_exp + depth, depth)
        assert index_map[tuple([0] * n_exp)] == 0


def test_memory_budget_is_enforced():
    bath = DrudeLorentzBath(5.0, 40.0, T300, n_matsubara=10)
    model = HeomModel(np.zeros((8, 8)), couplings=tuple(projector(8, i) for i in range(8)),
                      baths=(bath,) * 8, depth=12)
    with pytest.raises(ConfigError):
        build_hierarchy(model)


def test_unitary_limit_matches_rabi():
    J = 5.0
    H = np.array([[0.0, J], [J, 0.0]], dtype=complex)
    bath = DrudeLorentzBath(1e-9, 100.0, T300, n_matsubara=1)
    model = HeomModel(H, couplings=(projector(2, 0),), baths=(bath,), depth=3)
    times = np.linspace(0.0, 1.0, 11)
    states = propagate_heom(model, projector(2, 0), times)
    pops = np.real([s[0, 0] for s in states])
    assert np.abs(pops - np.cos(J * times) ** 2).max() < 1e-6


def test_exact_pure_dephasing_law():
    # diagonal coupling: coherence obeys the closed-form decoherence integral
    eps = 10.0
    H = np.diag([eps / 2.0, -eps / 2.0]).astype(complex)
    bath = DrudeLorentzBath(reorg=8.0, cutoff=30.0, temperature=T300, n_matsubara=3)
    model = HeomModel(H, couplings=(projector(2, 0),), baths=(bath,), depth=6)
    psi = np.array([1.0, 1.0]) / np.sqrt(2.0)
    times = np.linspace(0.0, 0.4, 9)
    states = propagate_heom(model, np.outer(psi, psi), times)
    coh = np.array([s[0, 1] for s in states])
    # reference from a near-converged Matsubara sum
    ref_bath = DrudeLorentzBath(8.0, 30.0, T300, n_matsubara=200)
    c, nu = bath_expansion(ref_bath)
    phi = np.array([np.sum(c * (np.exp(-nu * t) - 1.0 + nu * t) / nu ** 2)
                    for t in times])
    expected = 0.5 * np.exp(-1j * eps * times) * np.exp(-phi)
    assert np.abs(coh - expected).max() < 5e-3


def test_thermal_state_detailed_balance():
    # the fast, hot bath drives the dimer toward the system Gibbs state
    J = 100.0 * CM1_TO_RADPS
    er = J / 10.0
    tau_c = 2.65e-3
    H = np.array([[J / 2.0, J], [J, -J / 2.0]], dtype=complex)
    bath = DrudeLorentzBath(er, 1.0 / tau_c, T300, n_matsubara=3)
    model = HeomModel(H, couplings=(projector(2, 0), projector(2, 1)),
                      baths=(bath, bath), depth=5)
    times = np.linspace(0.0, 1.0, 5)
    rho_end = propagate_heom(model, projector(2, 0), times)[-1]
    w, V = np.linalg.eigh(H)
    boltz = np.exp(-w / T300)
    boltz /= boltz.sum()
    pd_thermal = float(np.abs(V[0, :]) ** 2 @ boltz)
    assert abs(rho_end[0, 0].real - pd_thermal) < 0.01


def test_probe_reconstruction_with_identity_dynamics():
    dim = 3
    M = random_hermitian(dim, seed=21)
    times = np.array([0.0, 0.5])

    def propagate(rho0, ts):
        return [np.array(rho0, dtype=complex) for _ in ts]

    series = reconstruct_observable(propagate, dim, M, times)
    for M_t in series.matrices:
        assert np.abs(M_t - M).max() < 1e-12


def test_probe_reconstruction_with_lindblad_dynamics():
    rng = np.random.default_rng(22)
    dim = 3
    H = random_hermitian(dim, rng=rng, scale=3.0)
    L = 0.4 * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    model = LindbladModel(H, (L,))
    M = random_hermitian(dim, rng=rng)
    times = np.linspace(0.0, 0.6, 5)

    def propagate(rho0, ts):
        return propagate_state(model, rho0, ts)

    series = reconstruct_observable(propagate, dim, M, times)
    direct = heisenberg_evolve(model, M, times)
    assert max(np.abs(a - b).max() for a, b in
               zip(series.matrices, direct.matrices)) < 1e-8


def test_probe_states_span_support():
    probes = probe_states(4, support=(1, 2))
    for rho in probes:
        assert abs(np.trace(rho) - 1.0) < 1e-12


def test_heom_resolvent_decoupling_limit():
    # vanishing bath coupling: the hierarchy resolvent agrees with Lindblad
    kappa, gamma = 1.0, 0.1
    H = np.zeros((3, 3), dtype=complex)
    H[1, 1] = 1.0
    L_trap = np.zeros((3, 3), dtype=complex)
    L_trap[2, 1] = np.sqrt(kappa)
    L_loss = np.zeros((3, 3), dtype=complex)
    L_loss[0, 1] = np.sqrt(gamma)
    bath = DrudeLorentzBath(1e-10, 100.0, T300, n_matsubara=1)
    labels = SiteBasisLabels(("g", "1", "s"), donor_mask=(1,))
    hmodel = HeomModel(H, couplings=(projector(3, 1),), baths=(bath,),
                       depth=3, jumps=(L_trap, L_loss), labels=labels)
    lmodel = LindbladModel(H, (L_trap, L_loss))
    m_tilde = L_trap.conj().T @ L_trap
    heom_eff = heom_resolvent_effect(hmodel, m_tilde, order=1)
    lind_eff = resolvent_effect(lmodel, m_tilde, order=1, subspace=(1,))
    assert abs(heom_eff[1, 1] - kappa / (kappa + gamma)) < 1e-6
    assert np.abs(heom_eff - lind_eff).max() < 1e-6
