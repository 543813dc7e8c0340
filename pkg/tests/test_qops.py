"""Unit conversions, dephasing algebra, and coherence measures."""

import numpy as np
import pytest
import scipy.constants as const

from cohimpact.qops import (CM1_TO_RADPS, KELVIN_TO_RADPS, ConfigError,
                            SiteBasisLabels, convert_units, dephase,
                            extremal_eigenpair, frobenius_norm, ipr,
                            l1_coherence, offdiag_part, operator_norm,
                            projector, random_density, random_hermitian,
                            random_pure_state, relative_entropy_coherence,
                            vonneumann_entropy)


def test_wavenumber_conversion_against_codata():
    # 1 cm^-1 = 2 pi c * 100 / m in rad/s, scaled to rad/ps
    expected = 2.0 * np.pi * const.c * 100.0 * 1e-12
    assert abs(CM1_TO_RADPS - expected) < 1e-12
    assert abs(convert_units(100.0, "cm^-1", "rad/ps") - 18.8365) < 1e-3


def test_kelvin_conversion_against_codata():
    expected = const.k / const.hbar * 1e-12
    assert abs(KELVIN_TO_RADPS - expected) < 1e-12
    assert abs(convert_units(300.0, "K", "rad/ps") - 39.276) < 1e-2


def test_convert_units_rejects_cross_group():
    with pytest.raises(ConfigError):
        convert_units(1.0, "cm^-1", "ps")
    with pytest.raises(ConfigError):
        convert_units(1.0, "furlong", "ps")


def test_dephase_and_offdiag_complement():
    rng = np.random.default_rng(0)
    M = random_hermitian(5, rng=rng)
    assert np.allclose(dephase(M) + offdiag_part(M), M)
    assert np.allclose(dephase(dephase(M)), dephase(M))
    assert np.allclose(np.diag(offdiag_part(M)), 0.0)


def test_operator_norm_matches_eigvalsh():
    rng = np.random.default_rng(1)
    for _ in range(5):
        M = random_hermitian(6, rng=rng)
        assert abs(operator_norm(M) - np.abs(np.linalg.eigvalsh(M)).max()) < 1e-12


def test_extremal_eigenpair_is_consistent():
    M = random_hermitian(5, seed=2)
    val, vec = extremal_eigenpair(M)
    assert abs(abs(val) - operator_norm(M)) < 1e-12
    assert np.allclose(M @ vec, val * vec, atol=1e-10)


def test_frobenius_norm():
    M = random_hermitian(4, seed=3)
    assert abs(frobenius_norm(M) - np.linalg.norm(M, "fro")) < 1e-12


def test_l1_coherence_uniform_pure_state():
    for n in (2, 4, 7):
        psi = np.ones(n) / np.sqrt(n)
        assert abs(l1_coherence(psi) - (n - 1)) < 1e-12
        assert abs(l1_coherence(projector(n, 0))) < 1e-12


def test_ipr_extremes():
    assert abs(ipr(projector(4, 2)) - 1.0) < 1e-12
    psi = np.ones(5) / np.sqrt(5)
    assert abs(ipr(psi) - 0.2) < 1e-12


def test_entropies():
    d = 4
    rho = np.eye(d) / d
    assert abs(vonneumann_entropy(rho) - np.log2(d)) < 1e-12
    psi = np.ones(d) / np.sqrt(d)
    assert abs(relative_entropy_coherence(np.outer(psi, psi)) - np.log2(d)) < 1e-10
    assert abs(relative_entropy_coherence(rho)) < 1e-12


def test_random_states_are_valid():
    rho = random_density(5, seed=4)
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    psi = random_pure_state(5, seed=5)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_labels_validate_donor_mask():
    labels = SiteBasisLabels(("g", "s", "1", "2"), donor_mask=(2, 3))
    assert labels.dim == 4 and labels.index("s") == 1
    with pytest.raises(ConfigError):
        SiteBasisLabels(("a", "a"))
    with pytest.raises(ConfigError):
        SiteBasisLabels(("a", "b"), donor_mask=(5,))
