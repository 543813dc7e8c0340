"""Impact functional: spectral value, sampled lower bounds, restrictions."""

import numpy as np
import pytest

from cohimpact.qops import projector, random_density, random_hermitian
from cohimpact.lindblad import LindbladModel, heisenberg_evolve
from cohimpact.impact import (brute_force_impact, impact_from_series,
                              impact_value, restricted_impact,
                              support_restricted_impact, utilization)


def test_diagonal_observable_has_zero_impact():
    assert impact_value(np.diag([1.0, -2.0, 0.5])) == 0.0


def test_two_level_impact_is_coupling_magnitude():
    b = 0.3 - 0.4j
    M = np.array([[1.0, b], [np.conj(b), -1.0]])
    assert abs(impact_value(M) - abs(b)) < 1e-12


def test_brute_force_never_exceeds_and_approaches_spectral():
    rng = np.random.default_rng(11)
    for _ in range(5):
        M = random_hermitian(4, rng=rng)
        exact = impact_value(M)
        est = brute_force_impact(M, samples=20000, seed=int(rng.integers(1 << 30)))
        assert est <= exact + 1e-10
        assert est >= 0.98 * exact


def test_restricted_impact_is_a_lower_bound():
    M = random_hermitian(5, seed=12)
    exact = impact_value(M)
    states = [random_density(5, seed=k) for k in range(20)]
    assert restricted_impact(M, states, samples=0) <= exact + 1e-12
    with pytest.raises(ValueError):
        restricted_impact(M, [], samples=0)


def test_support_restriction():
    M = random_hermitian(6, seed=13)
    full = impact_value(M)
    assert support_restricted_impact(M, (2,)) == 0.0  # no off-diagonal left
    assert support_restricted_impact(M, (1, 3)) <= full + 1e-12
    assert abs(support_restricted_impact(M, range(6)) - full) < 1e-12
    with pytest.raises(ValueError):
        support_restricted_impact(M, (9,))


def test_impact_series_and_utilization_bound():
    J = 2.0
    H = np.array([[0.0, J], [J, 0.0]], dtype=complex)
    model = LindbladModel(H, (np.sqrt(0.3) * projector(2, 0),
                              np.sqrt(0.3) * projector(2, 1)))
    times = np.linspace(0.0, 1.5, 21)
    M = projector(2, 0).astype(complex)
    _, curve = impact_from_series(heisenberg_evolve(model, M, times))
    assert curve.min() >= 0.0
    psi = np.array([1.0, 1.0]) / np.sqrt(2.0)
    points = utilization(model, np.outer(psi, psi), M, times)
    for p in points:
        assert p.delta_y <= p.impact + 1e-10
        if p.ratio is not None:
            assert p.ratio <= 1.0 + 1e-9
