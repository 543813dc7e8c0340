"""Core operator algebra: dephasing, norms, coherence measures, units.

All energies are handled internally as angular frequencies in rad/ps with
hbar = 1; time is in ps. User-facing parameters in cm^-1 / fs / K are
converted at the boundary via :func:`convert_units`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as _C_LIGHT, hbar as _HBAR, k as _KB

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
ENTROPY_EIG_FLOOR = 1e-14


class DimensionError(ValueError):
    """Operator shape does not match the expected square dimension."""


class StateError(ValueError):
    """Input violates a density-state invariant (trace, positivity)."""


class PurityError(StateError):
    """Input is not a pure state within tolerance."""


class StabilityError(RuntimeError):
    """A generator restricted to the requested block is not strictly stable."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy contract."""


class ConfigError(ValueError):
    """Invalid configuration (unknown unit, bad parameter combination)."""


# ---------------------------------------------------------------------------
# unit system
# ---------------------------------------------------------------------------

#: 1 cm^-1 expressed as angular frequency in rad/ps.
CM1_TO_RADPS = 2.0 * np.pi * _C_LIGHT * 100.0 * 1e-12
#: 1 K expressed as energy k_B*T/hbar in rad/ps.
KELVIN_TO_RADPS = (_KB / _HBAR) * 1e-12

_ENERGY_UNITS = {"cm^-1": CM1_TO_RADPS, "rad/ps": 1.0, "K": KELVIN_TO_RADPS}
_TIME_UNITS = {"ps": 1.0, "fs": 1e-3}


def convert_units(value, from_unit, to_unit):
    """Convert between the supported energy (cm^-1, rad/ps, K) and time
    (fs, ps) units. Energy and time are separate groups; hbar = 1."""
    if from_unit in _ENERGY_UNITS and to_unit in _ENERGY_UNITS:
        return value * _ENERGY_UNITS[from_unit] / _ENERGY_UNITS[to_unit]
    if from_unit in _TIME_UNITS and to_unit in _TIME_UNITS:
        return value * _TIME_UNITS[from_unit] / _TIME_UNITS[to_unit]
    known = set(_ENERGY_UNITS) | set(_TIME_UNITS)
    if from_unit not in known:
        raise ConfigError(f"unknown unit {from_unit!r}")
    if to_unit not in known:
        raise ConfigError(f"unknown unit {to_unit!r}")
    raise ConfigError(f"cannot convert {from_unit!r} to {to_unit!r}")


# ---------------------------------------------------------------------------
# basis labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SiteBasisLabels:
    """Ordered basis-slot labels with the donor-manifold subset."""

    names: tuple
    donor_mask: tuple = field(default=())

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ConfigError("basis labels must be unique")
        for i in self.donor_mask:
            if not 0 <= i < len(self.names):
                raise ConfigError(f"donor slot {i} out of range")

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def as_square(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def as_hermitian(M, tol=HERMITICITY_TOL, validate=True):
    """Validate Hermiticity relative to the largest entry magnitude."""
    M = as_square(M)
    if validate:
        scale = max(np.abs(M).max(), 1.0)
        if np.abs(M - M.conj().T).max() > tol * scale:
            raise DimensionError("matrix is not Hermitian within tolerance")
    return M


def as_density(rho, trace_tol=TRACE_TOL, pos_tol=POSITIVITY_TOL, validate=True):
    """Validate the density-state invariants (Hermitian, unit trace, psd)."""
    rho = as_hermitian(rho, validate=validate)
    if validate:
        if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
            raise StateError(f"trace {np.trace(rho)} != 1")
        w = np.linalg.eigvalsh(hermitize(rho))
        if w.min() < -pos_tol:
            raise StateError(f"negative eigenvalue {w.min():.3e}")
    return rho


def hermitize(M):
    """Project onto the Hermitian part, (M + M^dag)/2."""
    return 0.5 * (M + M.conj().T)


# ---------------------------------------------------------------------------
# dephasing map and norms
# ---------------------------------------------------------------------------


def dephase(M):
    """Complete dephasing in the computational (site) basis: zero all
    off-diagonal entries, keep the diagonal exactly."""
    M = as_square(M)
    return np.diag(np.diag(M))


def offdiag_part(M):
    """Off-diagonal part M - dephase(M); zero diagonal by construction."""
    M = as_square(M)
    out = M.copy()
    np.fill_diagonal(out, 0.0)
    return out


def operator_norm(M):
    """Spectral norm of a Hermitian matrix = eigenvalue of largest magnitude."""
    M = as_square(M)
    try:
        w = np.linalg.eigvalsh(hermitize(M))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc
    return float(np.abs(w).max())


def extremal_eigenpair(M):
    """(eigenvalue, eigenvector) of the Hermitian M with largest |eigenvalue|.

    Phase convention: the largest-magnitude component of the vector is made
    real and positive.
    """
    M = as_square(M)
    w, v = np.linalg.eigh(hermitize(M))
    i = int(np.abs(w).argmax())
    vec = v[:, i]
    j = int(np.abs(vec).argmax())
    phase = vec[j] / abs(vec[j])
    return float(w[i]), vec / phase


def frobenius_norm(M):
    return float(np.linalg.norm(np.asarray(M)))


# ---------------------------------------------------------------------------
# coherence / delocalization measures
# ---------------------------------------------------------------------------


def _pure_amplitudes(state, tol=1e-8):
    """Extract an amplitude vector from a state vector or rank-1 density."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        n = np.linalg.norm(state)
        if n == 0:
            raise PurityError("zero vector is not a state")
        return state / n
    rho = as_square(state)
    w, v = np.linalg.eigh(hermitize(rho))
    if rho.shape[0] > 1 and w[-2] > tol:
        raise PurityError(f"second eigenvalue {w[-2]:.3e} exceeds purity tolerance")
    return v[:, -1]


def l1_coherence(state):
    """l1-coherence of a pure state: sum_{n != m} |psi_n psi_m| = ||psi||_1^2 - 1."""
    psi = _pure_amplitudes(state)
    a = np.abs(psi)
    return float(a.sum() ** 2 - 1.0)


def ipr(state):
    """Inverse participation ratio sum_n |psi_n|^4 of a pure state."""
    psi = _pure_amplitudes(state)
    return float((np.abs(psi) ** 4).sum())


def participation_ratio(state):
    return 1.0 / ipr(state)


def vonneumann_entropy(rho, base=2.0):
    """Entropy of a density matrix; eigenvalues below the floor are clamped."""
    rho = as_density(rho)
    w = np.linalg.eigvalsh(hermitize(rho))
    w = w[w > ENTROPY_EIG_FLOOR]
    return float(-(w * np.log(w)).sum() / np.log(base))


def relative_entropy_coherence(rho, base=2.0):
    """S(dephase(rho)) - S(rho), nonnegative; default base 2 (bits)."""
    rho = as_density(rho)
    s_deph = vonneumann_entropy(dephase(rho), base=base)
    s = vonneumann_entropy(rho, base=base)
    return max(0.0, s_deph - s)


# ---------------------------------------------------------------------------
# random states (seeded, deterministic)
# ---------------------------------------------------------------------------


def random_pure_state(dim, seed=None, rng=None):
    """Haar-distributed pure state vector."""
    rng = np.random.default_rng(seed) if rng is None else rng
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def random_density(dim, seed=None, rng=None, rank=None):
    """Trace-normalized Wishart mixed state G G^dag / Tr."""
    rng = np.random.default_rng(seed) if rng is None else rng
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim, seed=None, rng=None, scale=1.0):
    rng = np.random.default_rng(seed) if rng is None else rng
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitize(a) * scale


def projector(dim, i):
    """|i><i| on a dim-dimensional space."""
    p = np.zeros((dim, dim), dtype=complex)
    p[i, i] = 1.0
    return p
