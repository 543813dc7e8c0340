"""The coherence impact functional and its estimators.

For a Hermitian readout M and dynamics Lambda_t, the impact value at time t
is the spectral norm of the off-diagonal part of the Heisenberg observable
M_t. The sampling estimators below provide independent lower bounds.
"""

from dataclasses import dataclass

import numpy as np

from .qops import (
    as_hermitian,
    dephase,
    offdiag_part,
    operator_norm,
)
from .lindblad import heisenberg_evolve

#: impact values below this are treated as zero for ratio reporting
RATIO_FLOOR = 1e-12


def impact_value(M_t):
    """C for a single Heisenberg observable: ||offdiag(M_t)||_inf."""
    return operator_norm(offdiag_part(as_hermitian(M_t)))


def impact_from_series(series):
    """Time-resolved impact curve from a HeisenbergSeries.

    Returns (times, values) with values[k] = ||offdiag(M_{t_k})||_inf.
    """
    values = np.array([impact_value(m) for m in series.matrices])
    return series.times, values


def _quadform_max(B, samples, rng, d):
    """Max of |psi^dag B psi| over Haar samples plus a shrinking random-walk
    refinement around the running extremes. Evaluations only; no spectral
    information is used, so the estimate stays an independent lower bound.
    The signed maximum and minimum are tracked and refined separately so the
    walk cannot get trapped in the weaker of the two extremal basins."""

    def signed_vals(psi):
        return np.einsum("si,ij,sj->s", psi.conj(), B, psi).real

    n_haar = max(1, int(samples // 2))
    chunk = 20000
    hi_val, lo_val = -np.inf, np.inf
    hi_psi = lo_psi = None
    done = 0
    while done < n_haar:
        m = min(chunk, n_haar - done)
        psi = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        vals = signed_vals(psi)
        i, j = int(vals.argmax()), int(vals.argmin())
        if vals[i] > hi_val:
            hi_val, hi_psi = float(vals[i]), psi[i]
        if vals[j] < lo_val:
            lo_val, lo_psi = float(vals[j]), psi[j]
        done += m
    n_refine = samples - n_haar
    if n_refine > 0 and hi_psi is not None:
        stages = np.geomspace(0.5, 1e-5, num=24)
        per = max(1, n_refine // (2 * len(stages)))
        for sigma in stages:
            for sign in (1.0, -1.0):
                base = hi_psi if sign > 0 else lo_psi
                step = rng.standard_normal((per, d)) + 1j * rng.standard_normal((per, d))
                psi = base[None, :] + sigma * step
                psi /= np.linalg.norm(psi, axis=1, keepdims=True)
                vals = signed_vals(psi)
                if sign > 0:
                    i = int(vals.argmax())
                    if vals[i] > hi_val:
                        hi_val, hi_psi = float(vals[i]), psi[i]
                else:
                    j = int(vals.argmin())
                    if vals[j] < lo_val:
                        lo_val, lo_psi = float(vals[j]), psi[j]
    return max(hi_val, -lo_val, 0.0)


def brute_force_impact(M_t, samples, seed=0):
    """Sampled lower estimate of the impact value.

    The supremum over states is attained at a pure state (the objective is
    linear on the convex state set), so only pure states are sampled.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M_t = as_hermitian(M_t)
    B = offdiag_part(M_t)
    rng = np.random.default_rng(seed)
    return _quadform_max(B, samples, rng, M_t.shape[0])


def restricted_impact(M_t, family, samples, seed=0):
    """Lower estimate of C over a restricted state family.

    `family` is a callable (rng) -> density matrix, or a fixed sequence of
    density matrices (then `samples` is ignored for the sequence case).
    """
    M_t = as_hermitian(M_t)
    B = offdiag_part(M_t)
    rng = np.random.default_rng(seed)
    if callable(family):
        states = (family(rng) for _ in range(samples))
    else:
        states = list(family)
        if not states:
            raise ValueError("empty state family")
    best = 0.0
    for rho in states:
        val = abs(np.trace(B @ np.asarray(rho, dtype=complex)).real)
        best = max(best, float(val))
    return best


def support_restricted_impact(M_t, subset):
    """||P_S offdiag(M_t) P_S||_inf for a site subset S."""
    M_t = as_hermitian(M_t)
    d = M_t.shape[0]
    idx = np.asarray(sorted(set(subset)), dtype=int)
    if idx.size == 0 or idx.min() < 0 or idx.max() >= d:
        raise ValueError(f"invalid site subset {subset}")
    block = offdiag_part(M_t)[np.ix_(idx, idx)]
    return operator_norm(block)


@dataclass
class UtilizationPoint:
    t: float
    delta_y: float
    impact: float
    ratio: float | None  # None when the impact value is below the floor


def utilization(model, rho0, M, times):
    """Per-time realized yield change |Delta Y_t| against its bound C(t)."""
    rho0 = np.asarray(rho0, dtype=complex)
    diff = rho0 - dephase(rho0)
    series = heisenberg_evolve(model, M, times)
    _, impacts = impact_from_series(series)
    out = []
    for t, M_t, c in zip(series.times, series.matrices, impacts):
        dy = abs(np.trace(M_t @ diff).real)
        ratio = dy / c if c >= RATIO_FLOOR else None
        out.append(UtilizationPoint(t=float(t), delta_y=float(dy), impact=float(c),
                                    ratio=ratio))
    return out
