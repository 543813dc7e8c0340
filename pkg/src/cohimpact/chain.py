"""Linear N-site transport chain with a trap and recombination.

Basis ordering is (g, s, 1..N): global ground level, sink level, then the
N chain sites. The trapping effect operator M_trap(t) is obtained from the
sink identity (one Heisenberg propagation of |s><s|), and its diagonal /
off-diagonal split drives the executable bound suite: the gap bound, the
pairwise advantage bound with both expansions, the delocalization
necessities, the participation-ratio necessity, and the localization
statement for the optimal input.

Internal units: energies and rates in rad/ps and ps^-1.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qops import (
    ConfigError,
    DimensionError,
    SiteBasisLabels,
    as_density,
    as_hermitian,
    dephase,
    extremal_eigenpair,
    frobenius_norm,
    hermitize,
    ipr,
    l1_coherence,
    offdiag_part,
    operator_norm,
    projector,
)
from .lindblad import LindbladModel, heisenberg_evolve, resolvent_effect

G_IDX, S_IDX = 0, 1

#: eigenvalue degeneracy window for optimizer reporting
DEGENERACY_TOL = 1e-10


def chain_labels(n_sites):
    names = ("g", "s") + tuple(str(n) for n in range(1, n_sites + 1))
    return SiteBasisLabels(names, donor_mask=tuple(range(2, n_sites + 2)))


@dataclass(frozen=True)
class ChainParams:
    """Chain of n_sites with nearest-neighbor couplings.

    energies: per-site energies (rad/ps), scalar broadcasts.
    couplings: n_sites-1 nearest-neighbor couplings (rad/ps), scalar
    broadcasts. gamma = recombination, kappa = trapping from the last
    site, dephasing = site-local pure dephasing (all ps^-1).
    """

    n_sites: int
    energies: object = 0.0
    couplings: object = 0.0
    gamma: float = 0.0
    kappa: float = 0.0
    dephasing: float = 0.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ConfigError("chain needs at least two sites")
        eps = np.broadcast_to(np.asarray(self.energies, dtype=float),
                              (self.n_sites,)).copy()
        cpl = np.broadcast_to(np.asarray(self.couplings, dtype=float),
                              (self.n_sites - 1,)).copy()
        object.__setattr__(self, "energies", eps)
        object.__setattr__(self, "couplings", cpl)
        for name in ("gamma", "kappa", "dephasing"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")


def gamma_phi_ohmic(reorg, temperature, cutoff):
    """Markovian pure-dephasing rate 2 pi k_B T E_R / omega_c.

    Zero-frequency slope of an Ohmic spectral density with cutoff;
    all arguments in rad/ps, result in ps^-1.
    """
    if reorg < 0 or temperature <= 0 or cutoff <= 0:
        raise ConfigError("gamma_phi_ohmic needs reorg >= 0, temperature > 0, cutoff > 0")
    return 2.0 * np.pi * temperature * reorg / cutoff


def build_chain(params):
    """Lindblad model on (g, s, 1..N) with trap, recombination, dephasing."""
    N = params.n_sites
    d = N + 2
    H = np.zeros((d, d), dtype=complex)
    for n in range(N):
        H[2 + n, 2 + n] = params.energies[n]
    for n in range(N - 1):
        H[2 + n, 3 + n] = H[3 + n, 2 + n] = params.couplings[n]
    jumps = []
    if params.kappa > 0:
        L = np.zeros((d, d), dtype=complex)
        L[S_IDX, d - 1] = 1.0
        jumps.append(np.sqrt(params.kappa) * L)
    if params.gamma > 0:
        for n in range(N):
            L = np.zeros((d, d), dtype=complex)
            L[G_IDX, 2 + n] = 1.0
            jumps.append(np.sqrt(params.gamma) * L)
    if params.dephasing > 0:
        for n in range(N):
            jumps.append(np.sqrt(params.dephasing) * projector(d, 2 + n))
    return LindbladModel(H, tuple(jumps), labels=chain_labels(N))


def _donor(model):
    if model.labels is None or model.labels.donor_mask is None:
        raise ConfigError("model carries no donor mask")
    return np.asarray(model.labels.donor_mask, dtype=int)


def sink_projector(dim):
    return projector(dim, S_IDX).astype(complex)


def trap_influx(model):
    """kappa |N><N| recovered from the trapping jump operator."""
    d = model.dim
    for L in model.jumps:
        if abs(L[S_IDX, d - 1]) > 0:
            return L.conj().T @ L
    raise ConfigError("model has no trapping channel")


def trap_effect(model, t):
    """M_trap(t) via the sink identity Lambda_t^dag(|s><s|) = |s><s| + M_trap.

    t = np.inf uses the donor-block resolvent of the trap influx operator
    instead; this requires a strictly decaying donor block.
    """
    d = model.dim
    if np.isinf(t):
        donor = tuple(_donor(model))
        return resolvent_effect(model, trap_influx(model), order=1, subspace=donor)
    if t < 0:
        raise ConfigError("time must be nonnegative")
    if t == 0:
        return np.zeros((d, d), dtype=complex)
    series = heisenberg_evolve(model, sink_projector(d), np.array([0.0, float(t)]))
    return hermitize(series.matrices[-1] - sink_projector(d))


def trap_effect_series(model, times):
    """M_trap on a whole grid from a single Heisenberg propagation."""
    times = np.asarray(times, dtype=float)
    series = heisenberg_evolve(model, sink_projector(model.dim), times)
    return times, np.array([hermitize(M - sink_projector(model.dim))
                            for M in series.matrices])


def decompose(m_trap, donor=None):
    """(D, B): diagonal and off-diagonal parts on the donor block."""
    M = as_hermitian(m_trap)
    if donor is not None:
        donor = np.asarray(donor, dtype=int)
        M = M[np.ix_(donor, donor)]
    return dephase(M), offdiag_part(M)


def _donor_block(m_trap, donor):
    M = np.asarray(m_trap, dtype=complex)
    if donor is not None and M.shape[0] > len(donor):
        donor = np.asarray(donor, dtype=int)
        M = M[np.ix_(donor, donor)]
    return hermitize(M)


def eta_max(m_trap, donor=None):
    """(top eigenvalue, eigenvector witness) on the donor block."""
    Mb = _donor_block(m_trap, donor)
    w, V = np.linalg.eigh(Mb)
    psi = V[:, -1]
    k = int(np.argmax(np.abs(psi)))
    phase = psi[k] / abs(psi[k])
    return float(w[-1]), psi / phase


def eta_incoh(m_trap, donor=None):
    """(max diagonal entry, site index witness) on the donor block."""
    Mb = _donor_block(m_trap, donor)
    diag = np.real(np.diag(Mb))
    k = int(np.argmax(diag))
    return float(diag[k]), k


@dataclass
class TrapReport:
    t: float
    m_trap: np.ndarray
    diag_part: np.ndarray
    offdiag: np.ndarray
    eta_max: float
    eta_incoh: float
    impact: float
    witness_state: np.ndarray
    witness_site: int


def trap_report(model, t):
    M = trap_effect(model, t)
    donor = _donor(model)
    D, B = decompose(M, donor)
    emax, psi = eta_max(M, donor)
    einc, site = eta_incoh(M, donor)
    return TrapReport(t=float(t), m_trap=M, diag_part=D, offdiag=B,
                      eta_max=emax, eta_incoh=einc,
                      impact=float(operator_norm(B)),
                      witness_state=psi, witness_site=site)


def theorem1_check(report, tol=1e-10):
    """Gap bound: eta_max - eta_incoh <= C. Returns (ok, margin)."""
    gap = report.eta_max - report.eta_incoh
    assert gap >= -tol, "variational maximum below the diagonal maximum"
    margin = report.impact - gap
    return margin >= -tol, float(margin)


def advantage_exact(gap, b):
    """f(Delta, b) = sqrt(b^2 + Delta^2/4) - Delta/2."""
    return np.sqrt(b * b + gap * gap / 4.0) - gap / 2.0


def advantage_near_degenerate(gap, b):
    """Truncated expansion for Delta <= 2b plus its remainder bound."""
    if b <= 0:
        raise ConfigError("near-degenerate expansion needs b > 0")
    val = b - gap / 2.0 + gap ** 2 / (8.0 * b) - gap ** 4 / (128.0 * b ** 3)
    return val, gap ** 6 / (1024.0 * b ** 5)


def advantage_well_separated(gap, b):
    """Truncated expansion for Delta >= 2b plus its remainder bound."""
    if gap <= 0:
        raise ConfigError("well-separated expansion needs Delta > 0")
    val = b ** 2 / gap - b ** 4 / gap ** 3
    return val, 2.0 * b ** 6 / gap ** 5


@dataclass
class PairwiseBound:
    n: int
    m: int
    lam_plus: float
    gap: float
    b: float
    advantage: float
    eta_max_holds: bool
    nd_value: Optional[float]
    nd_remainder: Optional[float]
    nd_within: Optional[bool]
    ws_value: Optional[float]
    ws_remainder: Optional[float]
    ws_within: Optional[bool]


def corollary2_bounds(m_trap, n, m, donor=None, tol=1e-12):
    """Pairwise closed-form lower bound lambda_nm^(+) and the expansions.

    n, m index the donor block. The sites are ordered internally so that
    the diagonal gap Delta = D_nn - D_mm is nonnegative.
    """
    if n == m:
        raise ConfigError("pairwise bound needs two distinct sites")
    Mb = _donor_block(m_trap, donor)
    D, B = np.real(np.diag(Mb)), offdiag_part(Mb)
    if D[n] < D[m]:
        n, m = m, n
    gap = float(D[n] - D[m])
    b = float(abs(B[n, m]))
    lam = (D[n] + D[m]) / 2.0 + np.sqrt((gap / 2.0) ** 2 + b * b)
    emax, _ = eta_max(Mb)
    f = advantage_exact(gap, b)
    nd_value = nd_rem = nd_ok = None
    if b > 0 and gap <= 2.0 * b:
        nd_value, nd_rem = advantage_near_degenerate(gap, b)
        nd_ok = bool(-tol <= f - nd_value <= nd_rem + tol)
    ws_value = ws_rem = ws_ok = None
    if gap > 0 and gap >= 2.0 * b:
        ws_value, ws_rem = advantage_well_separated(gap, b)
        ws_ok = bool(-tol <= f - ws_value <= ws_rem + tol)
    return PairwiseBound(
        n=n, m=m, lam_plus=float(lam), gap=gap, b=b, advantage=float(f),
        eta_max_holds=bool(emax >= lam - 1e-10),
        nd_value=nd_value, nd_remainder=nd_rem, nd_within=nd_ok,
        ws_value=ws_value, ws_remainder=ws_rem, ws_within=ws_ok,
    )


def _donor_state(state, nb):
    """Normalize input to a density matrix on the donor block."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        if state.size != nb:
            raise DimensionError("state vector must live on the donor block")
        return np.outer(state, state.conj())
    if state.shape != (nb, nb):
        raise DimensionError("state must match the donor block dimension")
    return as_density(state)


@dataclass
class DelocalizationReport:
    delta: float
    c_max: float
    impact: float
    l1_value: Optional[float]
    l1_required: float
    l1_holds: Optional[bool]
    support_sites: Optional[int]
    support_required: float
    support_holds: Optional[bool]
    entropic_value: float
    entropic_required: float
    entropic_holds: bool


def theorem3_check(m_trap, state, donor=None, support_tol=1e-9):
    """Necessary delocalization for a delta-improvement over eta_incoh.

    Checks the ell-1 bound delta/c_max, the pure-state support count, and
    the relative-entropy variant (delta/C)^2 / (2 ln 2).
    """
    Mb = _donor_block(m_trap, donor)
    nb = Mb.shape[0]
    rho = _donor_state(state, nb)
    einc, _ = eta_incoh(Mb)
    y = float(np.trace(Mb @ rho).real)
    delta = max(y - einc, 0.0)
    B = offdiag_part(Mb)
    c_max = float(np.abs(B).max())
    C = operator_norm(B)
    from .qops import relative_entropy_coherence
    crel = relative_entropy_coherence(rho)
    c_req = (delta / C) ** 2 / (2.0 * np.log(2.0)) if C > 0 else 0.0
    l1_req = delta / c_max if c_max > 0 else 0.0
    # l1 and support statements specialize to pure inputs
    try:
        l1 = l1_coherence(rho)
        w = np.real(np.diag(rho))
        support = int(np.count_nonzero(w > support_tol))
        pure = True
    except Exception:
        l1 = None
        support = None
        pure = False
    if c_max == 0.0:
        # fully diagonal sensitivity: no coherent improvement possible
        l1_ok = delta <= 1e-10 if pure else None
        sup_ok = delta <= 1e-10 if pure else None
        sup_req = 1.0
    else:
        l1_ok = (l1 >= l1_req - 1e-10) if pure else None
        sup_req = 1.0 + l1_req
        sup_ok = (support >= sup_req - 1e-10) if pure else None
    return DelocalizationReport(
        delta=delta, c_max=c_max, impact=float(C),
        l1_value=l1, l1_required=float(l1_req), l1_holds=l1_ok,
        support_sites=support, support_required=float(sup_req),
        support_holds=sup_ok,
        entropic_value=float(crel), entropic_required=float(c_req),
        entropic_holds=bool(crel >= c_req - 1e-10),
    )


@dataclass
class IprReport:
    delta: float
    ipr_value: float
    frobenius_bound: float
    weak_bound: float
    frobenius_holds: bool
    weak_holds: bool


def corollary4_check(m_trap, psi, donor=None):
    """Necessary participation: IPR <= 1 - delta^2/||B||_F^2 (and weaker form)."""
    Mb = _donor_block(m_trap, donor)
    nb = Mb.shape[0]
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size != nb:
        raise DimensionError("corollary4_check needs a pure donor-block vector")
    psi = psi / np.linalg.norm(psi)
    einc, _ = eta_incoh(Mb)
    y = float((psi.conj() @ Mb @ psi).real)
    delta = max(y - einc, 0.0)
    B = offdiag_part(Mb)
    fro = frobenius_norm(B)
    C = operator_norm(B)
    val = float(ipr(psi))
    fb = 1.0 - delta ** 2 / fro ** 2 if fro > 0 else 1.0
    wb = 1.0 - delta ** 2 / (nb * C ** 2) if C > 0 else 1.0
    assert fb <= wb + 1e-12, "Frobenius form must be the tighter bound"
    return IprReport(delta=delta, ipr_value=val,
                     frobenius_bound=float(fb), weak_bound=float(wb),
                     frobenius_holds=bool(val <= fb + 1e-10),
                     weak_holds=bool(val <= wb + 1e-10))


@dataclass
class LocalizationReport:
    applicable: bool
    site: Optional[int]
    incoh_gap: float
    impact: float
    deficit: Optional[float]
    bound: Optional[float]
    holds: Optional[bool]


def theorem5_check(m_trap, donor=None):
    """Optimal input stays near the best site when the diagonal gap wins.

    Applicable when the top diagonal entry is unique and its gap exceeds
    the off-diagonal impact C; then 1 - |<k|psi_max>|^2 <= (C/(gap-C))^2.
    """
    Mb = _donor_block(m_trap, donor)
    diag = np.real(np.diag(Mb))
    order = np.argsort(diag)[::-1]
    k = int(order[0])
    gap = float(diag[order[0]] - diag[order[1]])
    C = operator_norm(offdiag_part(Mb))
    if gap <= DEGENERACY_TOL or C >= gap:
        return LocalizationReport(applicable=False, site=None,
                                  incoh_gap=gap, impact=float(C),
                                  deficit=None, bound=None, holds=None)
    _, psi = eta_max(Mb)
    deficit = 1.0 - abs(psi[k]) ** 2
    bound = (C / (gap - C)) ** 2
    return LocalizationReport(applicable=True, site=k, incoh_gap=gap,
                              impact=float(C), deficit=float(deficit),
                              bound=float(bound),
                              holds=bool(deficit <= bound + 1e-10))


@dataclass
class OptimizerRecord:
    label: str
    eigenvalue: float
    state: np.ndarray
    l1_ratio: float
    ipr: float
    populations: np.ndarray
    degenerate: bool


def optimizer_analysis(m_trap, donor=None):
    """Distinguished pure donor inputs for the trapping task.

    Returns records for the top eigenvector of M_trap (best yield) and
    the extremal eigenvector of B (most coherence-sensitive direction),
    each with the normalized ell-1 ratio, IPR, and site populations.
    """
    Mb = _donor_block(m_trap, donor)
    nb = Mb.shape[0]
    out = []
    w, V = np.linalg.eigh(Mb)
    deg = bool(nb > 1 and w[-1] - w[-2] < DEGENERACY_TOL)
    _, psi_eta = eta_max(Mb)
    B = offdiag_part(Mb)
    lam, psi_c = extremal_eigenpair(B)
    wb = np.linalg.eigvalsh(B)
    degb = bool(nb > 1 and
                np.sort(np.abs(wb))[-1] - np.sort(np.abs(wb))[-2] < DEGENERACY_TOL)
    for label, val, psi, flag in (("eta", float(w[-1]), psi_eta, deg),
                                  ("impact", float(lam), psi_c, degb)):
        out.append(OptimizerRecord(
            label=label, eigenvalue=val, state=psi,
            l1_ratio=float(l1_coherence(psi) / max(nb - 1, 1)),
            ipr=float(ipr(psi)),
            populations=np.abs(psi) ** 2,
            degenerate=flag,
        ))
    return out
