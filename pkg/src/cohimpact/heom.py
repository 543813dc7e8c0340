"""Hierarchical equations of motion for Drude-Lorentz baths.

The hierarchy uses scaled auxiliary density operators (ADOs) and a
matrix-free generator application; site-projector couplings reduce the
inter-tier terms to elementwise masks. Observable reconstruction follows
the probe-state scheme: propagate an informationally complete set of
initial states forward and assemble the Heisenberg matrix elements from
the recorded expectations.
"""

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .lindblad import HeisenbergSeries
from .qops import ConfigError, StabilityError, as_hermitian, hermitize

#: hard budget on n_ado * d^2 complex scalars held by one hierarchy
MEMORY_BUDGET = 2 ** 26
HEOM_RTOL = 1e-8
HEOM_ATOL = 1e-10


@dataclass(frozen=True)
class DrudeLorentzBath:
    """Overdamped bath J(w) = 2 E_R gamma_c w / (gamma_c^2 + w^2).

    All parameters in internal units: reorganization energy and temperature
    (k_B T) in rad/ps, cutoff rate in 1/ps.
    """

    reorg: float
    cutoff: float
    temperature: float
    n_matsubara: int = 3

    def __post_init__(self):
        if self.reorg < 0 or self.cutoff <= 0 or self.temperature <= 0:
            raise ConfigError("bath parameters must be positive (reorg >= 0)")
        if self.n_matsubara < 0:
            raise ConfigError("n_matsubara must be >= 0")

    def spectral_density(self, omega):
        return 2.0 * self.reorg * self.cutoff * omega / (self.cutoff ** 2 + omega ** 2)


def bath_expansion(bath):
    """Exponential decomposition C(t) = sum_k c_k exp(-nu_k t), t >= 0.

    Index 0 is the Drude pole (nu_0 = cutoff), indices 1..N_k the Matsubara
    terms. Emits a warning when the truncated Matsubara tail carries more
    than 1% of the zero-time correlation value.
    """
    er, gc, T = bath.reorg, bath.cutoff, bath.temperature
    beta = 1.0 / T
    nu = np.empty(bath.n_matsubara + 1)
    c = np.empty(bath.n_matsubara + 1, dtype=complex)
    nu[0] = gc
    c[0] = er * gc * (1.0 / np.tan(beta * gc / 2.0) - 1j)
    k = np.arange(1, bath.n_matsubara + 1)
    if k.size:
        nu[1:] = 2.0 * np.pi * k / beta
        c[1:] = 4.0 * er * gc / beta * nu[1:] / (nu[1:] ** 2 - gc ** 2)
    if er > 0:
        tail = abs(matsubara_residual(bath)) * nu[-1] if bath.n_matsubara else np.inf
        c0_scale = abs(c.real.sum())
        if c0_scale > 0 and tail > 0.05 * c0_scale:
            warnings.warn(
                f"Matsubara truncation at N_k={bath.n_matsubara} leaves a "
                f"relative tail of {tail / c0_scale:.1e}; consider more terms "
                "or the markovian_closure terminator")
    return c, nu


def matsubara_residual(bath):
    """Residual sum_{k > N_k} c_k / nu_k of the truncated Matsubara series.

    Used by the Markovian-closure terminator. The infinite sum has the
    closed form obtained from sum_k 1/(k^2 - x^2) = (1 - pi x cot(pi x)) / (2 x^2).
    """
    er, gc = bath.reorg, bath.cutoff
    beta = 1.0 / bath.temperature
    x = beta * gc / (2.0 * np.pi)
    if x == 0:
        return 0.0
    total = (4.0 * er * gc / beta) * (beta / (2.0 * np.pi)) ** 2 \
        * (1.0 - np.pi * x / np.tan(np.pi * x)) / (2.0 * x ** 2)
    k = np.arange(1, bath.n_matsubara + 1)
    partial = 0.0
    if k.size:
        nu_k = 2.0 * np.pi * k / beta
        partial = float((4.0 * er * gc / beta / (nu_k ** 2 - gc ** 2)).sum())
    return float(total - partial)


@dataclass(frozen=True)
class HeomModel:
    """System Hamiltonian, per-bath coupling operators, hierarchy settings.

    `jumps` carries additional Markovian dissipators (recombination,
    trapping) applied identically to every ADO.
    """

    hamiltonian: np.ndarray
    couplings: tuple
    baths: tuple
    depth: int = 5
    terminator: str = "markovian_closure"
    jumps: tuple = ()
    labels: object = None

    def __post_init__(self):
        h = as_hermitian(self.hamiltonian)
        object.__setattr__(self, "hamiltonian", h)
        qs = tuple(as_hermitian(q) for q in self.couplings)
        object.__setattr__(self, "couplings", qs)
        object.__setattr__(self, "baths", tuple(self.baths))
        object.__setattr__(self, "jumps",
                           tuple(np.asarray(L, dtype=complex) for L in self.jumps))
        if len(qs) != len(self.baths):
            raise ConfigError("one coupling operator per bath required")
        if self.depth < 1:
            raise ConfigError("hierarchy depth must be >= 1")
        if self.terminator not in ("none", "markovian_closure"):
            raise ConfigError(f"unknown terminator {self.terminator!r}")

    @property
    def dim(self):
        return self.hamiltonian.shape[0]


def hierarchy_indices(n_exp, depth):
    """All multi-indices n with sum(n) <= depth, slot 0 = all zeros."""
    indices = []
    for total in range(depth + 1):
        for comb in itertools.combinations_with_replacement(range(n_exp), total):
            n = [0] * n_exp
            for j in comb:
                n[j] += 1
            indices.append(tuple(n))
    index_map = {n: a for a, n in enumerate(indices)}
    return indices, index_map


class HeomGenerator:
    """Matrix-free action of the extended-space HEOM generator."""

    def __init__(self, model):
        self.model = model
        d = model.dim
        exps = []  # (bath index, c_k, nu_k)
        for j, bath in enumerate(model.baths):
            c, nu = bath_expansion(bath)
            for ck, nk in zip(c, nu):
                exps.append((j, ck, nk))
        self.n_exp = len(exps)
        self.exps = exps
        self.indices, self.index_map = hierarchy_indices(self.n_exp, model.depth)
        self.n_ado = len(self.indices)
        if self.n_ado * d * d > MEMORY_BUDGET:
            raise ConfigError(
                f"hierarchy of {self.n_ado} ADOs x d^2={d * d} exceeds the "
                "memory budget; reduce depth or n_matsubara")
        self._build_structure()

    def _build_structure(self):
        model, d = self.model, self.model.dim
        idx_arr = np.array(self.indices)  # (n_ado, n_exp)
        nus = np.array([nk for (_, _, nk) in self.exps])
        self.damping = idx_arr @ nus  # (n_ado,) real
        self.ham = model.hamiltonian
        # per-exponential coupling tables (scaled ADOs)
        self.coupling = []
        for k, (j, ck, nk) in enumerate(self.exps):
            q = np.diag(model.couplings[j]).real
            if np.abs(model.couplings[j] - np.diag(q)).max() > 1e-12:
                raise ConfigError("coupling operators must be diagonal site projectors")
            has_up = []
            up_slot = []
            up_coef = []
            has_dn = []
            dn_slot = []
            dn_coef = []
            ack = abs(ck)
            for a, n in enumerate(self.indices):
                if sum(n) < model.depth:
                    m = list(n)
                    m[k] += 1
                    has_up.append(a)
                    up_slot.append(self.index_map[tuple(m)])
                    up_coef.append(np.sqrt((n[k] + 1) * ack) if ack > 0 else 0.0)
                if n[k] > 0:
                    m = list(n)
                    m[k] -= 1
                    has_dn.append(a)
                    dn_slot.append(self.index_map[tuple(m)])
                    dn_coef.append(np.sqrt(n[k] / ack) if ack > 0 else 0.0)
            row = q[:, None] * np.ones(d)[None, :]
            col = np.ones(d)[:, None] * q[None, :]
            self.coupling.append({
                "to_upper": (np.array(has_up, dtype=int), np.array(up_slot, dtype=int),
                             np.array(up_coef)),
                "to_lower": (np.array(has_dn, dtype=int), np.array(dn_slot, dtype=int),
                             np.array(dn_coef)),
                "comm_mask": row - col,                      # [Q, .] elementwise
                "up_mask": ck * row - np.conj(ck) * col,     # c Q rho - c* rho Q
                "ck": ck,
            })
        # Markovian dissipators shared by all ADOs
        self.jump_ops = [(L, L.conj().T @ L) for L in model.jumps]
        # terminator: -delta_j [Q_j, [Q_j, .]] as an elementwise mask
        self.term_mask = np.zeros((d, d))
        if model.terminator == "markovian_closure":
            for j, bath in enumerate(model.baths):
                delta = matsubara_residual(bath)
                q = np.diag(model.couplings[j]).real
                diff = q[:, None] - q[None, :]
                self.term_mask -= delta * diff ** 2

    def apply(self, R):
        """dR/dt for an ADO stack R of shape (n_ado, d, d)."""
        H = self.ham
        dR = -1j * (H @ R - R @ H)
        dR -= self.damping[:, None, None] * R
        for L, LdL in self.jump_ops:
            dR += L @ R @ L.conj().T - 0.5 * (LdL @ R + R @ LdL)
        dR += self.term_mask[None, :, :] * R
        for cp in self.coupling:
            a_up, b_up, s_up = cp["to_upper"]
            if a_up.size:
                dR[a_up] += (-1j) * s_up[:, None, None] * (cp["comm_mask"] * R[b_up])
            a_dn, b_dn, s_dn = cp["to_lower"]
            if a_dn.size:
                dR[a_dn] += (-1j) * s_dn[:, None, None] * (cp["up_mask"] * R[b_dn])
        return dR


def build_hierarchy(model):
    """Construct the extended generator (callable linear action)."""
    return HeomGenerator(model)


def propagate_heom(model, rho0, times, rtol=HEOM_RTOL, atol=HEOM_ATOL,
                   generator=None):
    """Slot-0 reduced states rho(t) for a factorized initial condition."""
    gen = build_hierarchy(model) if generator is None else generator
    d = model.dim
    times = np.asarray(times, dtype=float)
    R0 = np.zeros((gen.n_ado, d, d), dtype=complex)
    R0[0] = np.asarray(rho0, dtype=complex)

    def rhs(t, y):
        return gen.apply(y.reshape(gen.n_ado, d, d)).reshape(-1)

    t1 = float(times.max()) if times.size else 0.0
    if t1 == 0.0:
        states = np.stack([R0[0] for _ in times])
    else:
        sol = solve_ivp(rhs, (0.0, t1), R0.reshape(-1), t_eval=times,
                        method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"HEOM propagation failed: {sol.message}")
        states = sol.y.T.reshape(len(times), gen.n_ado, d, d)[:, 0]
    traces = np.einsum("tii->t", states).real
    if times.size and np.abs(traces - np.trace(np.asarray(rho0)).real).max() > 1e-6:
        warnings.warn(f"HEOM trace drift {np.abs(traces - 1).max():.2e}")
    return states


# ---------------------------------------------------------------------------
# probe-state reconstruction of Heisenberg observables
# ---------------------------------------------------------------------------


def probe_states(dim, support=None):
    """Informationally complete probe set on the given support subspace:
    site projectors plus the (+) and (i) two-site superpositions."""
    sites = list(range(dim)) if support is None else sorted(support)
    probes = []
    for k in sites:
        e = np.zeros(dim, dtype=complex)
        e[k] = 1.0
        probes.append(("kk", k, k, np.outer(e, e.conj())))
    for a, k in enumerate(sites):
        for l in sites[a + 1:]:
            ek = np.zeros(dim, dtype=complex)
            el = np.zeros(dim, dtype=complex)
            ek[k] = 1.0
            el[l] = 1.0
            plus = (ek + el) / np.sqrt(2.0)
            imag = (ek + 1j * el) / np.sqrt(2.0)
            probes.append(("+", k, l, np.outer(plus, plus.conj())))
            probes.append(("i", k, l, np.outer(imag, imag.conj())))
    return probes


def reconstruct_observable(propagate, dim, M, times, support=None,
                           provenance="reconstruction"):
    """Heisenberg series M_t from forward trajectories of probe states.

    `propagate` maps (rho0, times) -> array of states (nt, d, d); any
    engine with that signature works. When `support` is given, only the
    block of M_t on that subspace is reconstructed (the rest is zero),
    which is valid when the optimization is restricted to states supported
    there.
    """
    M = as_hermitian(M)
    times = np.asarray(times, dtype=float)
    sites = list(range(dim)) if support is None else sorted(support)
    y = {}
    for kind, k, l, sigma in probe_states(dim, support):
        states = propagate(sigma, times)
        y[(kind, k, l)] = np.einsum("ij,tji->t", M, states).real
    nt = len(times)
    mats = np.zeros((nt, dim, dim), dtype=complex)
    for k in sites:
        mats[:, k, k] = y[("kk", k, k)]
    for a, k in enumerate(sites):
        for l in sites[a + 1:]:
            c1 = 2.0 * y[("+", k, l)] - y[("kk", k, k)] - y[("kk", l, l)]
            c2 = 2.0 * y[("i", k, l)] - y[("kk", k, k)] - y[("kk", l, l)]
            mats[:, k, l] = (c1 - 1j * c2) / 2.0
            mats[:, l, k] = np.conj(mats[:, k, l])
    return HeisenbergSeries(times=times, matrices=mats, provenance=provenance)


def reconstruct_observable_heom(model, M, times, support=None, rtol=HEOM_RTOL,
                                atol=HEOM_ATOL):
    """HEOM-backed reconstruction; probe trajectories share one generator."""
    gen = build_hierarchy(model)

    def propagate(rho0, ts):
        return propagate_heom(model, rho0, ts, rtol=rtol, atol=atol, generator=gen)

    return reconstruct_observable(propagate, model.dim, M, times, support=support,
                                  provenance="heom")


# ---------------------------------------------------------------------------
# extended-space resolvent solves
# ---------------------------------------------------------------------------


def _restricted_extended_matrix(gen, donor):
    """Sparse matrix of the extended generator compressed to matrix entries
    (i, j) with both indices in the donor mask, for every ADO. Valid because
    the donor block evolves autonomously (couplings are site-diagonal and
    the Hamiltonian does not connect the block to ground/sink)."""
    model = gen.model
    d = model.dim
    donor = np.asarray(sorted(donor), dtype=int)
    nb = donor.size
    outside = np.setdiff1d(np.arange(d), donor)
    H = model.hamiltonian
    if outside.size and np.abs(H[np.ix_(donor, outside)]).max(initial=0.0) > 1e-12:
        raise StabilityError("Hamiltonian couples the donor block to its complement")

    def elementwise_block(mask):
        return sp.diags(mask[np.ix_(donor, donor)].reshape(-1, order="F"))

    eye_b = sp.identity(nb, format="csr", dtype=complex)
    Hb = sp.csr_matrix(H[np.ix_(donor, donor)])
    block_sys = -1j * (sp.kron(eye_b, Hb) - sp.kron(Hb.T, eye_b))
    for L, LdL in gen.jump_ops:
        # jump sandwiches leave the block (population flows out); only the
        # anticommutator survives on the block when L maps block -> outside
        Lb = L[np.ix_(donor, donor)]
        if np.abs(Lb).max(initial=0.0) > 1e-12:
            Lbs = sp.csr_matrix(Lb)
            block_sys = block_sys + sp.kron(Lbs.conj(), Lbs)
        LdLb = sp.csr_matrix(LdL[np.ix_(donor, donor)])
        block_sys = block_sys - 0.5 * (sp.kron(eye_b, LdLb) + sp.kron(LdLb.T, eye_b))
    block_sys = block_sys + elementwise_block(gen.term_mask)

    n = gen.n_ado * nb * nb
    rows, cols, vals = [], [], []

    def add_block(a, b, mat):
        m = sp.coo_matrix(mat)
        rows.append(a * nb * nb + m.row)
        cols.append(b * nb * nb + m.col)
        vals.append(m.data.astype(complex))

    damp = gen.damping
    for a in range(gen.n_ado):
        add_block(a, a, block_sys - damp[a] * sp.identity(nb * nb, dtype=complex))
    for cp in gen.coupling:
        comm = elementwise_block(cp["comm_mask"])
        upm = elementwise_block(cp["up_mask"])
        a_up, b_up, s_up = cp["to_upper"]
        for a, b, s in zip(a_up, b_up, s_up):
            add_block(a, b, (-1j * s) * comm)
        a_dn, b_dn, s_dn = cp["to_lower"]
        for a, b, s in zip(a_dn, b_dn, s_dn):
            add_block(a, b, (-1j * s) * upm)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsc()
    return mat, donor


def heom_resolvent_effect(model, m_tilde, order=1):
    """Effective operator (-L_ext)^{-order} pulled back to the system space.

    Solves the extended linear system per donor-basis probe and assembles
    the d x d effective operator via the duality relation.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if model.labels is None or not model.labels.donor_mask:
        raise ValueError("model must declare a donor mask")
    donor = tuple(model.labels.donor_mask)
    if not model.jumps or all(np.abs(L).max() < 1e-14 for L in model.jumps):
        raise StabilityError("no decay channels: the time integral diverges")
    gen = build_hierarchy(model)
    mat, donor_arr = _restricted_extended_matrix(gen, donor)
    nb = donor_arr.size
    d = model.dim
    m_b = np.asarray(m_tilde, dtype=complex)[np.ix_(donor_arr, donor_arr)]
    lu = sp.linalg.splu(-mat.tocsc())
    out = np.zeros((d, d), dtype=complex)
    for a in range(nb):
        for b in range(nb):
            sigma = np.zeros((nb, nb), dtype=complex)
            sigma[a, b] = 1.0  # probe |k><l| with k=donor[a], l=donor[b]
            rhs = np.zeros(mat.shape[0], dtype=complex)
            rhs[: nb * nb] = sigma.reshape(-1, order="F")
            x = rhs
            for _ in range(order):
                x = lu.solve(x)
            resid = np.linalg.norm(-mat @ lu.solve(rhs) - rhs)
            if resid > 1e-8 * max(1.0, np.linalg.norm(rhs)):
                raise StabilityError(f"extended solve residual {resid:.2e}")
            slot0 = x[: nb * nb].reshape(nb, nb, order="F")
            # Tr[m_tilde * integrated slot-0 state] = (M_eff)_{l k}
            out[donor_arr[b], donor_arr[a]] = np.trace(m_b @ slot0)
    return hermitize(out)
