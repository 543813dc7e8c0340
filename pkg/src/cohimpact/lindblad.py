"""GKSL (Lindblad) generators, forward/adjoint propagation, resolvent solves.

Superoperators use the column-stacking convention vec(rho)[i + d*j] =
rho[i, j] (numpy order='F'), so vec(A X B) = kron(B.T, A) vec(X).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .qops import (
    DimensionError,
    SiteBasisLabels,
    StabilityError,
    as_hermitian,
    hermitize,
)

#: below this d^2 the propagator uses exact eigendecomposition of the generator
DENSE_SUPEROP_LIMIT = 144
RTOL = 1e-9
ATOL = 1e-11


def vec(M):
    return np.asarray(M, dtype=complex).reshape(-1, order="F")


def unvec(v, d):
    return np.asarray(v, dtype=complex).reshape((d, d), order="F")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus jump operators with rates absorbed as sqrt(rate)."""

    hamiltonian: np.ndarray
    jumps: tuple = ()
    labels: SiteBasisLabels | None = None

    def __post_init__(self):
        h = as_hermitian(self.hamiltonian)
        object.__setattr__(self, "hamiltonian", h)
        jumps = tuple(np.asarray(L, dtype=complex) for L in self.jumps)
        for L in jumps:
            if L.shape != h.shape:
                raise DimensionError("jump operator dimension mismatch")
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]


@dataclass
class HeisenbergSeries:
    """Time grid with the Heisenberg-picture observables M_t on it."""

    times: np.ndarray
    matrices: np.ndarray  # (nt, d, d)
    provenance: str = ""

    @property
    def dim(self):
        return self.matrices.shape[-1]


def build_generator(model, sparse=None):
    """Matrix representation of L(rho) = -i[H,rho] + sum_j D[L_j](rho).

    Returns a dense array for small systems and scipy CSR above the
    dense limit (or when sparse=True is forced).
    """
    d = model.dim
    if sparse is None:
        sparse = d * d > DENSE_SUPEROP_LIMIT
    kron = sp.kron if sparse else np.kron
    eye = sp.identity(d, dtype=complex, format="csr") if sparse else np.eye(d, dtype=complex)
    H = sp.csr_matrix(model.hamiltonian) if sparse else model.hamiltonian
    gen = -1j * (kron(eye, H) - kron(H.T, eye))
    for L in model.jumps:
        Ls = sp.csr_matrix(L) if sparse else L
        LdL = Ls.conj().T @ Ls
        gen = gen + kron(Ls.conj(), Ls) - 0.5 * kron(eye, LdL) - 0.5 * kron(LdL.T, eye)
    return gen.tocsr() if sparse else gen


def adjoint_generator(model, sparse=None):
    """Heisenberg-picture generator L^dag (conjugate transpose of L)."""
    gen = build_generator(model, sparse=sparse)
    return gen.conj().T.tocsr() if sp.issparse(gen) else gen.conj().T


class _Flow:
    """Evaluate exp(t*G) v on a grid, by eigendecomposition when G is a
    well-conditioned dense matrix and by stiff-capable ODE integration
    otherwise."""

    def __init__(self, gen):
        self.gen = gen
        self.dense = not sp.issparse(gen) and gen.shape[0] <= DENSE_SUPEROP_LIMIT
        self._eig = None
        if self.dense:
            w, V = np.linalg.eig(gen)
            cond = np.linalg.cond(V)
            if cond < 1e10:
                self._eig = (w, V, np.linalg.inv(V))

    def at_times(self, v0, times):
        times = np.asarray(times, dtype=float)
        if self._eig is not None:
            w, V, Vinv = self._eig
            coeff = Vinv @ v0
            return np.stack([V @ (np.exp(w * t) * coeff) for t in times])
        gen = self.gen
        matvec = (lambda t, y: gen @ y)
        t0, t1 = 0.0, float(times.max()) if times.size else 0.0
        if t1 == t0:
            return np.stack([v0 for _ in times])
        sol = solve_ivp(
            matvec, (t0, t1), v0, t_eval=np.clip(times, t0, t1),
            method="DOP853", rtol=RTOL, atol=ATOL,
        )
        if not sol.success:
            raise RuntimeError(f"propagation failed: {sol.message}")
        return sol.y.T.copy()


def propagate_state(model, rho0, times, check_tol=1e-8, positivity_tol=1e-7):
    """Schroedinger-picture evolution rho(t) = exp(tL)(rho0) on a time grid."""
    d = model.dim
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(np.diff(times) < 0) or times[0] < 0):
        raise ValueError("times must be increasing and nonnegative")
    flow = _Flow(build_generator(model))
    out = flow.at_times(vec(rho0), times)
    states = np.stack([unvec(v, d) for v in out])
    traces = np.einsum("tii->t", states).real
    if np.abs(traces - np.trace(rho0).real).max() > check_tol:
        raise RuntimeError(f"trace drift {np.abs(traces - 1).max():.2e} exceeds tolerance")
    min_eig = min(np.linalg.eigvalsh(hermitize(s)).min() for s in states)
    if min_eig < -positivity_tol:
        warnings.warn(f"positivity violation {min_eig:.2e} during propagation")
    return states


def heisenberg_evolve(model, M, times, provenance="lindblad"):
    """Adjoint flow M_t = exp(t L^dag)(M) as a HeisenbergSeries."""
    M = as_hermitian(M)
    d = model.dim
    flow = _Flow(adjoint_generator(model))
    out = flow.at_times(vec(M), np.asarray(times, dtype=float))
    mats = np.stack([hermitize(unvec(v, d)) for v in out])
    return HeisenbergSeries(times=np.asarray(times, dtype=float), matrices=mats,
                            provenance=provenance)


def block_slots(donor_mask, d):
    """Flat vec-indices of matrix entries (i, j) with both i, j in the mask."""
    idx = np.asarray(sorted(donor_mask), dtype=int)
    return (idx[:, None] + d * idx[None, :]).reshape(-1, order="F")


def restricted_generator(model, donor_mask):
    """Compression of the generator to operators supported on the donor
    block. The block dynamics is autonomous for the transport models here
    (no coherent coupling back from ground/sink), so the compression equals
    the exact restricted generator."""
    gen = build_generator(model)
    slots = block_slots(donor_mask, model.dim)
    if sp.issparse(gen):
        gen = gen.tocsr()[slots, :].tocsc()[:, slots].toarray()
    else:
        gen = gen[np.ix_(slots, slots)]
    return gen, slots


def resolvent_effect(model, m_tilde, order=1, subspace=None):
    """Time-integrated effective operator (-L^dag)^{-order}(m_tilde) on the
    donor-supported block.

    order=1 gives the efficiency effect, order=2 the first-moment effect.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if subspace is None:
        if model.labels is None or not model.labels.donor_mask:
            raise ValueError("donor subspace required")
        subspace = model.labels.donor_mask
    d = model.dim
    m_tilde = as_hermitian(m_tilde)
    idx = np.asarray(sorted(subspace), dtype=int)
    outside = np.ones(d, dtype=bool)
    outside[idx] = False
    if np.abs(m_tilde[outside, :]).max(initial=0.0) > 1e-12 or \
       np.abs(m_tilde[:, outside]).max(initial=0.0) > 1e-12:
        raise ValueError("m_tilde must be supported on the donor subspace")
    gen_bb, slots = restricted_generator(model, subspace)
    eigs = np.linalg.eigvals(gen_bb)
    abscissa = eigs.real.max()
    if abscissa > -1e-9:
        worst = eigs[eigs.real.argmax()]
        raise StabilityError(
            f"restricted generator not strictly stable: eigenvalue {worst:.3e}")
    adj_bb = gen_bb.conj().T
    x = vec(m_tilde)[slots]
    for _ in range(order):
        x = np.linalg.solve(-adj_bb, x)
    n = idx.size
    block = unvec(x, n)
    out = np.zeros((d, d), dtype=complex)
    out[np.ix_(idx, idx)] = block
    return hermitize(out)
