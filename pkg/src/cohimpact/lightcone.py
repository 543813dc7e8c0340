"""Quasi-locality diagnostics: support-restricted impact spreading.

Restricted impact profiles over (distance, time), an empirical
exponential light-cone envelope fit, the chain-specialized envelope
check, memory-time estimation from projected reduced states, and the
truncation-radius criterion. The fitted envelope is descriptive: it
summarizes simulated data and is never a proof of the quasi-locality
assumption.
"""

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qops import ConfigError, NumericalError, dephase, offdiag_part, operator_norm
from .lindblad import heisenberg_evolve, propagate_state
from .impact import support_restricted_impact

#: profile values below this are treated as zero when fitting
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Vertex set with an edge list and all-pairs graph distances."""

    n_vertices: int
    edges: tuple
    distances: np.ndarray

    @classmethod
    def from_edges(cls, n_vertices, edges):
        edges = tuple((int(a), int(b)) for a, b in edges)
        adj = [[] for _ in range(n_vertices)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        dist = np.full((n_vertices, n_vertices), np.inf)
        for src in range(n_vertices):
            dist[src, src] = 0
            q = deque([src])
            while q:
                u = q.popleft()
                for v in adj[u]:
                    if dist[src, v] == np.inf:
                        dist[src, v] = dist[src, u] + 1
                        q.append(v)
        assert np.allclose(dist, dist.T)
        return cls(n_vertices=n_vertices, edges=edges, distances=dist)

    @classmethod
    def chain(cls, n_sites, with_sink=True):
        """Geometry of the (g, s, 1..N) chain model; the sink hangs off site N.

        The ground level is isolated (distance inf to everything else).
        """
        d = n_sites + 2
        edges = [(2 + n, 3 + n) for n in range(n_sites - 1)]
        if with_sink:
            edges.append((1, n_sites + 1))
        return cls.from_edges(d, edges)

    def set_distance(self, S, X):
        S = np.asarray(list(S), dtype=int)
        X = np.asarray(list(X), dtype=int)
        return float(self.distances[np.ix_(S, X)].min())


def restricted_profile(model, M, X, subsets, times):
    """C_M^(S)(Lambda_t) for each S in subsets over the time grid.

    One Heisenberg propagation of M; every (S, t) value is post-processing.
    Returns an array of shape (len(subsets), len(times)).
    """
    X = set(int(x) for x in X)
    for S in subsets:
        if set(int(s) for s in S) & X:
            raise ConfigError("restricted support must be disjoint from the readout support")
    series = heisenberg_evolve(model, M, times)
    out = np.empty((len(subsets), len(series.times)))
    for i, S in enumerate(subsets):
        for j, M_t in enumerate(series.matrices):
            out[i, j] = support_restricted_impact(M_t, S)
    return out


@dataclass
class LightConeFit:
    c_ql: float
    v_ql: float
    mu: float
    v_lc: float
    residual_rms: float
    r_squared: float
    distance_slope: float
    distance_r_squared: float
    inside_fraction: float
    n_points: int
    value_cap: float
    distance_window: tuple
    time_window: tuple


def fit_envelope(distances, times, values, cap_fraction=0.1):
    """Least-squares envelope log C = log C_QL + v_QL t - mu d.

    values has shape (n_distances, n_times). The fit window keeps points
    strictly between the noise floor and cap_fraction times the global
    peak: the exponential cone model describes the outside-cone tail, not
    the saturated interior. After the fit the offset is raised so the
    envelope dominates every retained data point. The reported
    distance_r_squared is the goodness of the log-linear distance fit
    after removing the fitted time trend.
    """
    distances = np.asarray(distances, dtype=float)
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    assert values.shape == (distances.size, times.size)
    dd, tt = np.meshgrid(distances, times, indexing="ij")
    cap = cap_fraction * values.max()
    mask = (values > NOISE_FLOOR) & (values <= cap)
    if np.unique(dd[mask]).size < 3 or np.unique(tt[mask]).size < 5:
        raise NumericalError("envelope fit needs >= 3 distances and >= 5 times inside the fit window")
    y = np.log(values[mask])
    A = np.column_stack([np.ones(y.size), tt[mask], -dd[mask]])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    # shift the offset so every retained point lies inside the envelope
    coef = coef.copy()
    coef[0] += resid.max()
    resid_dom = y - A @ coef
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    # distance-only regression on the time-detrended data
    yd = y - coef[1] * tt[mask]
    Ad = np.column_stack([np.ones(yd.size), dd[mask]])
    cd, *_ = np.linalg.lstsq(Ad, yd, rcond=None)
    ssd = np.sum((yd - yd.mean()) ** 2)
    r2d = 1.0 - np.sum((yd - Ad @ cd) ** 2) / ssd if ssd > 0 else 1.0
    mu = float(coef[2])
    if mu <= 0:
        raise NumericalError(f"fitted spatial decay mu = {mu:.3e} is not positive")
    return LightConeFit(
        c_ql=float(np.exp(coef[0])), v_ql=float(coef[1]), mu=mu,
        v_lc=float(coef[1] / mu),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        r_squared=float(r2),
        distance_slope=float(cd[1]),
        distance_r_squared=float(r2d),
        inside_fraction=float(np.mean(resid_dom <= 1e-12)),
        n_points=int(y.size),
        value_cap=float(cap),
        distance_window=(float(distances.min()), float(distances.max())),
        time_window=(float(times.min()), float(times.max())),
    )


def envelope_value(fit, t, d, m_norm=1.0):
    """The Lieb-Robinson style bound 2 C_QL e^mu ||M|| exp(v_QL t - mu d)."""
    c_lc = 2.0 * fit.c_ql * np.exp(fit.mu)
    return c_lc * m_norm * np.exp(fit.v_ql * np.asarray(t) - fit.mu * np.asarray(d))


def arrival_times(times, values, threshold=1e-3):
    """First crossing time of each profile row above the threshold.

    Rows that never cross return nan.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape[0], np.nan)
    for i, row in enumerate(values):
        idx = np.flatnonzero(row >= threshold)
        if idx.size:
            out[i] = times[idx[0]]
    return out


@dataclass
class Corollary7Report:
    d_sink: float
    margins: np.ndarray
    holds: bool


def corollary7_check(model, geometry, S, times, fit, m_norm=1.0):
    """Chain-specialized envelope check for the sink readout.

    The readout support is the sink level; its graph distance to S is
    d_S + 1 where d_S is the distance from S to the trapping site.
    Records the per-time margin envelope - data.
    """
    sink = 1
    d = geometry.set_distance(S, (sink,))
    M = np.zeros((model.dim, model.dim), dtype=complex)
    M[sink, sink] = 1.0
    prof = restricted_profile(model, M, (sink,), [S], times)[0]
    env = envelope_value(fit, np.asarray(times), d, m_norm)
    margins = env - prof
    return Corollary7Report(d_sink=d, margins=margins, holds=bool((margins >= -1e-12).all()))


def memory_time(model, S, rho0, times, threshold=0.05):
    """Decay time of the projected-block trace distance to the dephased twin.

    Propagates rho0 and its dephased counterpart, projects both onto S,
    and returns the first grid time at which the trace distance drops
    below threshold * initial and stays below for the next grid point.
    Returns (tau, flag) where flag is 'ok', 'incoherent' (zero initial
    distance), or 'no-decay' (np.inf sentinel).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    sigma0 = dephase(rho0)
    if np.abs(rho0 - sigma0).max() < NOISE_FLOOR:
        return 0.0, "incoherent"
    times = np.asarray(times, dtype=float)
    S = np.asarray(list(S), dtype=int)
    rhos = propagate_state(model, rho0, times)
    sigmas = propagate_state(model, sigma0, times)
    dist = np.empty(times.size)
    for j, (a, b) in enumerate(zip(rhos, sigmas)):
        blk = (a - b)[np.ix_(S, S)]
        dist[j] = 0.5 * np.abs(np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))).sum()
    if dist[0] < NOISE_FLOOR:
        return 0.0, "incoherent"
    level = threshold * dist[0]
    below = dist < level
    for j in range(times.size - 1):
        if below[j] and below[j + 1]:
            return float(times[j]), "ok"
    return np.inf, "no-decay"


def truncation_radius(fit, t, eps, m_norm=1.0):
    """Smallest integer r with C_QL ||M|| exp(v_QL t - mu r) <= eps."""
    if eps <= 0:
        raise ConfigError("tolerance must be positive")
    lead = fit.c_ql * m_norm * np.exp(fit.v_ql * t)
    if lead <= eps:
        return 0
    r = int(np.ceil(np.log(lead / eps) / fit.mu))
    return max(r, 0)
