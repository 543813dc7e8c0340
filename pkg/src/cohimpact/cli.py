"""Command-line front end: scenario runs, sweeps, and the verification corpus.

Subcommands
-----------
dimer-impact      donor population and impact curve of the two-site model
dimer-efficiency  dephasing sweep of trapping efficiency (noise-assisted peak)
dimer-gate        gated-detector POVM analysis with data-processing checks
chain-impact      trapping-effect summary of an N-site chain over time
chain-bounds      theorem suite report for one chain snapshot
chain-optimizers  distinguished optimizer states of the trapping effect
lightcone         restricted impact profiles and the cone-envelope fit
verify            randomized theorem corpus; exits nonzero on any violation

Configs are plain text, one "key = value [unit]" per line, with '#'
comments; units (cm^-1, K, fs, ps, ps^-1) are normalized on load. Exit
codes: 0 success, 1 numerical or verification failure, 2 usage error.
The COHIMPACT_WORKERS environment variable caps corpus parallelism
(default: cpu count); results are bit-identical for any worker count.
"""

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .qops import (CM1_TO_RADPS, KELVIN_TO_RADPS, ConfigError, NumericalError,
                   operator_norm)
from .lindblad import heisenberg_evolve, propagate_state
from .impact import impact_from_series, impact_value
from .heom import DrudeLorentzBath, propagate_heom, reconstruct_observable_heom
from . import dimer as dm
from . import chain as ch
from .lightcone import (Geometry, arrival_times, corollary7_check,
                        fit_envelope, restricted_profile, truncation_radius)
from .emit import write_csv, write_json

# ---------------------------------------------------------------------------
# config files

_UNIT_SCALE = {
    "cm^-1": CM1_TO_RADPS,
    "K": KELVIN_TO_RADPS,
    "fs": 1e-3,
    "ps": 1.0,
    "ps^-1": 1.0,
    "1/ps": 1.0,
    "rad/ps": 1.0,
}


def parse_config(path):
    """Read "key = value [unit]" lines into a dict in internal units."""
    out = {}
    with open(path) as fh:
        lines = fh.readlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value [unit]', got {raw.strip()!r}")
        key, rhs = (s.strip() for s in line.split("=", 1))
        if not key or not rhs:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        tokens = rhs.split()
        if len(tokens) == 1:
            try:
                out[key] = float(tokens[0])
            except ValueError:
                out[key] = tokens[0]
        elif len(tokens) == 2:
            try:
                value = float(tokens[0])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: {tokens[0]!r} is not a number") from None
            if tokens[1] not in _UNIT_SCALE:
                known = ", ".join(sorted(_UNIT_SCALE))
                raise ConfigError(f"{path}:{lineno}: unknown unit {tokens[1]!r} (known: {known})")
            out[key] = value * _UNIT_SCALE[tokens[1]]
        else:
            raise ConfigError(f"{path}:{lineno}: too many tokens in {rhs!r}")
    if not out:
        raise ConfigError(f"{path}: config file contains no settings")
    return out


def _settings(defaults, args):
    """Defaults overridden by the config file; unknown keys are rejected."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        loaded = parse_config(args.config)
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}; valid: {sorted(defaults)}")
        cfg.update(loaded)
    return cfg


def _outpath(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# ---------------------------------------------------------------------------
# dimer subcommands

def cmd_dimer_impact(args):
    tau_c = {"fast": 2.65e-3, "slow": 0.265}[args.regime]
    defaults = {
        "coupling": 100.0 * CM1_TO_RADPS,
        "detuning": 100.0 * CM1_TO_RADPS,
        "temperature": 300.0 * KELVIN_TO_RADPS,
        "tau_c": tau_c,
        "ratio": float(args.ratio),
        "t_max": 1.0,
        "n_times": 201,
    }
    cfg = _settings(defaults, args)
    reorg = cfg["coupling"] / cfg["ratio"]
    cutoff = 1.0 / cfg["tau_c"]
    times = np.linspace(0.0, cfg["t_max"], int(cfg["n_times"]))
    rho0 = dm.donor_state()
    M = np.zeros((4, 4), dtype=complex)
    M[dm.D_IDX, dm.D_IDX] = 1.0
    if args.engine == "heom":
        n_k, depth = (6, 8) if args.deep else (3, 5)
        bath = DrudeLorentzBath(reorg, cutoff, cfg["temperature"], n_matsubara=n_k)
        params = dm.DimerParams(detuning=cfg["detuning"], coupling=cfg["coupling"], bath=bath)
        model = dataclasses.replace(dm.build_dimer(params, engine="heom"), depth=depth)
        states = propagate_heom(model, rho0, times)
        series = reconstruct_observable_heom(model, M, times)
    else:
        g_eff = dm.gamma_eff(reorg, cfg["temperature"], cutoff)
        params = dm.DimerParams(detuning=cfg["detuning"], coupling=cfg["coupling"],
                                dephasing=g_eff)
        model = dm.build_dimer(params)
        states = propagate_state(model, rho0, times)
        series = heisenberg_evolve(model, M, times)
    pops = np.real([s[dm.D_IDX, dm.D_IDX] for s in states])
    _, curve = impact_from_series(series)
    path = _outpath(args, "dimer_impact.csv")
    write_csv(path, ["t_ps", "donor_population", "impact"],
              zip(times, pops, curve))
    print(f"wrote {path} ({times.size} rows, engine={args.engine}, regime={args.regime})")
    return 0


def cmd_dimer_efficiency(args):
    defaults = {
        "detuning": 200.0 * CM1_TO_RADPS,
        "coupling": 10.0 * CM1_TO_RADPS,
        "gamma_d": 0.1,
        "gamma_a": 0.1,
        "kappa_a": 1.0,
        "n_points": 25,
    }
    cfg = _settings(defaults, args)
    base = dm.DimerParams(detuning=cfg["detuning"], coupling=cfg["coupling"],
                          gamma_d=cfg["gamma_d"], gamma_a=cfg["gamma_a"],
                          kappa_a=cfg["kappa_a"])
    grid = np.geomspace(cfg["kappa_a"] / 2.0, 500.0 * cfg["kappa_a"], int(cfg["n_points"]))
    rows = dm.sweep_enaqt(base, grid)
    header = list(rows[0].keys())
    path = _outpath(args, "dimer_efficiency.csv")
    write_csv(path, header, rows)
    free = np.array([r["eta_free"] for r in rows])
    k = int(np.argmax(free))
    print(f"wrote {path}; eta_free peaks at gamma = {grid[k]:.4g} ps^-1 "
          f"(eta = {free[k]:.6f}; endpoints {free[0]:.6f}, {free[-1]:.6f})")
    return 0


def cmd_dimer_gate(args):
    defaults = {
        "detuning": 100.0 * CM1_TO_RADPS,
        "coupling": 100.0 * CM1_TO_RADPS,
        "gamma_d": 0.1,
        "gamma_a": 0.1,
        "kappa_a": 1.0,
        "dephasing": 1.0,
        "start": 0.1,
        "length": 0.2,
        "seed": 0,
    }
    cfg = _settings(defaults, args)
    params = dm.DimerParams(detuning=cfg["detuning"], coupling=cfg["coupling"],
                            gamma_d=cfg["gamma_d"], gamma_a=cfg["gamma_a"],
                            kappa_a=cfg["kappa_a"], dephasing=cfg["dephasing"])
    model = dm.build_dimer(params)
    effects = [dm.gate_effect(model, dm.GateSpec(c, cfg["start"], cfg["length"]))
               for c in ("A", "D")]
    comp = dm.gate_complement(effects)
    rng = np.random.default_rng(int(cfg["seed"]))
    V = rng.random((2, 2))
    V /= V.sum(axis=0, keepdims=True)  # column-stochastic merge
    times = np.linspace(0.0, 1.0, 11)
    lhs, rhs = dm.dpi_check(model, effects, V, times)
    report = {
        "gate": {"start": cfg["start"], "length": cfg["length"]},
        "impact_A": impact_value(effects[0]),
        "impact_D": impact_value(effects[1]),
        "complement_min_eig": float(np.linalg.eigvalsh(comp).min()),
        "dpi_max_violation": float((lhs - rhs).max()),
        "dpi_holds": bool((lhs <= rhs + 1e-9).all()),
    }
    path = _outpath(args, "dimer_gate.json")
    write_json(path, report)
    print(f"wrote {path}; DPI holds: {report['dpi_holds']}")
    if not report["dpi_holds"]:
        raise NumericalError("data-processing inequality violated")
    return 0


# ---------------------------------------------------------------------------
# chain subcommands

_CHAIN_DEFAULTS = {
    "n_sites": 8,
    "coupling": 100.0 * CM1_TO_RADPS,
    "energy_spread": 0.0,
    "gamma": 0.01,
    "kappa": 1.0,
    "dephasing": 0.25,
    "seed": 0,
}


def _chain_from_cfg(cfg):
    n = int(cfg["n_sites"])
    rng = np.random.default_rng(int(cfg["seed"]))
    energies = rng.normal(0.0, cfg["energy_spread"], n) if cfg["energy_spread"] > 0 else 0.0
    params = ch.ChainParams(n_sites=n, energies=energies, couplings=cfg["coupling"],
                            gamma=cfg["gamma"], kappa=cfg["kappa"],
                            dephasing=cfg["dephasing"])
    return ch.build_chain(params)


def cmd_chain_impact(args):
    defaults = dict(_CHAIN_DEFAULTS, t_max=2.0, n_times=41)
    cfg = _settings(defaults, args)
    model = _chain_from_cfg(cfg)
    times = np.linspace(0.0, cfg["t_max"], int(cfg["n_times"]))
    _, mats = ch.trap_effect_series(model, times)
    rows = []
    for t, m in zip(times, mats):
        emax, _ = ch.eta_max(m)
        einc, _ = ch.eta_incoh(m)
        _, B = ch.decompose(m)
        rows.append([t, emax, einc, emax - einc, operator_norm(B)])
    path = _outpath(args, "chain_impact.csv")
    write_csv(path, ["t_ps", "eta_max", "eta_incoh", "advantage", "impact"], rows)
    print(f"wrote {path} ({len(rows)} rows, N = {int(cfg['n_sites'])})")
    return 0


def cmd_chain_bounds(args):
    defaults = dict(_CHAIN_DEFAULTS, t=1.0)
    cfg = _settings(defaults, args)
    model = _chain_from_cfg(cfg)
    rep = ch.trap_report(model, cfg["t"])
    ok1, margin1 = ch.theorem1_check(rep)
    n = int(cfg["n_sites"])
    donor = tuple(range(2, n + 2))
    pairs = [ch.corollary2_bounds(rep.m_trap, i, j, donor=donor)
             for i in range(n) for j in range(i + 1, n)]
    thm3 = ch.theorem3_check(rep.m_trap, rep.witness_state, donor=donor)
    cor4 = ch.corollary4_check(rep.m_trap, rep.witness_state, donor=donor)
    thm5 = ch.theorem5_check(rep.m_trap, donor=donor)
    report = {
        "t_ps": cfg["t"],
        "eta_max": rep.eta_max,
        "eta_incoh": rep.eta_incoh,
        "impact": rep.impact,
        "theorem1": {"holds": ok1, "margin": margin1},
        "corollary2": pairs,
        "theorem3": thm3,
        "corollary4": cor4,
        "theorem5": thm5,
    }
    path = _outpath(args, "chain_bounds.json")
    write_json(path, report)
    all_ok = ok1 and all(p.eta_max_holds for p in pairs)
    print(f"wrote {path}; theorem 1 margin {margin1:.3e}; all pairwise bounds hold: {all_ok}")
    if not all_ok:
        raise NumericalError("a chain bound failed at the requested snapshot")
    return 0


def cmd_chain_optimizers(args):
    defaults = dict(_CHAIN_DEFAULTS, t=1.0)
    cfg = _settings(defaults, args)
    model = _chain_from_cfg(cfg)
    m_trap = ch.trap_effect(model, cfg["t"])
    donor = tuple(range(2, int(cfg["n_sites"]) + 2))
    records = ch.optimizer_analysis(m_trap, donor=donor)
    path = _outpath(args, "chain_optimizers.json")
    write_json(path, {"t_ps": cfg["t"], "records": records})
    for r in records:
        print(f"{r.label}: value {r.eigenvalue:.6f}, l1 ratio {r.l1_ratio:.4f}, "
              f"ipr {r.ipr:.4f}, degenerate {r.degenerate}")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# light cone

def cmd_lightcone(args):
    defaults = {
        "n_sites": 50,
        "coupling": 100.0 * CM1_TO_RADPS,
        "gamma": 0.01,
        "kappa": 1.0,
        "dephasing": 0.25,
        "t_max": 2.5,
        "n_times": 51,
        "threshold": 1e-3,
        "epsilon": 1e-6,
    }
    cfg = _settings(defaults, args)
    n = int(cfg["n_sites"])
    params = ch.ChainParams(n_sites=n, couplings=cfg["coupling"], gamma=cfg["gamma"],
                            kappa=cfg["kappa"], dephasing=cfg["dephasing"])
    model = ch.build_chain(params)
    geo = Geometry.chain(n)
    sink = ch.S_IDX
    # adjacent-site pairs stepped away from the trap end of the chain
    d_grid = [10, 20, 30, 40] if n >= 45 else sorted({max(2, n // 4), n // 2, n - 2})
    subsets = [(n + 1 - d, n + 2 - d) for d in d_grid if n + 1 - d >= 2]
    M = np.zeros((model.dim, model.dim), dtype=complex)
    M[sink, sink] = 1.0
    times = np.linspace(0.0, cfg["t_max"], int(cfg["n_times"]))
    profiles = restricted_profile(model, M, (sink,), subsets, times)
    dists = np.array([geo.set_distance(s, (sink,)) for s in subsets])
    fit = fit_envelope(dists, times, profiles)
    arr = arrival_times(times, profiles, threshold=cfg["threshold"])
    cor7 = corollary7_check(model, geo, subsets[0], times, fit)
    t_mid = 0.2 * cfg["t_max"]
    report = {
        "fit": fit,
        "distances": dists,
        "arrival_times": arr,
        "corollary7_holds": cor7.holds,
        "truncation_radius": {"t_ps": t_mid, "epsilon": cfg["epsilon"],
                              "radius": truncation_radius(fit, t_mid, cfg["epsilon"])},
    }
    csv_path = _outpath(args, "lightcone_profiles.csv")
    write_csv(csv_path, ["t_ps"] + [f"impact_d{int(d)}" for d in dists],
              np.column_stack([times, profiles.T]))
    json_path = _outpath(args, "lightcone_fit.json")
    write_json(json_path, report)
    print(f"wrote {csv_path} and {json_path}; mu = {fit.mu:.4f}, "
          f"v_LC = {fit.v_lc:.2f} sites/ps, distance R^2 = {fit.distance_r_squared:.4f}")
    return 0


# ---------------------------------------------------------------------------
# verification corpus

CORPUS_TOL = 1e-9


def random_chain_instance(seed_seq):
    """One randomized chain snapshot: (m_trap, n_sites, t)."""
    rng = np.random.default_rng(seed_seq)
    n = int(rng.integers(2, 13))
    energies = rng.normal(0.0, 100.0 * CM1_TO_RADPS, n)
    couplings = rng.uniform(20.0, 150.0, n - 1) * CM1_TO_RADPS
    params = ch.ChainParams(n_sites=n, energies=energies, couplings=couplings,
                            gamma=float(rng.uniform(0.0, 0.2)),
                            kappa=float(rng.uniform(0.2, 2.0)),
                            dephasing=float(rng.uniform(0.0, 2.0)))
    model = ch.build_chain(params)
    t = float(rng.uniform(0.05, 2.0))
    donor = tuple(range(2, n + 2))
    return ch.trap_effect(model, t), donor, t, rng


def check_instance(seed_seq):
    """Run the theorem battery on one random instance; returns margins."""
    m_trap, donor, t, rng = random_chain_instance(seed_seq)
    n = len(donor)
    rep_margins = {}
    violations = []
    emax, witness = ch.eta_max(m_trap, donor)
    einc, _ = ch.eta_incoh(m_trap, donor)
    _, B = ch.decompose(m_trap, donor)
    impact = operator_norm(B)
    # theorem 1: coherent advantage never exceeds the impact bound
    margin = impact - (emax - einc)
    rep_margins["theorem1"] = margin
    if margin < -CORPUS_TOL:
        violations.append(("theorem1", margin))
    # corollary 2: pairwise two-level bounds with expansion remainders
    pair_margin = np.inf
    n_pairs = min(3, n * (n - 1) // 2)
    seen = set()
    while len(seen) < n_pairs:
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        seen.add((i, j))
    for i, j in sorted(seen):
        pb = ch.corollary2_bounds(m_trap, i, j, donor=donor)
        pair_margin = min(pair_margin, emax - pb.lam_plus)
        for name, ok in (("eta_max", pb.eta_max_holds), ("nd", pb.nd_within),
                         ("ws", pb.ws_within)):
            if ok is False:
                violations.append((f"corollary2_{name}", -1.0))
    rep_margins["corollary2"] = pair_margin
    # theorems 3-5 on the yield-optimal witness
    thm3 = ch.theorem3_check(m_trap, witness, donor=donor)
    m3 = np.inf
    for ok, val, req in ((thm3.l1_holds, thm3.l1_value, thm3.l1_required),
                         (thm3.support_holds, thm3.support_sites, thm3.support_required),
                         (thm3.entropic_holds, thm3.entropic_value, thm3.entropic_required)):
        if ok is None:
            continue
        m3 = min(m3, float(val) - float(req))
        if not ok:
            violations.append(("theorem3", float(val) - float(req)))
    rep_margins["theorem3"] = m3
    cor4 = ch.corollary4_check(m_trap, witness, donor=donor)
    m4 = min(cor4.frobenius_bound - cor4.ipr_value, cor4.weak_bound - cor4.ipr_value)
    rep_margins["corollary4"] = m4
    if not (cor4.frobenius_holds and cor4.weak_holds):
        violations.append(("corollary4", m4))
    thm5 = ch.theorem5_check(m_trap, donor=donor)
    if thm5.applicable:
        m5 = thm5.bound - thm5.deficit
        rep_margins["theorem5"] = m5
        if not thm5.holds:
            violations.append(("theorem5", m5))
    else:
        rep_margins["theorem5"] = np.inf
    return rep_margins, violations


def falsification_sample(m_trap, n_samples, rng, donor=None):
    """Random-state search for counterexamples to the necessary conditions.

    Samples Haar-random pure states on the donor block and counts states
    whose yield exceeds the spectral cap or whose delocalization falls
    below the thresholds implied by their own coherent advantage.
    """
    Mb = ch._donor_block(m_trap, donor)
    nb = Mb.shape[0]
    D = np.real(np.diag(Mb)).copy()
    B = Mb - np.diag(np.diag(Mb))
    emax, _ = ch.eta_max(m_trap, donor)
    einc = float(D.max())
    c_max = float(np.abs(B).max())
    impact = operator_norm(B)
    psi = rng.standard_normal((n_samples, nb)) + 1j * rng.standard_normal((n_samples, nb))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    eta = np.real(np.einsum("si,ij,sj->s", psi.conj(), Mb, psi))
    bad = int((eta > emax + CORPUS_TOL).sum())
    delta = eta - einc
    hot = delta > CORPUS_TOL
    if hot.any() and c_max > 0:
        p = np.abs(psi[hot]) ** 2
        l1 = (np.abs(psi[hot, :, None] * psi[hot, None, :].conj()).sum(axis=(1, 2))
              - 1.0)
        bad += int((l1 < delta[hot] / c_max - CORPUS_TOL).sum())
        ipr = (p ** 2).sum(axis=1)
        bad += int((ipr > 1.0 - delta[hot] ** 2 / (nb * impact ** 2) + CORPUS_TOL).sum())
    return bad


def run_corpus(instances, seed, workers=None):
    """Randomized theorem corpus; returns (per-theorem min margins, violations)."""
    seqs = np.random.SeedSequence(seed).spawn(instances)
    if workers is None:
        workers = int(os.environ.get("COHIMPACT_WORKERS", os.cpu_count() or 1))
    mins = {}
    violations = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for margins, viol in pool.map(check_instance, seqs):
            for k, v in margins.items():
                mins[k] = min(mins.get(k, np.inf), v)
            violations.extend(viol)
    return mins, violations


def cmd_verify(args):
    mins, violations = run_corpus(args.instances, args.seed)
    falsified = 0
    if args.falsify > 0:
        seqs = np.random.SeedSequence(args.seed + 1).spawn(args.falsify)
        for sq in seqs:
            m_trap, donor, _, rng = random_chain_instance(sq)
            falsified += falsification_sample(m_trap, args.samples, rng, donor=donor)
    for name in sorted(mins):
        print(f"{name}: min margin {mins[name]:.6e} over {args.instances} instances")
    if args.falsify > 0:
        print(f"falsification: {falsified} counterexamples in "
              f"{args.falsify} x {args.samples} sampled states")
    report = {"instances": args.instances, "seed": args.seed,
              "min_margins": mins, "violations": [list(v) for v in violations],
              "falsification_counterexamples": falsified}
    write_json(_outpath(args, "verify.json"), report)
    if violations or falsified:
        print(f"FAILED: {len(violations)} theorem violations, "
              f"{falsified} sampled counterexamples", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    parser = argparse.ArgumentParser(
        prog="cohimpact",
        description="Coherence-impact analysis of open-system transport models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config file (key = value unit)")
        p.add_argument("--out", default="out", help="output directory (default: out)")

    p = sub.add_parser("dimer-impact", help="donor population and impact curve")
    common(p)
    p.add_argument("--regime", choices=("fast", "slow"), default="fast")
    p.add_argument("--ratio", type=float, default=10.0,
                   help="coupling to reorganization-energy ratio (default 10)")
    p.add_argument("--engine", choices=("lindblad", "heom"), default="lindblad")
    p.add_argument("--deep", action="store_true",
                   help="deep hierarchy (depth 8, 6 Matsubara terms); slow")
    p.set_defaults(func=cmd_dimer_impact)

    p = sub.add_parser("dimer-efficiency", help="dephasing sweep of the yield")
    common(p)
    p.set_defaults(func=cmd_dimer_efficiency)

    p = sub.add_parser("dimer-gate", help="gated-detector POVM analysis")
    common(p)
    p.set_defaults(func=cmd_dimer_gate)

    p = sub.add_parser("chain-impact", help="trapping-effect summary over time")
    common(p)
    p.set_defaults(func=cmd_chain_impact)

    p = sub.add_parser("chain-bounds", help="theorem suite for one snapshot")
    common(p)
    p.set_defaults(func=cmd_chain_bounds)

    p = sub.add_parser("chain-optimizers", help="distinguished optimizer states")
    common(p)
    p.set_defaults(func=cmd_chain_optimizers)

    p = sub.add_parser("lightcone", help="cone-envelope fit on a long chain")
    common(p)
    p.set_defaults(func=cmd_lightcone)

    p = sub.add_parser("verify", help="randomized theorem corpus")
    common(p)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--falsify", type=int, default=0,
                   help="additionally sample-search this many instances")
    p.add_argument("--samples", type=int, default=100000,
                   help="states per falsification instance")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure ({args.command}): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
