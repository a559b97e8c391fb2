"""Property and exit-criteria checks, runnable as one suite.

Each check is a function ``(cfg) -> CheckResult``.  Metrics contain only
deterministic quantities (no timings), so the JSON written by
``specdisc verify --json`` is byte-identical across runs and worker caps.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import oracles, perturb, socle, spectra, zoo
from .errors import AnalysisError
from .numkernel import eig, smin, solve

DEFAULT_SEED = 1729

#: ``r(V_n) <= C / n`` for the trapezoid Volterra matrix, calibrated at
#: n = 128 (largest of n = 128, 256, 512: 3.1663) and rounded up.
VOLTERRA_RADIUS_C = 3.17


@dataclass
class VerifyConfig:
    seed: int = DEFAULT_SEED
    eq3_triples: int = 200
    eq3_tol: float = 1e-7
    rank_matrices: int = 100
    rank_probes: int = 200
    tau_instances: int = 100
    witness_families: int = 50
    commuting_pairs: int = 50
    commuting_tol: float = 1e-6
    volterra_n: int = 2048
    volterra_N: int = 12
    scan_n: tuple[int, int] = (512, 1024)
    circle_m: int = 64
    circle_K: int = 8
    circle_symbol: str = "z+0.3/z"
    probe_betas: tuple[float, ...] = (0.5, 0.9, 0.99, 1.0)
    hausdorff_pairs: int = 100


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail, "metrics": self.metrics}


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rng(cfg: VerifyConfig, tag: int):
    return np.random.default_rng([cfg.seed, tag])


# ---------------------------------------------------------------------------
# Exit criteria
# ---------------------------------------------------------------------------


def eq3_triples(cfg: VerifyConfig):
    """Random ``(x, y, lam)``; a third of the ``lam`` are eigenvalues of ``x + y``."""
    rng = _rng(cfg, 1)
    out = []
    for k in range(cfg.eq3_triples):
        n = int(rng.integers(2, 13))
        x = _crandn(rng, n, n) / np.sqrt(n)
        if k % 2:
            y = np.outer(_crandn(rng, n), _crandn(rng, n))
        else:
            y = _crandn(rng, n, n) / np.sqrt(n)
        sx = eig(x)
        mode = k % 3
        if mode == 0:
            ev = eig(x + y)
            dists = np.array([spectra.dist_to_set(z, sx) for z in ev])
            lam = complex(ev[np.argmax(dists)])
        elif mode == 1:
            lam = complex(*rng.uniform(-2, 2, 2))
        else:
            ev = eig(x + y)
            lam = complex(ev[int(rng.integers(n))]) + 1e-3 * np.exp(2j * np.pi * rng.uniform())
        if spectra.dist_to_set(lam, sx) <= 0.05:
            lam = lam + 0.2 * (1 + 1j)
        out.append((x, y, lam))
    return out


def check_eq3(cfg: VerifyConfig) -> CheckResult:
    agree = n_true = 0
    triples = eq3_triples(cfg)
    for x, y, lam in triples:
        r = perturb.criterion(x, y, lam, cfg.eq3_tol)
        agree += r.agree
        n_true += r.lhs
    ok = agree == len(triples)
    return CheckResult("eq3_equivalence", ok, {"cases": len(triples), "agree": agree, "lhs_true": n_true})


def check_spectral_rank(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 2)
    agree = 0
    ranks = []
    for k in range(cfg.rank_matrices):
        n = int(rng.integers(1, 9))
        r = int(rng.integers(0, n + 1))
        a = _crandn(rng, n, r) @ _crandn(rng, r, n) if r else np.zeros((n, n), complex)
        truth = oracles.algebraic_rank(a)
        got = socle.spectral_rank(a, probes=cfg.rank_probes, rng_seed=cfg.seed + k)
        agree += got == truth
        ranks.append(truth)
    return CheckResult(
        "spectral_rank_vs_algebraic",
        agree == cfg.rank_matrices,
        {"cases": cfg.rank_matrices, "agree": agree, "rank_histogram": np.bincount(ranks, minlength=9).tolist()},
    )


def check_tau(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 3)
    worst = [0.0, 0.0, 0.0]
    for _ in range(cfg.tau_instances):
        n = int(rng.integers(2, 9))
        a = socle.RankOneOperator(_crandn(rng, n), _crandn(rng, n))
        x = _crandn(rng, n, n)
        A = a.matrix
        na, nx = np.linalg.norm(A, 2), np.linalg.norm(x, 2)
        t = socle.char_functional(a, x)
        worst[0] = max(worst[0], np.linalg.norm(A @ x @ A - t * A, 2) / (na**2 * nx))
        expect = np.zeros(n, complex)
        expect[0] = a.tau(np.eye(n))
        worst[1] = max(worst[1], spectra.hausdorff(eig(A), expect) / na)
        # tau of the rank-one product ax at the identity is its trace
        worst[2] = max(worst[2], abs(np.trace(A @ x) - t) / (na * nx))
    ok = max(worst) <= 1e-10
    return CheckResult("tau_identities", ok, {"cases": cfg.tau_instances, "axa_residual": worst[0],
                                               "spectrum_residual": worst[1], "tau_ax_residual": worst[2]})


def check_witness(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 4)
    good = 0
    worst = 0.0
    for _ in range(cfg.witness_families):
        n = int(rng.integers(1, 7))
        dim = n + int(rng.integers(0, 3))
        fam = socle.random_idempotent_family(n, dim, rng)
        alphas = np.exp(2j * np.pi * np.arange(n) / n) * (1 + np.arange(n))
        a, y = socle.construct_commuting_witness(fam, alphas)
        comm = np.linalg.norm(y @ a - a @ y, 2) / max(np.linalg.norm(y, 2) * np.linalg.norm(a, 2), 1e-300)
        worst = max(worst, comm)
        cnt = socle.count_distinct_nonzero(y @ a)
        rk = socle.spectral_rank(a, probes=cfg.rank_probes, rng_seed=cfg.seed)
        good += comm <= 1e-9 and cnt == n and rk == n
    return CheckResult("commuting_witness", good == cfg.witness_families,
                       {"cases": cfg.witness_families, "good": good, "max_commutator": worst})


def commuting_pairs(cfg: VerifyConfig):
    rng = _rng(cfg, 5)
    out = []
    for k in range(cfg.commuting_pairs):
        r = 1 + k % 3
        n = int(rng.integers(max(3, r), 9))
        U, _ = np.linalg.qr(_crandn(rng, n, n))
        d = _crandn(rng, n)
        s = np.zeros(n, complex)
        idx = rng.choice(n, r, replace=False)
        s[idx] = _crandn(rng, r)
        if k % 4 == 0:
            # move an eigenvalue exactly onto another one of x
            s[idx[0]] = d[(idx[0] + 1) % n] - d[idx[0]]
        out.append((U @ np.diag(d) @ U.conj().T, U @ np.diag(s) @ U.conj().T, r))
    return out


def check_commuting(cfg: VerifyConfig) -> CheckResult:
    ok_cases = 0
    max_new = max_lost = 0
    for x, a, r in commuting_pairs(cfg):
        try:
            c = socle.commuting_diff_check(x, a, cfg.commuting_tol, rng_seed=cfg.seed)
        except AnalysisError:
            continue
        max_new, max_lost = max(max_new, c.new_count - r), max(max_lost, c.lost_count - r)
        ok_cases += c.new_count <= r and c.lost_count <= r and c.rank_a == r
    return CheckResult("commuting_bound", ok_cases == cfg.commuting_pairs,
                       {"cases": cfg.commuting_pairs, "ok": ok_cases,
                        "max_new_minus_rank": max_new, "max_lost_minus_rank": max_lost})


def check_volterra_laurent(cfg: VerifyConfig) -> CheckResult:
    V, Q = zoo.volterra_pair(cfg.volterra_n)
    lc = perturb.laurent_coeffs(V, Q, cfg.volterra_N)
    ref = [complex(v) for v in oracles.volterra_sine_moments(cfg.volterra_N)]
    rel = [abs(lc.coeffs[j] - ref[j]) / abs(ref[j]) for j in (1, 2, 3)]
    nonzero = bool(np.all(np.abs(lc.coeffs[1:]) > 1e-6))
    ok = max(rel) <= 1e-4 and nonzero
    return CheckResult("volterra_laurent", ok, {
        "n": cfg.volterra_n,
        "c1": lc.coeffs[1].real, "c2": lc.coeffs[2].real, "c3": lc.coeffs[3].real,
        "rel_err_c1": rel[0], "rel_err_c2": rel[1], "rel_err_c3": rel[2],
        "min_abs_c1_to_cN": float(np.abs(lc.coeffs[1:]).min()),
        "tau_Q_identity": abs(lc.coeffs[0]),
    })


def check_volterra_scan(cfg: VerifyConfig) -> CheckResult:
    counts = []
    for n in cfg.scan_n:
        V, Q = zoo.volterra_pair(n)
        tab = perturb.perturbation_scan(V, Q, [1.0], 1e-3)
        counts.append(tab.rows[0].count_above_threshold)
    radii = {}
    for n in (128, 256, 512):
        radii[str(n)] = spectra.spectral_radius(spectra.spectrum(zoo.volterra(n))) * n
    ok = counts[0] >= 10 and counts[1] >= counts[0] and max(radii.values()) <= VOLTERRA_RADIUS_C
    return CheckResult("volterra_scan", ok, {"counts": counts, "n": list(cfg.scan_n),
                                             "radius_times_n": radii, "C": VOLTERRA_RADIUS_C})


def circle_samples(cfg: VerifyConfig) -> np.ndarray:
    return zoo.parse_symbol(cfg.circle_symbol)(zoo.roots_of_unity(cfg.circle_m))


def order_slope(fun: perturb.MomentFunctional, lams=None) -> float:
    if lams is None:
        lams = np.logspace(-1, -3, 9)
    y = [abs(fun.f_minus_one(l)) for l in lams]
    return float(np.polyfit(np.log(lams), np.log(y), 1)[0])


def check_hole_filling(cfg: VerifyConfig) -> CheckResult:
    cm = zoo.circle_model(circle_samples(cfg), cfg.circle_K)
    fun = cm.functional
    slope = order_slope(fun)
    r = np.sort(np.abs(eig(cm.L + cm.Pmat)))
    K = cfg.circle_K
    ok = (fun.residuals.max() <= 1e-10 and abs(slope - K) <= 0.5
          and np.all(r[:K] < 0.1) and np.all(r[K:] > 0.5))
    return CheckResult("hole_filling", ok, {
        "symbol": cfg.circle_symbol, "m": cfg.circle_m, "K": K,
        "max_residual": float(fun.residuals.max()), "slope": slope,
        "kth_smallest_modulus": float(r[K - 1]), "next_modulus": float(r[K]),
        "holes": len(cm.holes),
    })


def check_probe(cfg: VerifyConfig) -> CheckResult:
    cm = zoo.circle_model(circle_samples(cfg), cfg.circle_K)
    big = perturb.discontinuity_probe(cm.L, cm.Pmat, cfg.probe_betas, (0j, 0.25), 0.01)
    small = perturb.discontinuity_probe(cm.L, cm.Pmat, cfg.probe_betas, (0j, 0.1), 0.005)
    K = cfg.circle_K
    c1 = big.row(1.0).eig_in_disk >= K
    c2 = all(r.min_smin >= 0.05 for r in small.rows if r.beta <= 0.9)
    c3 = small.row(1.0).min_smin <= 1e-3
    c4 = all(r.hausdorff > 0.1 for r in small.rows if r.beta <= 0.9)
    return CheckResult("discontinuity_probe", c1 and c2 and c3 and c4, {
        "betas": [r.beta for r in small.rows],
        "eig_in_disk_r0.25": [r.eig_in_disk for r in big.rows],
        "min_smin_r0.1": [r.min_smin for r in small.rows],
        "hausdorff": [r.hausdorff for r in small.rows],
        "disk_0.25": big.to_dict(), "disk_0.1": small.to_dict(),
        "eig_in_disk_beta1": c1, "smin_floor_beta_le_0.9": c2, "smin_beta1": c3, "hausdorff_gap": c4,
    })


def golden_point_sets():
    z = zoo.roots_of_unity(256)
    rng = np.random.default_rng(7)
    # eigenvalues of a random contraction plus a dense lattice of the unit disk
    G = _crandn(rng, 64, 64)
    G /= 1.01 * np.linalg.norm(G, 2)
    g = np.arange(-1, 1.0001, 0.02)
    lattice = (g[None, :] + 1j * g[:, None]).ravel()
    disk = np.concatenate([eig(G), lattice[np.abs(lattice) <= 1]])
    return {
        "circle": (z, (-2.0, 2.0, -2.0, 2.0), 1),
        "disk": (disk, (-2.0, 2.0, -2.0, 2.0), 0),
        "annulus": (np.concatenate([z, 2 * z]), (-3.0, 3.0, -3.0, 3.0), 2),
    }


def check_spectra_utils(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 10)
    worst = 0.0
    for _ in range(cfg.hausdorff_pairs):
        A, B, C = (_crandn(rng, int(rng.integers(1, 20))) for _ in range(3))
        dAB, dBA = spectra.hausdorff(A, B), spectra.hausdorff(B, A)
        worst = max(worst, spectra.hausdorff(A, A), abs(dAB - dBA),
                    spectra.hausdorff(A, C) - dAB - spectra.hausdorff(B, C))
    counts = {}
    stable = True
    for name, (pts, win, expect) in golden_point_sets().items():
        step = (win[1] - win[0]) / 399
        th = 3 * step
        c = [len(spectra.detect_holes(pts, win, res, th)) for res in (400, 799)]
        counts[name] = c
        stable &= c[0] == c[1] == expect
    z, win, _ = golden_point_sets()["circle"]
    h1 = spectra.polynomial_hull(z, win, 400, 3 * 4 / 399)
    h2 = spectra.polynomial_hull(h1)
    idem = bool(np.array_equal(h1.field, h2.field))
    ok = worst <= 1e-12 and stable and idem
    return CheckResult("spectra_utilities", ok, {"metric_violation": worst, "hole_counts": counts,
                                                 "hull_idempotent": idem})


# ---------------------------------------------------------------------------
# Module property checks
# ---------------------------------------------------------------------------


def check_numkernel_properties(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 20)
    sim = tr = det = res = normal = 0.0
    for _ in range(30):
        n = int(rng.integers(2, 10))
        M = _crandn(rng, n, n)
        P = np.eye(n) + 0.3 * _crandn(rng, n, n) / np.sqrt(n)
        e1 = eig(M)
        e2 = eig(P @ M @ np.linalg.inv(P))
        sim = max(sim, spectra.hausdorff(e1, e2) / np.linalg.norm(M, 2))
        tr = max(tr, abs(e1.sum() - np.trace(M)) / (n * np.linalg.norm(M, 2)))
        det = max(det, abs(np.prod(e1) - np.linalg.det(M)) / abs(np.linalg.det(M)))
        b = _crandn(rng, n)
        x = solve(M, b)
        res = max(res, np.linalg.norm(M @ x - b) / (np.linalg.norm(M, 2) * np.linalg.norm(x)))
        U, _ = np.linalg.qr(_crandn(rng, n, n))
        d = _crandn(rng, n)
        d[0] = 0.0
        N = U @ np.diag(d) @ U.conj().T
        normal = max(normal, smin(N))
    ok = sim <= 1e-8 and tr <= 1e-13 and det <= 1e-10 and res <= 1e-13 and normal <= 1e-13
    return CheckResult("numkernel_properties", ok, {"similarity": sim, "trace": tr, "det": det,
                                                    "solve_residual": res, "smin_singular_normal": normal})


def check_socle_properties(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 21)
    lin = 0.0
    homog = True
    for _ in range(20):
        n = int(rng.integers(2, 8))
        a = socle.RankOneOperator(_crandn(rng, n), _crandn(rng, n))
        x, y = _crandn(rng, n, n), _crandn(rng, n, n)
        al, be = _crandn(rng, 2)
        lhs = a.tau(al * x + be * y)
        lin = max(lin, abs(lhs - al * a.tau(x) - be * a.tau(y)) / (1 + abs(lhs)))
        r = int(rng.integers(0, n + 1))
        b = _crandn(rng, n, r) @ _crandn(rng, r, n) if r else np.zeros((n, n), complex)
        c = complex(_crandn(rng, 1)[0]) * 10 ** rng.uniform(-3, 3)
        homog &= socle.spectral_rank(c * b, 60, rng_seed=1) == socle.spectral_rank(b, 60, rng_seed=1) == r
    return CheckResult("socle_properties", lin <= 1e-10 and homog, {"tau_linearity": lin, "homogeneity": homog})


def check_perturb_properties(cfg: VerifyConfig) -> CheckResult:
    rng = _rng(cfg, 22)
    worst_ls = worst_laurent = 0.0
    for _ in range(15):
        n = int(rng.integers(2, 9))
        x = _crandn(rng, n, n) / np.sqrt(n)
        P = socle.RankOneOperator(_crandn(rng, n), _crandn(rng, n))
        beta = complex(*rng.uniform(0.5, 2.0, 2))
        sx = eig(x)
        target = np.array([z for z in eig(x + P.matrix / beta) if spectra.dist_to_set(z, sx) > 1e-8])
        R = max(1.0, float(np.abs(target).max()) if target.size else 1.0) + 1.0
        roots = perturb.level_set_roots(x, P, beta, (-R, R, -R, R))
        if target.size or roots:
            worst_ls = max(worst_ls, spectra.hausdorff(target, roots) if (target.size and roots) else np.inf)
        lc = perturb.laurent_coeffs(x, P, 12)
        nx = np.linalg.norm(x, 2)
        lam = 2.5 * nx * np.exp(2j * np.pi * rng.uniform())
        f = perturb.resolvent_scalar(x, P, lam)
        bound = 2 * (nx / abs(lam)) ** 13 * np.linalg.norm(P.u) * np.linalg.norm(P.phi)
        worst_laurent = max(worst_laurent, abs(f - lc.partial_sum(lam)) / bound)
    return CheckResult("perturb_properties", worst_ls <= 1e-6 and worst_laurent <= 1.0,
                       {"level_set_vs_eig_hausdorff": worst_ls, "laurent_tail_ratio": worst_laurent})


def check_secular_oracle(cfg: VerifyConfig) -> CheckResult:
    a = circle_samples(cfg)
    fun, P = perturb.hole_filling_functional(a, cfg.circle_K)
    roots = np.sort(np.abs(oracles.secular_roots(a, fun.w, np.ones(a.size), 1.0)))
    K = cfg.circle_K
    ok = bool(np.all(roots[:K] < 0.1) and np.all(roots[K:] > 0.5))
    return CheckResult("hole_filling_secular_oracle", ok,
                       {"kth_smallest": float(roots[K - 1]), "next": float(roots[K])})


def check_zoo_properties(cfg: VerifyConfig) -> CheckResult:
    n = 64
    V = zoo.volterra(n)
    t = zoo.volterra_nodes(n)
    const = float(np.abs(V @ np.ones(n) - t).max())
    sh = spectra.spectrum(zoo.shift(n), 1e-8)
    nil = len(sh) == 1 and sh.mults[0] == n and abs(sh.points[0]) < 1e-12
    circ = spectra.hausdorff(eig(zoo.circulant_closure(n)), zoo.roots_of_unity(n))
    _, Q = zoo.volterra_pair(1024)
    tau_q = abs(Q.tau(np.eye(1024)))
    rk = socle.spectral_rank(zoo.volterra_pair(16)[1].matrix, 50)
    ok = const <= 1e-12 and nil and circ <= 1e-12 and tau_q <= 1e-10 and rk == 1
    return CheckResult("zoo_properties", ok, {"volterra_constant_error": const, "shift_nilpotent": nil,
                                              "circulant_vs_roots": circ, "tau_Q_identity": tau_q,
                                              "spectral_rank_Q": rk})


CRITERIA: dict[int, Callable[[VerifyConfig], CheckResult]] = {
    1: check_eq3,
    2: check_spectral_rank,
    3: check_tau,
    4: check_witness,
    5: check_commuting,
    6: check_volterra_laurent,
    7: check_volterra_scan,
    8: check_hole_filling,
    9: check_probe,
    10: check_spectra_utils,
}

PROPERTIES: list[Callable[[VerifyConfig], CheckResult]] = [
    check_numkernel_properties,
    check_socle_properties,
    check_perturb_properties,
    check_secular_oracle,
    check_zoo_properties,
]


def run_check(fn, cfg: VerifyConfig) -> CheckResult:
    t0 = time.perf_counter()
    try:
        res = fn(cfg)
    except Exception as exc:  # a crashing check is a failed check
        res = CheckResult(fn.__name__.removeprefix("check_"), False, {}, f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_all(cfg: VerifyConfig | None = None, log: Callable[[str], None] | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig()
    results = []
    for fn in list(CRITERIA.values()) + PROPERTIES:
        res = run_check(fn, cfg)
        if log:
            log(f"{'PASS' if res.passed else 'FAIL'}  {res.name}  ({res.seconds:.1f}s) {res.detail}")
        results.append(res)
    return results


def report(results: list[CheckResult], cfg: VerifyConfig) -> dict:
    return {
        "seed": cfg.seed,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
