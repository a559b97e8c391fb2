"""Command-line interface: ``specdisc <command> --op <spec> [flags]``.

Exit codes: 0 success, 1 analysis failure (violated bound, precondition or
failed verification), 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import io, perturb, socle, spectra, verify, zoo
from ._parallel import WORKERS_ENV
from .errors import InputError, SpecDiscError
from .numkernel import eig, norm2

COMMANDS = ("spectrum", "pseudospectrum", "holes", "rank", "laurent", "levelset", "holefill", "probe", "scan", "verify")

# flags whose value may legitimately start with "-" (e.g. --window -2,2,-2,2)
_VALUE_FLAGS = {
    "--op", "--pert", "--window", "--res", "--tol", "--K", "--betas", "--alphas", "--seed", "--json",
    "--csv", "--pgm", "--threshold", "--beta", "--N", "--disk", "--grid-step", "--thickening",
    "--probes", "--workers", "--cap",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    operator: str | None = None
    pert: str | None = None
    window: tuple[float, float, float, float] | None = None
    resolution: tuple[int, int] | None = None
    tol: float | None = None
    K: int = 8
    betas: list[float] = field(default_factory=lambda: [0.5, 0.9, 0.99, 1.0])
    alphas: list[complex] = field(default_factory=lambda: [0j, 1.0])
    beta: complex = 1.0
    seed: int = verify.DEFAULT_SEED
    threshold: float = 1e-3
    N: int = 12
    probes: int = 200
    disk: tuple[complex, float] = (0j, 0.25)
    grid_step: float = 0.01
    thickening: float | None = None
    cap: float = spectra.PSEUDO_CAP
    json: str | None = None
    csv: str | None = None
    pgm: str | None = None


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {text!r}")
    return vals


def _complexes(text: str) -> list[complex]:
    try:
        return [complex(t.strip().replace("i", "j")) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated complex numbers, got {text!r}") from exc


def _resolution(text: str) -> tuple[int, int]:
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad resolution {text!r}") from exc
    if len(vals) == 1:
        return vals[0], vals[0]
    if len(vals) == 2:
        return vals[0], vals[1]
    raise UsageError(f"bad resolution {text!r}")


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specdisc", description="Finite-scale spectral discontinuity toolkit.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--op", help="operator spec kind:dim[:key=value,...]")
    p.add_argument("--pert", help="rank-one perturbation spec (rank-one:n:u=...,phi=...)")
    p.add_argument("--window", help="re_min,re_max,im_min,im_max")
    p.add_argument("--res", help="N or NX,NY")
    p.add_argument("--tol", type=float)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--betas")
    p.add_argument("--beta", default="1")
    p.add_argument("--alphas")
    p.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--N", type=int, default=12, help="number of Laurent coefficients")
    p.add_argument("--probes", type=int, default=200)
    p.add_argument("--disk", default="0,0,0.25", help="center_re,center_im,radius")
    p.add_argument("--grid-step", type=float, default=0.01)
    p.add_argument("--thickening", type=float)
    p.add_argument("--cap", type=float, default=spectra.PSEUDO_CAP)
    p.add_argument("--workers", type=int, help=f"worker cap (same as ${WORKERS_ENV})")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.add_argument("--pgm")
    return p


def parse_args(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(_normalize_argv(argv))
    if ns.workers is not None:
        os.environ[WORKERS_ENV] = str(max(1, ns.workers))
    disk = _floats(ns.disk, 3)
    cfg = RunConfig(
        command=ns.command,
        operator=ns.op,
        pert=ns.pert,
        window=tuple(_floats(ns.window, 4)) if ns.window else None,
        resolution=_resolution(ns.res) if ns.res else None,
        tol=ns.tol,
        K=ns.K,
        seed=ns.seed,
        threshold=ns.threshold,
        N=ns.N,
        probes=ns.probes,
        disk=(complex(disk[0], disk[1]), disk[2]),
        grid_step=ns.grid_step,
        thickening=ns.thickening,
        cap=ns.cap,
        json=ns.json,
        csv=ns.csv,
        pgm=ns.pgm,
    )
    if ns.betas:
        cfg.betas = _floats(ns.betas)
    if ns.alphas:
        cfg.alphas = _complexes(ns.alphas)
    cfg.beta = _complexes(ns.beta)[0]
    if cfg.command != "verify" and not cfg.operator:
        raise UsageError(f"{cfg.command} requires --op")
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _operator(cfg: RunConfig) -> tuple[zoo.OperatorSpec, np.ndarray]:
    spec = zoo.OperatorSpec.parse(cfg.operator)
    return spec, zoo.build(spec)


def _perturbation(cfg: RunConfig, spec: zoo.OperatorSpec) -> socle.RankOneOperator:
    if cfg.pert:
        pspec = zoo.OperatorSpec.parse(cfg.pert)
        if pspec.kind != "rank_one":
            raise UsageError("--pert must be a rank-one spec")
        if pspec.dim != spec.dim:
            raise UsageError("--pert dimension differs from --op")
        return socle.RankOneOperator(zoo._parse_vector(pspec.params["u"], pspec.dim),
                                     zoo._parse_vector(pspec.params["phi"], pspec.dim))
    if spec.kind == "volterra":
        T = float(spec.params.get("T", 2 * np.pi))
        return zoo.volterra_pair(spec.dim, T)[1]
    raise UsageError("this command needs --pert (defaults exist only for volterra)")


def _auto_window(M: np.ndarray) -> tuple[float, float, float, float]:
    # the norm disk contains every eigenvalue and the interesting part of the pseudospectra
    ev = eig(M)
    return perturb.auto_window(ev, complex(ev.mean()), norm2(M))


def _emit(cfg: RunConfig, payload: dict) -> None:
    if cfg.json:
        io.write_json(cfg.json, payload)


def cmd_spectrum(cfg: RunConfig) -> int:
    _, M = _operator(cfg)
    S = spectra.spectrum(M, 1e-8 if cfg.tol is None else cfg.tol)
    print(f"{len(S)} distinct points, total multiplicity {S.total_multiplicity}, "
          f"spectral radius {spectra.spectral_radius(S):.6g}")
    _emit(cfg, S.to_dict())
    return 0


def cmd_pseudospectrum(cfg: RunConfig) -> int:
    _, M = _operator(cfg)
    window = cfg.window or _auto_window(M)
    G = spectra.pseudospectrum(M, window, cfg.resolution or (100, 100), cfg.cap)
    if cfg.csv:
        G.to_csv(cfg.csv)
    if cfg.pgm:
        G.to_pgm(cfg.pgm)
    summary = {"window": list(G.window), "resolution": list(G.resolution), "cap": cfg.cap,
               "min": float(G.field.min()), "max": float(G.field.max()),
               "clipped_cells": int(G.clipped.sum())}
    print(f"log10 resolvent norm in [{summary['min']:.4g}, {summary['max']:.4g}], "
          f"{summary['clipped_cells']} clipped cells")
    _emit(cfg, summary)
    return 0


def cmd_holes(cfg: RunConfig) -> int:
    _, M = _operator(cfg)
    S = spectra.spectrum(M, 1e-10 if cfg.tol is None else cfg.tol)
    res = cfg.resolution or (400, 400)
    th = cfg.thickening
    window = cfg.window
    if window is None:
        th0 = th if th is not None else spectra.suggest_thickening(S, perturb.auto_window(S.points), res)
        window = perturb.auto_window(S.points, margin=2.5 * th0)
    if th is None:
        th = spectra.suggest_thickening(S, window, res)
    rep = spectra.detect_holes(S, window, res, th)
    print(f"{len(rep)} hole(s); thickening {th:.4g}")
    for h in rep.holes:
        z = h.representative_point
        print(f"  near {z.real:+.4f}{z.imag:+.4f}i  cells={h.cell_count}  area~{h.area_estimate:.4g}")
    _emit(cfg, rep.to_dict())
    return 0


def cmd_rank(cfg: RunConfig) -> int:
    _, M = _operator(cfg)
    r = socle.spectral_rank(M, cfg.probes, 1e-8 if cfg.tol is None else cfg.tol, cfg.seed)
    print(f"spectral rank {r}")
    _emit(cfg, {"spectral_rank": r, "probes": cfg.probes, "seed": cfg.seed})
    return 0


def cmd_laurent(cfg: RunConfig) -> int:
    spec, M = _operator(cfg)
    P = _perturbation(cfg, spec)
    lc = perturb.laurent_coeffs(M, P, cfg.N, 1e-12 if cfg.tol is None else cfg.tol)
    for j, c in enumerate(lc.coeffs):
        print(f"c_{j} = {c.real:.12g}{c.imag:+.3g}i")
    print(f"essential singularity witness: {lc.essential_singularity_witness}")
    if cfg.csv:
        lc.to_csv(cfg.csv)
    _emit(cfg, lc.to_dict())
    return 0


def cmd_levelset(cfg: RunConfig) -> int:
    spec, M = _operator(cfg)
    P = _perturbation(cfg, spec)
    window = cfg.window or perturb.auto_window(eig(M + P.matrix / cfg.beta))
    res = perturb.find_level_set(M, P, cfg.beta, window, 1e-8 if cfg.tol is None else cfg.tol)
    print(f"{len(res.roots)} root(s) of f = {cfg.beta} in window; {len(res.diverged)} Newton failure(s)")
    _emit(cfg, {"beta": io.cplx(cfg.beta), "window": list(window),
                "roots": [io.cplx(r) for r in res.roots],
                "residuals": [float(r) for r in res.residuals],
                "diverged": [io.cplx(r) for r in res.diverged]})
    return 0


def _circle(cfg: RunConfig) -> zoo.CircleModel:
    _, M = _operator(cfg)
    if not np.allclose(M, np.diag(np.diag(M))):
        raise UsageError("holefill/probe need a diagonal (mult-circle) operator")
    return zoo.circle_model(np.diag(M), cfg.K, thickening=cfg.thickening)


def cmd_holefill(cfg: RunConfig) -> int:
    cm = _circle(cfg)
    fun = cm.functional
    ev = eig(cm.L + cm.Pmat)
    r = np.sort(np.abs(ev))
    slope = verify.order_slope(fun)
    K = cfg.K
    print(f"K={K} m={fun.m}: max residual {fun.residuals.max():.3g}, order slope {slope:.3f}, "
          f"K-th smallest |lam| {r[K - 1]:.4g}, next {r[K]:.4g}" if K < r.size else "")
    payload = fun.to_dict()
    payload.update({"order_slope": slope, "holes": cm.holes.to_dict(),
                    "eigenvalue_moduli_sorted": [float(v) for v in r]})
    _emit(cfg, payload)
    return 0


def cmd_probe(cfg: RunConfig) -> int:
    cm = _circle(cfg)
    rep = perturb.discontinuity_probe(cm.L, cm.Pmat, cfg.betas, cfg.disk, cfg.grid_step,
                                      thickening=cm.holes.thickening)
    for row in rep.rows:
        print(f"beta={row.beta:<6g} eig_in_disk={row.eig_in_disk:<4d} "
              f"min_smin={row.min_smin:.4g} hausdorff={row.hausdorff:.4g}")
    _emit(cfg, rep.to_dict())
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    spec, M = _operator(cfg)
    Q = _perturbation(cfg, spec)
    tab = perturb.perturbation_scan(M, Q, cfg.alphas, cfg.threshold, 1e-10 if cfg.tol is None else cfg.tol)
    for row in tab.rows:
        print(f"alpha={row.alpha}  #points={len(row.spectrum)}  count(|lam|>{cfg.threshold:g})="
              f"{row.count_above_threshold}  hausdorff_to_alpha0={row.hausdorff_to_alpha0:.4g}")
    _emit(cfg, tab.to_dict())
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    vc = verify.VerifyConfig(seed=cfg.seed)
    results = verify.run_all(vc, log=print)
    _emit(cfg, verify.report(results, vc))
    failed = [r.name for r in results if not r.passed]
    print("all checks passed" if not failed else f"FAILED: {', '.join(failed)}")
    return 0 if not failed else 1


HANDLERS = {
    "spectrum": cmd_spectrum,
    "pseudospectrum": cmd_pseudospectrum,
    "holes": cmd_holes,
    "rank": cmd_rank,
    "laurent": cmd_laurent,
    "levelset": cmd_levelset,
    "holefill": cmd_holefill,
    "probe": cmd_probe,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    except (UsageError, InputError) as exc:
        parser.print_usage(sys.stderr)
        print(f"specdisc: error: {exc}", file=sys.stderr)
        return 2
    try:
        return HANDLERS[cfg.command](cfg)
    except (UsageError, InputError) as exc:
        parser.print_usage(sys.stderr)
        print(f"specdisc: error: {exc}", file=sys.stderr)
        return 2
    except SpecDiscError as exc:
        print(f"specdisc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
