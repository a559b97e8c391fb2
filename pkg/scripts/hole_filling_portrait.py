"""Pseudospectral portraits of diag(a) + beta 1 w^T over a sweep of beta.

For the circle model with symbol f, writes one PGM (and CSV) per beta showing
log10 of the resolvent norm, plus a summary of eigenvalues in the hole.

    python3 scripts/hole_filling_portrait.py --f "z+0.3/z" --betas 0,0.9,0.999,1 --outdir portraits
"""
import argparse
import os
from dataclasses import dataclass, field

import numpy as np

from specdisc import numkernel, spectra, zoo


@dataclass
class Config:
    f: str = "z+0.3/z"
    m: int = 64
    K: int = 8
    betas: list[float] = field(default_factory=lambda: [0.0, 0.9, 0.999, 1.0])
    res: int = 200
    half_width: float = 1.6
    outdir: str = "portraits"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--f", default="z+0.3/z")
    ap.add_argument("--m", type=int, default=64)
    ap.add_argument("--K", type=int, default=8)
    ap.add_argument("--betas", default="0,0.9,0.999,1")
    ap.add_argument("--res", type=int, default=200)
    ap.add_argument("--half-width", type=float, default=1.6)
    ap.add_argument("--outdir", default="portraits")
    ns = ap.parse_args()
    cfg = Config(ns.f, ns.m, ns.K, [float(b) for b in ns.betas.split(",")], ns.res, ns.half_width, ns.outdir)

    os.makedirs(cfg.outdir, exist_ok=True)
    a = zoo.parse_symbol(cfg.f)(zoo.roots_of_unity(cfg.m))
    cm = zoo.circle_model(a, cfg.K)
    h = cfg.half_width
    window = (-h, h, -h, h)
    for beta in cfg.betas:
        M = cm.L + beta * cm.Pmat
        G = spectra.pseudospectrum(M, window, cfg.res)
        # fixed color scale so the frames are comparable
        stem = os.path.join(cfg.outdir, f"beta_{beta:g}")
        G.to_pgm(stem + ".pgm", vmin=-0.5, vmax=8.0)
        G.to_csv(stem + ".csv")
        small = np.sort(np.abs(numkernel.eig(M)))[: cfg.K]
        print(f"beta={beta:<7g} max |lam| of {cfg.K} smallest = {small.max():.4g}  -> {stem}.pgm")


if __name__ == "__main__":
    main()
