"""Calibrate the constant C in r(V_n) <= C / n for the trapezoid Volterra matrix.

Prints n, r(V_n), n r(V_n) and the exact value T n / (2 (n - 1)) from the
diagonal, then the largest product rounded up to two decimals.

    python3 scripts/calibrate_volterra_radius.py --sizes 128,256,512
"""
import argparse
import math
from dataclasses import dataclass

from specdisc import oracles, spectra, zoo


@dataclass
class Config:
    sizes: tuple[int, ...] = (128, 256, 512)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256,512")
    cfg = Config(tuple(int(s) for s in ap.parse_args().sizes.split(",")))

    worst = 0.0
    print(f"{'n':>6} {'r(V_n)':>12} {'n r(V_n)':>10} {'exact':>10}")
    for n in cfg.sizes:
        r = spectra.spectral_radius(spectra.spectrum(zoo.volterra(n)))
        worst = max(worst, n * r)
        print(f"{n:>6} {r:>12.6g} {n * r:>10.5f} {n * oracles.volterra_radius(n):>10.5f}")
    print(f"C = {math.ceil(worst * 100) / 100:.2f}")


if __name__ == "__main__":
    main()
