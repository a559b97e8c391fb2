"""Rank-one perturbation engine.

For a rank-one ``P = u phi^T`` and ``lam`` outside ``sigma(x)``,

    lam in sigma(x + P/beta)  <=>  f(lam) = beta,   f(lam) = phi^T (lam - x)^{-1} u,

which turns spectral questions about ``x + alpha P`` into level sets of one
scalar holomorphic function.  This module evaluates ``f``, its Laurent
coefficients at infinity, its level sets, builds moment functionals that make
``f - 1`` vanish to high order at a hole point, and probes the resulting
spectral discontinuity at finite size.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from . import io
from ._parallel import pmap
from .errors import InputError, PreconditionError, SingularMatrixError
from .numkernel import LU, as_matrix, eig, norm2
from .socle import RankOneOperator
from .spectra import (
    SpectrumSet,
    _check_window,
    cluster,
    detect_holes,
    dist_to_set,
    grid_step,
    hausdorff,
    spectrum,
    suggest_thickening,
)

NEWTON_MAXITER = 50


# ---------------------------------------------------------------------------
# Resolvent criterion and scalar resolvent
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriterionResult:
    lhs: bool
    rhs: bool
    dist_lhs: float
    dist_rhs: float

    @property
    def agree(self) -> bool:
        return self.lhs == self.rhs


def criterion(x, y, lam: complex, tol: float = 1e-7) -> CriterionResult:
    """Evaluate both sides of ``lam in sigma(x+y) <=> 1 in sigma((lam-x)^{-1} y)``.

    ``lam`` must be at distance ``> 10 tol`` from ``sigma(x)``.
    """
    X = as_matrix(x, "x")
    Y = as_matrix(y, "y")
    if X.shape != Y.shape:
        raise InputError("x and y differ in dimension")
    lam = complex(lam)
    d0 = dist_to_set(lam, eig(X))
    if d0 <= 10 * tol:
        raise PreconditionError(f"lam is within {d0:.3e} of sigma(x)")
    n = X.shape[0]
    R = LU(lam * np.eye(n) - X)
    d_lhs = dist_to_set(lam, eig(X + Y))
    d_rhs = dist_to_set(1.0, eig(R.solve(Y)))
    return CriterionResult(d_lhs <= tol, d_rhs <= tol, d_lhs, d_rhs)


def _resolvent_lu(X: np.ndarray, lam: complex) -> LU:
    try:
        return LU(lam * np.eye(X.shape[0]) - X)
    except SingularMatrixError as exc:
        raise PreconditionError(f"lam = {lam} is numerically in sigma(x)") from exc


def resolvent_scalar(x, P: RankOneOperator, lam: complex, tol: float | None = 1e-8) -> complex:
    """``f(lam) = phi^T (lam - x)^{-1} u``.

    With ``tol`` set, ``lam`` is first checked to lie farther than ``10 tol``
    from ``sigma(x)`` (one eigensolve).  Pass ``tol=None`` to skip that check
    in inner loops; the scaled-pivot test of the solve still applies.
    """
    X = as_matrix(x, "x")
    lam = complex(lam)
    if tol is not None:
        d0 = dist_to_set(lam, eig(X))
        if d0 <= 10 * tol:
            raise PreconditionError(f"lam is within {d0:.3e} of sigma(x)")
    return complex(P.phi @ _resolvent_lu(X, lam).solve(P.u))


def _f_and_df(X: np.ndarray, P: RankOneOperator, lam: complex) -> tuple[complex, complex]:
    lu = _resolvent_lu(X, lam)
    v = lu.solve(P.u)
    w = lu.solve(P.phi, trans=1)
    return complex(P.phi @ v), complex(-(w @ v))


# ---------------------------------------------------------------------------
# Laurent coefficients
# ---------------------------------------------------------------------------


def fingerprint(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())
    return h.hexdigest()[:16]


@dataclass
class LaurentCoefficients:
    """``c_j = phi^T x^j u``: ``f(lam) = sum_j c_j / lam^(j+1)`` for large ``|lam|``."""

    coeffs: np.ndarray
    fingerprint: str
    tol: float
    essential_singularity_witness: bool
    scales: np.ndarray = field(repr=False)

    def partial_sum(self, lam: complex) -> complex:
        lam = complex(lam)
        j = np.arange(self.coeffs.size)
        return complex(np.sum(self.coeffs / lam ** (j + 1)))

    def to_rows(self):
        return [(str(j), c.real, c.imag) for j, c in enumerate(self.coeffs)]

    def to_csv(self, path) -> None:
        io.write_csv_rows(path, ["j", "re", "im"], self.to_rows())

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "tol": self.tol,
            "essential_singularity_witness": self.essential_singularity_witness,
            "coeffs": [io.cplx(c) for c in self.coeffs],
        }


def laurent_coeffs(x, P: RankOneOperator, N: int, tol: float = 1e-12) -> LaurentCoefficients:
    """Coefficients ``c_0..c_N`` by repeated matrix-vector products.

    ``essential_singularity_witness`` is set when every ``|c_j|``,
    ``1 <= j <= N``, exceeds ``tol * ||x||^j * ||u|| * ||phi||`` (spectral norm,
    see :func:`~specdisc.numkernel.norm2`).
    """
    X = as_matrix(x, "x")
    if int(N) != N or N < 0:
        raise InputError("N must be a nonnegative integer")
    N = int(N)
    v = P.u.copy()
    coeffs = np.empty(N + 1, dtype=complex)
    for j in range(N + 1):
        coeffs[j] = P.phi @ v
        if j < N:
            v = X @ v
    nx = norm2(X)
    base = float(np.linalg.norm(P.u) * np.linalg.norm(P.phi))
    scales = base * nx ** np.arange(N + 1)
    witness = bool(N >= 1 and np.all(np.abs(coeffs[1:]) > tol * scales[1:]))
    return LaurentCoefficients(coeffs, fingerprint(X, P.u, P.phi), tol, witness, scales)


# ---------------------------------------------------------------------------
# Level sets
# ---------------------------------------------------------------------------


@dataclass
class LevelSetSearch:
    roots: list[complex]
    diverged: list[complex]
    beta: complex
    residuals: list[float]


def _in_window(z: complex, window) -> bool:
    a, b, c, d = window
    return a <= z.real <= b and c <= z.imag <= d


def _newton(X, P, beta, lam0, accept):
    lam = lam0
    g = None
    for _ in range(NEWTON_MAXITER):
        try:
            f, df = _f_and_df(X, P, lam)
        except PreconditionError:
            return lam, False, float("inf")
        g = f - beta
        if abs(g) <= 1e-3 * accept or df == 0:
            break
        step = g / df
        lam = lam - step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(lam)):
            break
    try:
        f, _ = _f_and_df(X, P, lam)
    except PreconditionError:
        return lam, False, float("inf")
    res = abs(f - beta)
    return lam, bool(res <= accept), float(res)


def find_level_set(x, P: RankOneOperator, beta: complex, window, tol: float = 1e-8) -> LevelSetSearch:
    """All ``lam`` in ``window`` with ``f(lam) = beta``, with diagnostics.

    Candidates are the eigenvalues of ``x + P/beta`` inside the window that are
    farther than ``tol`` from ``sigma(x)``; each is Newton-refined on
    ``f - beta`` (at most 50 steps).  Accepted roots satisfy
    ``|f(lam) - beta| <= 1e-8 (1 + |beta|)``; the rest are returned in
    ``diverged``.  Accepted roots are deduplicated with cluster tolerance ``tol``.
    """
    X = as_matrix(x, "x")
    beta = complex(beta)
    if beta == 0:
        raise InputError("beta must be nonzero")
    window = _check_window(window)
    sx = eig(X)
    cands = [complex(z) for z in eig(X + P.matrix / beta)]
    cands = [z for z in cands if _in_window(z, window) and dist_to_set(z, sx) > tol]
    accept = 1e-8 * (1.0 + abs(beta))
    good, bad, res = [], [], []
    for z in cands:
        lam, ok, r = _newton(X, P, beta, z, accept)
        if ok and _in_window(lam, window):
            good.append(lam)
            res.append(r)
        else:
            bad.append(z)
    if good:
        roots = [complex(v) for v in cluster(np.array(good), tol).points]
        res = [abs(resolvent_scalar(X, P, r, tol=None) - beta) for r in roots]
    else:
        roots, res = [], []
    return LevelSetSearch(roots, bad, beta, res)


def level_set_roots(x, P: RankOneOperator, beta: complex, window, tol: float = 1e-8) -> list[complex]:
    return find_level_set(x, P, beta, window, tol).roots


# ---------------------------------------------------------------------------
# Hole-filling moment functional
# ---------------------------------------------------------------------------


@dataclass
class MomentFunctional:
    """Weights ``w`` with ``sum w_i / a_i = -1`` and ``sum w_i / a_i^k = 0`` for ``2 <= k <= K``.

    ``w`` is the minimum-norm solution of these ``K`` conditions, computed in
    extended precision and rounded to complex128.  ``residuals[k-1]`` is the
    defect of condition ``k`` for the rounded weights.
    """

    a: np.ndarray
    w: np.ndarray
    K: int
    residuals: np.ndarray
    dps: int
    _w_mp: tuple = field(repr=False, default=())

    @property
    def m(self) -> int:
        return self.a.size

    @property
    def perturbation(self) -> RankOneOperator:
        return RankOneOperator(np.ones(self.m, dtype=complex), self.w)

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(np.ones(self.m, dtype=complex), self.w)

    def moment(self, k: int) -> complex:
        """``phi(a^{-k}) = sum w_i a_i^{-k}`` in double precision."""
        return complex(np.sum(self.w * self.a ** (-float(k))))

    def f(self, lam: complex) -> complex:
        return complex(np.sum(self.w / (complex(lam) - self.a)))

    def f_minus_one(self, lam: complex) -> complex:
        """``f(lam) - 1`` evaluated with the extended-precision weights.

        Near the hole point ``f - 1`` is far below double-precision roundoff,
        so this uses the unrounded solution and ``dps`` digits.
        """
        with mpmath.workdps(self.dps):
            lm = mpmath.mpc(complex(lam))
            s = mpmath.fsum(w / (lm - mpmath.mpc(complex(ai))) for w, ai in zip(self._w_mp, self.a))
            return complex(s - 1)

    def leading_coefficient(self) -> complex:
        """``c_K`` in ``f(lam) - 1 = c_K lam^K + ...``, i.e. ``-phi(a^{-(K+1)})``."""
        with mpmath.workdps(self.dps):
            s = mpmath.fsum(w * mpmath.mpc(complex(ai)) ** (-(self.K + 1)) for w, ai in zip(self._w_mp, self.a))
            return complex(-s)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "K": self.K,
            "residuals": [float(r) for r in self.residuals],
            "leading_coefficient": io.cplx(self.leading_coefficient()),
            "w": [io.cplx(v) for v in self.w],
        }


def hole_filling_functional(a_samples: Sequence[complex], K: int, dps: int = 50):
    """Moment functional filling the hole at 0 of ``diag(a)``.

    Returns ``(functional, Pmat)`` with ``Pmat = 1 w^T``.  ``diag(a) + Pmat``
    then has ``0`` as an eigenvalue of algebraic multiplicity at least ``K``.
    """
    a = np.atleast_1d(np.asarray(a_samples, dtype=complex))
    if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)):
        raise InputError("a_samples must be a nonempty finite list")
    m = a.size
    if int(K) != K or K < 1:
        raise InputError("K must be a positive integer")
    K = int(K)
    if K > m:
        raise InputError(f"K = {K} exceeds the number of samples m = {m}")
    amax = float(np.abs(a).max())
    if amax == 0 or float(np.abs(a).min()) <= 1e-8 * amax:
        raise InputError("samples must be bounded away from 0 (0 must lie in a hole)")

    with mpmath.workdps(dps):
        am = [mpmath.mpc(complex(v)) for v in a]
        inv = [1 / v for v in am]
        A = mpmath.matrix(K, m)
        for i in range(m):
            p = inv[i]
            for k in range(K):
                A[k, i] = p
                p = p * inv[i]
        b = mpmath.matrix(K, 1)
        b[0] = -1
        AH = A.H
        y = mpmath.lu_solve(A * AH, b)
        wm = AH * y
        w_mp = tuple(wm[i] for i in range(m))
    w = np.array([complex(v) for v in w_mp])

    target = np.zeros(K, dtype=complex)
    target[0] = -1.0
    V = np.array([a ** (-float(k)) for k in range(1, K + 1)])
    residuals = np.abs(V @ w - target)
    fun = MomentFunctional(a, w, K, residuals, dps, w_mp)
    return fun, fun.matrix


# ---------------------------------------------------------------------------
# Discontinuity probe
# ---------------------------------------------------------------------------


@dataclass
class ProbeRow:
    beta: float
    eig_in_disk: int
    min_smin: float
    hausdorff: float

    def to_dict(self) -> dict:
        return {
            "beta": float(self.beta),
            "eig_in_disk": int(self.eig_in_disk),
            "min_smin": float(self.min_smin),
            "hausdorff": float(self.hausdorff),
        }


@dataclass
class DiscontinuityReport:
    center: complex
    radius: float
    rows: list[ProbeRow]

    def row(self, beta: float) -> ProbeRow:
        for r in self.rows:
            if abs(r.beta - beta) <= 1e-12:
                return r
        raise KeyError(beta)

    def to_dict(self) -> dict:
        c = complex(self.center)
        return {
            "disk": {"re": c.real, "im": c.imag, "radius": float(self.radius)},
            "rows": [r.to_dict() for r in self.rows],
        }


def disk_grid(center: complex, radius: float, step: float) -> np.ndarray:
    """Lattice points ``center + step*(i + 1j*k)`` lying in the closed disk."""
    if step <= 0 or radius <= 0:
        raise InputError("step and radius must be positive")
    k = int(np.floor(radius / step))
    r = np.arange(-k, k + 1) * step
    Z = (r[None, :] + 1j * r[:, None]).ravel()
    Z = Z[np.abs(Z) <= radius * (1 + 1e-12)]
    return complex(center) + Z


def _min_smin(Z: np.ndarray, pts: np.ndarray) -> float:
    n = Z.shape[0]
    eye = np.eye(n, dtype=complex)
    chunks = np.array_split(pts, max(1, min(len(pts), 64)))

    def work(chunk):
        best = np.inf
        for lam in chunk:
            s = np.linalg.svd(lam * eye - Z, compute_uv=False)[-1]
            best = min(best, s)
        return best

    return float(min(pmap(work, chunks)))


def validate_disk_in_hole(S, center: complex, radius: float, window=None, resolution: int = 400,
                          thickening: float | None = None):
    """Raise :class:`PreconditionError` unless the disk lies in one raster hole of ``S``."""
    pts = S.points if isinstance(S, SpectrumSet) else np.asarray(S, dtype=complex)
    if window is None:
        window = auto_window(pts, center, radius)
    if thickening is None:
        thickening = suggest_thickening(pts, window, resolution)
        window = auto_window(pts, center, radius, margin=2.5 * thickening)
    report = detect_holes(pts, window, resolution, thickening)
    hole = report.hole_at(complex(center))
    if hole is None:
        raise PreconditionError("disk center is not inside a hole of sigma(x)")
    nodes = disk_grid(center, radius, min(grid_step(report.window, report.resolution)))
    for z in nodes:
        h = report.hole_at(complex(z))
        if h is None or h.label != hole.label:
            raise PreconditionError("disk is not contained in a single hole of sigma(x)")
    return report


def auto_window(pts, center: complex = 0j, radius: float = 0.0, margin: float | None = None):
    pts = np.atleast_1d(np.asarray(pts, dtype=complex))
    allp = np.concatenate([pts, [complex(center) + radius, complex(center) - radius,
                                  complex(center) + 1j * radius, complex(center) - 1j * radius]])
    lo_r, hi_r = allp.real.min(), allp.real.max()
    lo_i, hi_i = allp.imag.min(), allp.imag.max()
    ext = max(hi_r - lo_r, hi_i - lo_i, 1e-3)
    if margin is None:
        margin = 0.25 * ext
    margin = max(margin, 0.25 * ext)
    # square window keeps grid steps isotropic
    cr, ci = 0.5 * (lo_r + hi_r), 0.5 * (lo_i + hi_i)
    half = 0.5 * ext + margin
    return (cr - half, cr + half, ci - half, ci + half)


def discontinuity_probe(
    x,
    a,
    betas: Sequence[float],
    disk: tuple[complex, float],
    grid_step: float,
    cluster_tol: float = 1e-10,
    resolution: int = 400,
    thickening: float | None = None,
) -> DiscontinuityReport:
    """Finite-size shadow of spectral discontinuity at ``x + a``.

    For each ``beta`` (sorted ascending; ``1`` must be present) reports the
    number of eigenvalues of ``x + beta a`` in the open disk, the minimum of
    ``smin(lam - (x + beta a))`` over a lattice of step ``grid_step`` covering
    the disk, and the Hausdorff distance from ``sigma(x + beta a)`` to
    ``sigma(x + a)``.  The disk must sit inside a hole of ``sigma(x)``.
    No thresholds are applied here.
    """
    X = as_matrix(x, "x")
    A = as_matrix(a, "a")
    if X.shape != A.shape:
        raise InputError("x and a differ in dimension")
    center, radius = complex(disk[0]), float(disk[1])
    bs = sorted(float(b) for b in betas)
    if not any(abs(b - 1.0) <= 1e-15 for b in bs):
        raise InputError("betas must contain 1")
    if any(b < 0 or b > 1 for b in bs):
        raise InputError("betas must lie in [0, 1]")
    validate_disk_in_hole(eig(X), center, radius, resolution=resolution, thickening=thickening)

    pts = disk_grid(center, radius, grid_step)
    ref = eig(X + A)
    rows = []
    for b in bs:
        Z = X + b * A
        ev = ref if b == 1.0 else eig(Z)
        inside = int(np.sum(np.abs(ev - center) < radius))
        ms = _min_smin(Z, pts)
        hd = hausdorff(cluster(ev, cluster_tol), cluster(ref, cluster_tol))
        rows.append(ProbeRow(b, inside, ms, hd))
    return DiscontinuityReport(center, radius, rows)


# ---------------------------------------------------------------------------
# Perturbation scan
# ---------------------------------------------------------------------------


@dataclass
class ScanRow:
    alpha: complex
    spectrum: SpectrumSet
    count_above_threshold: int
    hausdorff_to_alpha0: float

    def to_dict(self) -> dict:
        return {
            "alpha": io.cplx(self.alpha),
            "count_above_threshold": int(self.count_above_threshold),
            "hausdorff_to_alpha0": float(self.hausdorff_to_alpha0),
            "spectrum": self.spectrum.to_dict(),
        }


@dataclass
class ScanTable:
    threshold: float
    base: SpectrumSet
    rows: list[ScanRow]

    def to_dict(self, include_spectra: bool = True) -> dict:
        rows = [r.to_dict() for r in self.rows]
        if not include_spectra:
            for r in rows:
                del r["spectrum"]
        return {"threshold": float(self.threshold), "rows": rows}


def perturbation_scan(x, Q: RankOneOperator, alphas: Sequence[complex], threshold: float,
                      cluster_tol: float = 1e-10) -> ScanTable:
    """Spectra of ``x + alpha Q`` for each ``alpha``, in input order.

    ``count_above_threshold`` counts distinct spectral points with
    ``|lam| > threshold``; Hausdorff distances are to ``sigma(x)``.
    """
    X = as_matrix(x, "x")
    if threshold <= 0:
        raise InputError("threshold must be positive")
    Qm = Q.matrix
    base = spectrum(X, cluster_tol)

    def one(alpha):
        alpha = complex(alpha)
        S = base if alpha == 0 else spectrum(X + alpha * Qm, cluster_tol)
        cnt = int(np.sum(np.abs(S.points) > threshold))
        return ScanRow(alpha, S, cnt, hausdorff(S, base))

    return ScanTable(float(threshold), base, pmap(one, list(alphas)))
