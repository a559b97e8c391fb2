"""Independent reference computations used to certify the main code paths.

Nothing here calls the routines it is meant to check: the Volterra moments
come from an exact antiderivative recurrence, hole counts from a hand-written
breadth-first flood fill, ranks from singular values, secular roots from
explicit characteristic polynomials.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np


def volterra_sine_iterates(N: int):
    """``V^n sin = P_n(t) + s_n sin t + k_n cos t`` for ``n = 0..N``.

    Returns a list of ``(poly, s, k)`` with ``poly`` the rational coefficients
    of ``P_n`` in ascending powers.  Uses ``int_0^t sin = 1 - cos t`` and
    ``int_0^t cos = sin t``.
    """
    poly: list[Fraction] = []
    s, k = Fraction(1), Fraction(0)
    out = [(list(poly), s, k)]
    for _ in range(N):
        new = [Fraction(0)] + [c / (i + 1) for i, c in enumerate(poly)]
        new[0] += s
        poly, s, k = new, k, -s
        out.append((list(poly), s, k))
    return out


def volterra_sine_moments(N: int, T=None, dps: int = 30) -> list:
    """``c_j = int_0^T (V^j sin)(t) dt`` for ``j = 0..N`` as mpmath numbers."""
    with mpmath.workdps(dps):
        T = 2 * mpmath.pi if T is None else mpmath.mpf(T)
        res = []
        for poly, s, k in volterra_sine_iterates(N):
            val = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * T ** (i + 1) / (i + 1)
                              for i, c in enumerate(poly))
            val += mpmath.mpf(s.numerator) / s.denominator * (1 - mpmath.cos(T))
            val += mpmath.mpf(k.numerator) / k.denominator * mpmath.sin(T)
            res.append(+val)
        return res


def bfs_components(free: np.ndarray, connectivity: int = 4):
    """Connected components of ``True`` cells by explicit BFS.

    Returns a list of ``(size, touches_boundary)`` in scan order.
    """
    free = np.asarray(free, dtype=bool)
    ny, nx = free.shape
    seen = np.zeros_like(free)
    if connectivity == 4:
        nbrs = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    else:
        nbrs = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
    comps = []
    for j0 in range(ny):
        for i0 in range(nx):
            if not free[j0, i0] or seen[j0, i0]:
                continue
            q = deque([(j0, i0)])
            seen[j0, i0] = True
            size, border = 0, False
            while q:
                j, i = q.popleft()
                size += 1
                if j in (0, ny - 1) or i in (0, nx - 1):
                    border = True
                for dj, di in nbrs:
                    jj, ii = j + dj, i + di
                    if 0 <= jj < ny and 0 <= ii < nx and free[jj, ii] and not seen[jj, ii]:
                        seen[jj, ii] = True
                        q.append((jj, ii))
            comps.append((size, border))
    return comps


def disk_mask(points, window, resolution, radius) -> np.ndarray:
    """Brute-force thickening: every node tested against every point."""
    a, b, c, d = window
    nx, ny = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
    Z = np.linspace(a, b, nx)[None, :] + 1j * np.linspace(c, d, ny)[:, None]
    mask = np.zeros(Z.shape, dtype=bool)
    for p in np.atleast_1d(np.asarray(points, dtype=complex)):
        mask |= np.abs(Z - p) <= radius
    return mask


def hole_count(points, window, resolution, radius) -> int:
    comps = bfs_components(~disk_mask(points, window, resolution, radius))
    return sum(1 for _, border in comps if not border)


def algebraic_rank(a, rtol: float = 1e-10) -> int:
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def hausdorff_bruteforce(A, B) -> float:
    A = [complex(z) for z in np.atleast_1d(A)]
    B = [complex(z) for z in np.atleast_1d(B)]
    d1 = max(min(abs(a - b) for b in B) for a in A)
    d2 = max(min(abs(a - b) for a in A) for b in B)
    return max(d1, d2)


def partial_fraction_f(d: Sequence[Fraction], w: Sequence[Fraction], u: Sequence[Fraction], lam: Fraction) -> Fraction:
    """``sum_i w_i u_i / (lam - d_i)`` in exact rational arithmetic."""
    return sum((Fraction(wi) * Fraction(ui) / (Fraction(lam) - Fraction(di)) for di, wi, ui in zip(d, w, u)),
               Fraction(0))


def secular_polynomial(d, w, u, beta=1.0, dps: int = 50):
    """Coefficients (highest first, mpmath) of ``det(lam - diag(d) - u w^T / beta)``.

    ``prod(lam - d_i) - (1/beta) sum_i w_i u_i prod_{j != i} (lam - d_j)``.
    """
    with mpmath.workdps(dps):
        d = [mpmath.mpc(complex(v)) for v in d]
        wu = [mpmath.mpc(complex(a)) * mpmath.mpc(complex(b)) for a, b in zip(w, u)]
        beta = mpmath.mpc(complex(beta))

        def mul(p, root):
            # p * (lam - root), highest-first coefficients
            return [p[0]] + [p[i] - root * p[i - 1] for i in range(1, len(p))] + [-root * p[-1]]

        full = [mpmath.mpc(1)]
        for r in d:
            full = mul(full, r)
        acc = [mpmath.mpc(0)] * len(d)
        for i in range(len(d)):
            p = [mpmath.mpc(1)]
            for j, r in enumerate(d):
                if j != i:
                    p = mul(p, r)
            acc = [x + wu[i] * y for x, y in zip(acc, p)]
        return [full[0]] + [full[k] - acc[k - 1] / beta for k in range(1, len(full))]


def secular_roots(d, w, u, beta=1.0, dps: int = 50) -> np.ndarray:
    """Roots of :func:`secular_polynomial` via mpmath, returned as complex128."""
    with mpmath.workdps(dps):
        coeffs = secular_polynomial(d, w, u, beta, dps)
        # strip exact leading zeros is unnecessary: leading coefficient is 1
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * dps)
    return np.array([complex(r) for r in roots])


def quasi_root_radius(c_K: complex, K: int, beta: float) -> float:
    """Modulus of the small solutions of ``1 - beta f(lam) = 0`` when ``f - 1 ~ c_K lam^K``.

    From ``1 - beta (1 + c_K lam^K) = 0``: ``|lam| = |(1 - beta) / (beta c_K)|^(1/K)``.
    """
    return float(abs((1 - beta) / (beta * c_K)) ** (1.0 / K))


def volterra_radius(n: int, T: float = 2 * np.pi) -> float:
    """Exact spectral radius of the trapezoid Volterra matrix: its diagonal is ``(0, h/2, ...)``."""
    return T / (2 * (n - 1))
