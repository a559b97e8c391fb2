"""Dense complex linear-algebra kernel.

Thin, validated wrappers over LAPACK (via numpy/scipy).  Every other module
goes through these functions so that input validation and the singularity
policy live in one place.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import InputError, NumericalError, SingularMatrixError

EPS = np.finfo(float).eps

#: Backward-error multiplier for :func:`eig`.  Every returned eigenvalue
#: satisfies ``smin(lam*I - M) <= EIG_KAPPA * n * EPS * ||M||_2``.
EIG_KAPPA = 10.0


def as_matrix(M, name: str = "M") -> np.ndarray:
    """Return ``M`` as a finite, square complex128 array (copy-free when possible)."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"{name} must be a square matrix, got shape {A.shape}")
    if A.shape[0] < 1:
        raise InputError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} has non-finite entries")
    return A


def as_vector(v, n: int | None = None, name: str = "v") -> np.ndarray:
    x = np.asarray(v, dtype=complex)
    if x.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise InputError(f"{name} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} has non-finite entries")
    return x


def eig(M) -> np.ndarray:
    """Eigenvalues of ``M`` with algebraic multiplicity (length ``n`` array).

    Delegates to LAPACK ``geev`` (balanced Hessenberg QR), which is backward
    stable; see :data:`EIG_KAPPA` for the documented bound.
    """
    A = as_matrix(M)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc


def eig_backward_bound(M) -> float:
    A = as_matrix(M)
    return EIG_KAPPA * A.shape[0] * EPS * max(np.linalg.norm(A, 2), np.finfo(float).tiny)


def singular_threshold(A: np.ndarray) -> float:
    """Pivot threshold ``n * eps * ||A||_inf`` below which a solve is refused."""
    return A.shape[0] * EPS * np.linalg.norm(A, np.inf)


class LU:
    """LU factorization with the scaled-pivot singularity check applied once.

    Reused by callers that solve many right-hand sides (or transposed systems)
    against the same matrix, e.g. Newton iterations on the resolvent.
    """

    def __init__(self, M):
        A = as_matrix(M)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu, self.piv = sla.lu_factor(A, check_finite=False)
        pivots = np.abs(np.diag(self.lu))
        thresh = singular_threshold(A)
        if pivots.min() <= thresh:
            raise SingularMatrixError(
                f"numerically singular: min pivot {pivots.min():.3e} <= {thresh:.3e}"
            )
        self.n = A.shape[0]

    def solve(self, b, trans: int = 0) -> np.ndarray:
        rhs = as_vector(b, self.n, "b") if np.ndim(b) == 1 else np.asarray(b, dtype=complex)
        return sla.lu_solve((self.lu, self.piv), rhs, trans=trans, check_finite=False)


def solve(M, b) -> np.ndarray:
    """Solve ``M x = b``; raises :class:`SingularMatrixError` on tiny pivots."""
    return LU(M).solve(b)


def smin(M) -> float:
    """Smallest singular value of ``M``."""
    A = as_matrix(M)
    try:
        s = sla.svdvals(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return float(s[-1])


def monomials(M, N: int) -> list[np.ndarray]:
    """``[M**0, M**1, ..., M**N]`` by repeated multiplication."""
    A = as_matrix(M)
    if int(N) != N or N < 0:
        raise InputError(f"N must be a nonnegative integer, got {N!r}")
    out = [np.eye(A.shape[0], dtype=complex)]
    for _ in range(int(N)):
        out.append(out[-1] @ A)
    return out


def norm2(M, exact_below: int = 256) -> float:
    """Spectral norm; exact (SVD) for small ``n``, else Lanczos on ``M^H M``.

    The Lanczos run (ARPACK) starts from a fixed vector, so the result is
    deterministic.
    """
    A = as_matrix(M)
    n = A.shape[0]
    if n <= exact_below:
        return float(np.linalg.norm(A, 2))
    AH = A.conj().T
    op = spla.LinearOperator((n, n), matvec=lambda v: AH @ (A @ v), dtype=complex)
    v0 = np.cos(np.arange(n) + 0.5) + 1j * np.sin(0.37 * np.arange(n))
    try:
        val = spla.eigsh(op, k=1, which="LM", v0=v0, return_eigenvectors=False)
    except spla.ArpackError as exc:
        raise NumericalError(f"norm estimate did not converge: {exc}") from exc
    return float(np.sqrt(max(val[0].real, 0.0)))
