"""Finite-rank machinery: spectral rank, rank-one characteristic functionals,
commuting diagonalization witnesses and the commuting-perturbation bound."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .errors import AnalysisError, InputError, PreconditionError, ValidationError
from .numkernel import as_matrix, as_vector, eig
from .spectra import SpectrumSet, cluster, dist_to_set, spectrum


@dataclass(frozen=True)
class RankOneOperator:
    """The operator ``a = u phi^T``: ``a z = (phi . z) u`` (no conjugation)."""

    u: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        u = as_vector(self.u, name="u")
        phi = as_vector(self.phi, u.shape[0], name="phi")
        if not np.any(u) or not np.any(phi):
            raise InputError("rank-one operator needs nonzero u and phi")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(self.u, self.phi)

    def tau(self, x) -> complex:
        """Characteristic functional ``tau_a(x) = phi^T x u``."""
        X = as_matrix(x, "x")
        if X.shape[0] != self.n:
            raise InputError("dimension mismatch")
        return complex(self.phi @ (X @ self.u))

    def scaled(self, c: complex) -> "RankOneOperator":
        return RankOneOperator(c * self.u, self.phi)

    def left_mul(self, x) -> "RankOneOperator":
        """``x a`` as a rank-one operator (``x u`` times ``phi``)."""
        return RankOneOperator(as_matrix(x, "x") @ self.u, self.phi)

    def right_mul(self, x) -> "RankOneOperator":
        """``a x`` as a rank-one operator (``u`` times ``x^T phi``)."""
        return RankOneOperator(self.u, as_matrix(x, "x").T @ self.phi)


def char_functional(a: RankOneOperator, x) -> complex:
    return a.tau(x)


def rank_one_spectrum(a: RankOneOperator, cluster_tol: float = 0.0) -> SpectrumSet:
    """``{tau_a(I), 0}`` with multiplicities (``n - 1`` for zero when ``tau != 0``)."""
    t = a.tau(np.eye(a.n))
    vals = np.zeros(a.n, dtype=complex)
    vals[0] = t
    return cluster(vals, cluster_tol)


def _count_distinct_nonzero(values: np.ndarray, scale: float, tol: float) -> int:
    if scale == 0.0:
        return 0
    nz = values[np.abs(values) > tol * scale]
    if nz.size == 0:
        return 0
    return len(cluster(nz, tol * scale))


def count_distinct_nonzero(M, tol: float = 1e-8) -> int:
    """``#sigma'(M)`` with thresholds relative to ``||M||_2``."""
    A = as_matrix(M)
    return _count_distinct_nonzero(eig(A), float(np.linalg.norm(A, 2)), tol)


def _probe(a: np.ndarray, tol: float, seed, index: int) -> int:
    rng = np.random.default_rng([int(seed), int(index)])
    n = a.shape[0]
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    xa = x @ a
    return _count_distinct_nonzero(np.linalg.eigvals(xa), float(np.linalg.norm(xa, 2)), tol)


def spectral_rank(a, probes: int = 200, tol: float = 1e-8, rng_seed: int = 0) -> int:
    """Randomized ``sup_x #sigma'(x a)`` over Gaussian probes.

    Probe ``k`` uses the generator seeded by ``(rng_seed, k)``, so the result is
    independent of evaluation order and worker count.  Evaluation stops early
    once the count reaches the dimension (it cannot go higher).
    """
    A = as_matrix(a, "a")
    if probes < 1:
        raise InputError("probes must be >= 1")
    n = A.shape[0]
    if not np.any(A):
        return 0
    best = 0
    batch = 16
    for start in range(0, probes, batch):
        idx = range(start, min(probes, start + batch))
        counts = pmap(lambda k: _probe(A, tol, rng_seed, k), idx)
        best = max(best, max(counts))
        if best >= n:
            break
    return best


@dataclass
class IdempotentFamily:
    """Pairs ``(lambda_j, p_j)`` meant to be mutually orthogonal rank-one idempotents."""

    lambdas: list[complex]
    projections: list[np.ndarray]

    def __post_init__(self):
        if len(self.lambdas) != len(self.projections):
            raise InputError("lambdas and projections differ in length")
        if not self.projections:
            raise InputError("empty idempotent family")
        self.lambdas = [complex(l) for l in self.lambdas]
        self.projections = [as_matrix(p, "p") for p in self.projections]
        n = self.projections[0].shape[0]
        if any(p.shape[0] != n for p in self.projections):
            raise InputError("projections differ in dimension")
        if any(l == 0 for l in self.lambdas):
            raise InputError("lambdas must be nonzero")

    def __len__(self) -> int:
        return len(self.lambdas)

    def validate(self, tol: float = 1e-9) -> None:
        for j, p in enumerate(self.projections):
            scale = max(1.0, np.linalg.norm(p, 2)) ** 2
            if np.linalg.norm(p @ p - p, 2) > tol * scale:
                raise ValidationError(f"p_{j} is not idempotent")
            # for an idempotent, rank = trace
            if abs(np.trace(p) - 1.0) > 1e-6:
                raise ValidationError(f"p_{j} does not have rank one (trace {np.trace(p):.6g})")
        for i, p in enumerate(self.projections):
            for j, q in enumerate(self.projections):
                if i != j:
                    scale = max(1.0, np.linalg.norm(p, 2) * np.linalg.norm(q, 2))
                    if np.linalg.norm(p @ q, 2) > tol * scale:
                        raise ValidationError(f"p_{i} p_{j} != 0")

    def combination(self, coeffs) -> np.ndarray:
        return sum(c * p for c, p in zip(coeffs, self.projections))


def construct_commuting_witness(fam: IdempotentFamily, alphas, tol: float = 1e-9):
    """Return ``(a, y)`` with ``a = sum lambda_j p_j`` and ``y = sum (alpha_j / lambda_j) p_j``.

    ``y`` commutes with ``a`` and ``ya = sum alpha_j p_j`` has exactly ``len(fam)``
    distinct nonzero eigenvalues.
    """
    alphas = [complex(v) for v in alphas]
    if len(alphas) != len(fam):
        raise InputError("need one alpha per idempotent")
    if any(v == 0 for v in alphas):
        raise InputError("alphas must be nonzero")
    if len(set(alphas)) != len(alphas):
        raise InputError("alphas must be pairwise distinct")
    fam.validate(tol)
    a = fam.combination(fam.lambdas)
    y = fam.combination([al / lam for al, lam in zip(alphas, fam.lambdas)])
    return a, y


def random_idempotent_family(n: int, dim: int, rng, lambdas=None) -> IdempotentFamily:
    """``p_j = S e_j e_j^T S^{-1}`` for a random well-conditioned ``S``."""
    if not 1 <= n <= dim:
        raise InputError("need 1 <= n <= dim")
    S = np.eye(dim) + 0.5 * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(dim)
    Sinv = np.linalg.inv(S)
    ps = [np.outer(S[:, j], Sinv[j, :]) for j in range(n)]
    if lambdas is None:
        lambdas = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return IdempotentFamily(list(lambdas), ps)


@dataclass(frozen=True)
class DiffCounts:
    new_count: int
    lost_count: int
    rank_a: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.new_count, self.lost_count, self.rank_a)


def commuting_diff_check(x, a, tol: float = 1e-6, probes: int = 200, rng_seed: int = 0) -> DiffCounts:
    """Count points of ``sigma(x + a)`` far from ``sigma(x)`` and vice versa.

    Requires ``||xa - ax|| <= tol ||x|| ||a||``.  Raises :class:`AnalysisError`
    if either count exceeds the spectral rank of ``a``.
    """
    X = as_matrix(x, "x")
    A = as_matrix(a, "a")
    if X.shape != A.shape:
        raise InputError("x and a differ in dimension")
    comm = np.linalg.norm(X @ A - A @ X, 2)
    if comm > tol * np.linalg.norm(X, 2) * np.linalg.norm(A, 2):
        raise PreconditionError(f"x and a do not commute (||xa - ax|| = {comm:.3e})")
    sx = spectrum(X, tol)
    sxa = spectrum(X + A, tol)
    new = sum(1 for lam in sxa.points if dist_to_set(lam, sx) > tol)
    lost = sum(1 for lam in sx.points if dist_to_set(lam, sxa) > tol)
    r = spectral_rank(A, probes=probes, rng_seed=rng_seed)
    if new > r or lost > r:
        raise AnalysisError(f"counts ({new}, {lost}) exceed rank(a) = {r}")
    return DiffCounts(new, lost, r)
