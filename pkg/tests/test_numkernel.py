import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specdisc import numkernel as nk
from specdisc.errors import InputError, NumericalError, SingularMatrixError

from conftest import crandn


def test_eig_identity():
    assert np.allclose(nk.eig(np.eye(3)), [1, 1, 1])


def test_eig_nilpotent_jordan():
    J = np.diag(np.ones(3), -1)
    assert np.allclose(nk.eig(J), 0)


def test_eig_companion_roots():
    C = np.array([[0, 1], [1, 0]])  # companion of lam^2 - 1
    assert np.allclose(np.sort(nk.eig(C).real), [-1, 1])


def test_eig_rejects_nonfinite():
    with pytest.raises(InputError):
        nk.eig(np.array([[np.nan]]))


def test_eig_rejects_nonsquare():
    with pytest.raises(InputError):
        nk.eig(np.ones((2, 3)))


def test_eig_nonconvergence_maps_to_numerical_error(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigvals", boom)
    with pytest.raises(NumericalError):
        nk.eig(np.eye(2))


def test_solve_examples():
    b = np.array([1.0, 2.0, 3.0])
    assert np.allclose(nk.solve(np.eye(3), b), b)
    assert np.allclose(nk.solve(np.diag([2, 4]), [1, 1]), [0.5, 0.25])
    with pytest.raises(SingularMatrixError):
        nk.solve(np.zeros((2, 2)), [1, 1])


def test_solve_near_singular_rejected():
    M = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-17]])
    with pytest.raises(SingularMatrixError):
        nk.solve(M, [1, 0])


def test_smin_examples():
    assert nk.smin(np.eye(4)) == pytest.approx(1.0)
    assert nk.smin(np.diag([3.0, 0.5])) == pytest.approx(0.5)
    E = np.zeros((3, 3))
    E[0, 1] = 1.0
    assert nk.smin(E) == pytest.approx(0.0, abs=1e-15)


def test_monomials_examples():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    (P0,) = nk.monomials(M, 0)
    assert np.array_equal(P0, np.eye(2))
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    P = nk.monomials(J, 2)
    assert np.array_equal(P[1], J) and np.array_equal(P[2], np.zeros((2, 2)))
    D = nk.monomials(np.array([[2.0]]), 3)
    assert [complex(d[0, 0]) for d in D] == [1, 2, 4, 8]
    with pytest.raises(InputError):
        nk.monomials(M, -1)


def test_lu_transposed_solve(rng):
    A = crandn(rng, 6, 6) + 3 * np.eye(6)
    b = crandn(rng, 6)
    lu = nk.LU(A)
    assert np.allclose(A.T @ lu.solve(b, trans=1), b)


def test_norm2_power_iteration_matches_svd(rng):
    A = crandn(rng, 300, 300)
    assert nk.norm2(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
    assert nk.norm2(A) <= np.linalg.norm(A, 2) * (1 + 1e-12)


@given(st.integers(1, 10), st.integers(0, 2**31))
def test_eig_backward_error_bound(n, seed):
    rng = np.random.default_rng(seed)
    A = crandn(rng, n, n)
    bound = nk.eig_backward_bound(A)
    for lam in nk.eig(A):
        assert nk.smin(lam * np.eye(n) - A) <= bound


@given(st.integers(1, 10), st.integers(0, 2**31))
def test_solve_residual(n, seed):
    rng = np.random.default_rng(seed)
    A = crandn(rng, n, n) + n * np.eye(n)
    b = crandn(rng, n)
    x = nk.solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(x) + 1e-12
