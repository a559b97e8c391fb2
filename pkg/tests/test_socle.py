import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specdisc import oracles, socle
from specdisc.errors import AnalysisError, InputError, PreconditionError, ValidationError
from specdisc.socle import IdempotentFamily, RankOneOperator

from conftest import crandn


def e(i, n=3):
    v = np.zeros(n, complex)
    v[i] = 1
    return v


# --- rank-one operators -------------------------------------------------------


def test_nilpotent_rank_one():
    a = RankOneOperator(e(0), e(1))
    assert socle.char_functional(a, np.eye(3)) == 0
    S = socle.rank_one_spectrum(a)
    assert len(S) == 1 and S.points[0] == 0


def test_rank_one_idempotent_spectrum():
    a = RankOneOperator(e(0), e(0))
    assert socle.char_functional(a, np.eye(3)) == 1
    S = socle.rank_one_spectrum(a)
    assert sorted(S.points.real) == [0, 1]


def test_degenerate_rank_one_rejected():
    with pytest.raises(InputError):
        RankOneOperator(np.zeros(3), e(0))
    with pytest.raises(InputError):
        RankOneOperator(e(0), np.zeros(3))


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_tau_identities(n, seed):
    rng = np.random.default_rng(seed)
    a = RankOneOperator(crandn(rng, n), crandn(rng, n))
    x = crandn(rng, n, n)
    A = a.matrix
    t = a.tau(x)
    scale = np.linalg.norm(A, 2) ** 2 * np.linalg.norm(x, 2)
    assert np.linalg.norm(A @ x @ A - t * A, 2) <= 1e-10 * scale
    # tau_{ax}(1) = tau_a(x): ax is again rank one
    assert a.right_mul(x).tau(np.eye(n)) == pytest.approx(t, abs=1e-10 * scale)
    assert a.left_mul(x).tau(np.eye(n)) == pytest.approx(np.trace(x @ A), abs=1e-10 * scale)


# --- spectral rank --------------------------------------------------------------


def test_spectral_rank_examples():
    assert socle.spectral_rank(np.zeros((3, 3))) == 0
    assert socle.spectral_rank(np.outer(e(0), e(1))) == 1
    assert socle.spectral_rank(np.diag([1.0, 2.0, 0.0]), probes=200) == 2


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_spectral_rank_equals_algebraic_rank(n, seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, n + 1))
    a = crandn(rng, n, r) @ crandn(rng, r, n) if r else np.zeros((n, n))
    assert socle.spectral_rank(a, probes=50, rng_seed=seed) == oracles.algebraic_rank(a) == r


def test_spectral_rank_worker_independent(monkeypatch, rng):
    a = crandn(rng, 6, 3) @ crandn(rng, 3, 6)
    monkeypatch.setenv("SPECDISC_WORKERS", "1")
    r1 = socle.spectral_rank(a, probes=40, rng_seed=5)
    monkeypatch.setenv("SPECDISC_WORKERS", "4")
    assert socle.spectral_rank(a, probes=40, rng_seed=5) == r1 == 3


def test_spectral_rank_rejects_bad_probes():
    with pytest.raises(InputError):
        socle.spectral_rank(np.eye(2), probes=0)


# --- commuting witness ------------------------------------------------------------


def test_witness_one_dimensional():
    fam = IdempotentFamily([2.0], [np.array([[1.0]])])
    a, y = socle.construct_commuting_witness(fam, [3.0])
    assert np.allclose(a, [[2.0]]) and np.allclose(y, [[1.5]])
    assert socle.count_distinct_nonzero(y @ a) == 1


def test_witness_diag_two_idempotents():
    fam = IdempotentFamily([1.0, 2.0], [np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0])])
    a, y = socle.construct_commuting_witness(fam, [1.0, 2.0])
    assert np.allclose(a, np.diag([1, 2, 0]))
    ev = np.linalg.eigvals(y @ a)
    assert len({round(v.real, 9) for v in ev if abs(v) > 1e-9}) == 2
    assert socle.count_distinct_nonzero(y @ a) == 2


def test_witness_rejects_non_orthogonal_family():
    p1 = np.diag([1.0, 0.0])
    p2 = np.array([[0.0, 1.0], [0.0, 1.0]])  # idempotent, but p1 p2 != 0
    fam = IdempotentFamily([1.0, 1.0], [p1, p2])
    with pytest.raises(ValidationError):
        socle.construct_commuting_witness(fam, [1.0, 2.0])


def test_witness_rejects_non_idempotent():
    fam = IdempotentFamily([1.0], [np.diag([2.0, 0.0])])
    with pytest.raises(ValidationError):
        socle.construct_commuting_witness(fam, [1.0])


def test_witness_rejects_repeated_alphas():
    fam = IdempotentFamily([1.0, 2.0], [np.diag([1.0, 0]), np.diag([0, 1.0])])
    with pytest.raises(InputError):
        socle.construct_commuting_witness(fam, [1.0, 1.0])


@given(st.integers(1, 6), st.integers(0, 2), st.integers(0, 2**31))
def test_random_witness(n, extra, seed):
    rng = np.random.default_rng(seed)
    fam = socle.random_idempotent_family(n, n + extra, rng)
    alphas = (1 + np.arange(n)) * np.exp(1j * np.arange(n))
    a, y = socle.construct_commuting_witness(fam, alphas)
    assert np.linalg.norm(y @ a - a @ y, 2) <= 1e-9 * np.linalg.norm(y, 2) * np.linalg.norm(a, 2)
    assert socle.count_distinct_nonzero(y @ a) == n


# --- commuting difference bound ------------------------------------------------------


def test_diff_check_zero_perturbation():
    assert socle.commuting_diff_check(np.diag([1.0, 2.0]), np.zeros((2, 2))).as_tuple() == (0, 0, 0)


def test_diff_check_from_zero():
    assert socle.commuting_diff_check(np.zeros((3, 3)), np.diag([1.0, 0, 0])).as_tuple() == (1, 0, 1)


def test_diff_check_diag():
    x = np.diag([1.0, 2.0, 3.0])
    a = np.diag([0.5, 0.0, 0.0])
    # sigma(x + a) = {1.5, 2, 3}: 1.5 is new, 1 is lost
    assert socle.commuting_diff_check(x, a).as_tuple() == (1, 1, 1)


def test_diff_check_requires_commuting():
    x = np.diag([1.0, 2.0])
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(PreconditionError):
        socle.commuting_diff_check(x, a)


@given(st.integers(1, 3), st.integers(3, 8), st.integers(0, 2**31))
def test_diff_bound_on_random_commuting_pairs(r, n, seed):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(crandn(rng, n, n))
    d = crandn(rng, n)
    s = np.zeros(n, complex)
    s[rng.choice(n, r, replace=False)] = crandn(rng, r)
    x = U @ np.diag(d) @ U.conj().T
    a = U @ np.diag(s) @ U.conj().T
    try:
        c = socle.commuting_diff_check(x, a, probes=50, rng_seed=seed)
    except AnalysisError:  # pragma: no cover - would be a genuine counterexample
        pytest.fail("difference count exceeded the rank")
    assert c.new_count <= r and c.lost_count <= r and c.rank_a == r
