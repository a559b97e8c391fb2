import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specdisc import oracles, socle, spectra, zoo
from specdisc.errors import InputError
from specdisc.zoo import OperatorSpec


def test_shift_is_exact_subdiagonal():
    assert np.array_equal(zoo.build("shift:3"), [[0, 0, 0], [1, 0, 0], [0, 1, 0]])


def test_mult_circle_identity_symbol():
    M = zoo.build("mult-circle:4:f=z")
    assert np.allclose(np.diag(M), [1, 1j, -1, -1j])
    assert np.count_nonzero(M - np.diag(np.diag(M))) == 0


def test_jordan_and_weighted_shift():
    J = zoo.build("jordan:3:lam=2")
    assert np.array_equal(J, [[2, 1, 0], [0, 2, 1], [0, 0, 2]])
    W = zoo.build("weighted-shift:4:w=1|2")
    assert np.array_equal(np.diag(W, -1), [1, 2, 1])


def test_circulant_closure_spectrum():
    ev = zoo.build("circulant-closure:8")
    assert spectra.hausdorff(np.linalg.eigvals(ev), zoo.roots_of_unity(8)) < 1e-12


def test_rank_one_spec_uses_one_based_basis():
    A = zoo.build("rank-one:3:u=e1,phi=e2")
    assert A[0, 1] == 1 and np.count_nonzero(A) == 1


@pytest.mark.parametrize("text", ["nosuch:4", "shift", "shift:x", "shift:0", "jordan:3:mu=1",
                                  "mult-circle:4", "rank-one:3:u=e1", "rank-one:3:u=e4,phi=e1",
                                  "mult-circle:4:f=__import__('os')", "weighted-shift:3:w=q"])
def test_malformed_specs(text):
    with pytest.raises(InputError):
        zoo.build(text)


@pytest.mark.parametrize("text", ["shift:5", "volterra:16:T=3", "mult-circle:8:f=z+0.3/z"])
def test_spec_canonical_round_trip(text):
    spec = OperatorSpec.parse(text)
    assert OperatorSpec.parse(str(spec)) == spec
    assert str(OperatorSpec.parse(text.replace("-", "_"))) == text


def test_parse_symbol():
    f = zoo.parse_symbol("z^2 + 2*i*z - exp(0)")
    z = np.array([0.5 + 0.25j, -1.0])
    assert np.allclose(f(z), z**2 + 2j * z - 1)
    assert np.allclose(zoo.parse_symbol("3")(z), 3)
    with pytest.raises(InputError):
        zoo.parse_symbol("z.real")
    with pytest.raises(InputError):
        zoo.parse_symbol("open(z)")


def test_volterra_structure():
    V = zoo.volterra(5, 4.0)
    h = 1.0
    assert np.allclose(np.triu(V, 1), 0)
    assert np.allclose(np.diag(V), [0, h / 2, h / 2, h / 2, h / 2])
    # trapezoid rule is exact on linear functions: V 1 = t
    t = zoo.volterra_nodes(5, 4.0)
    assert np.allclose(V @ np.ones(5), t)
    assert np.allclose(V @ t, t**2 / 2)


def test_volterra_radius_matches_diagonal():
    for n in (64, 128):
        r = spectra.spectral_radius(spectra.spectrum(zoo.volterra(n)))
        assert r == pytest.approx(oracles.volterra_radius(n), rel=0.05)


def test_volterra_pair_examples():
    V, Q = zoo.volterra_pair(1024)
    assert abs(Q.tau(np.eye(1024))) <= 1e-10
    assert socle.spectral_rank(zoo.volterra_pair(32)[1].matrix) == 1
    with pytest.raises(InputError):
        zoo.volterra_pair(7)


def test_volterra_first_moment_high_resolution():
    V, Q = zoo.volterra_pair(2048)
    assert Q.tau(V) == pytest.approx(2 * np.pi, abs=1e-4)


def test_circle_model_identity_symbol():
    cm = zoo.circle_model(zoo.roots_of_unity(64), 8)
    L, Pmat, holes = cm
    assert len(holes) == 1 and holes.hole_at(0j) is not None
    assert cm.functional.residuals.max() <= 1e-10
    assert np.array_equal(cm.samples, zoo.roots_of_unity(64))


def test_circle_model_constant_symbol_has_no_hole():
    with pytest.raises(InputError, match="no hole"):
        zoo.circle_model(np.full(64, 0.5 + 0j), 8)


def test_circle_model_double_cover_keeps_hole():
    a = zoo.roots_of_unity(64) ** 2
    cm = zoo.circle_model(a, 4)
    assert len(cm.holes) == 1 and cm.holes.hole_at(0j) is not None
    win, res, th = cm.holes.window, cm.holes.resolution, cm.holes.thickening
    assert oracles.hole_count(a, win, res, th) == 1


def test_circle_model_rejects_zero_outside_hole():
    a = zoo.roots_of_unity(64) + 3
    with pytest.raises(InputError):
        zoo.circle_model(a, 4)


@given(st.integers(2, 40))
def test_shift_is_nilpotent(n):
    S = zoo.shift(n)
    assert not np.any(np.linalg.matrix_power(S, n))
    assert np.any(np.linalg.matrix_power(S, n - 1))
