"""Checks of the reference implementations themselves."""
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate

from specdisc import oracles


def test_volterra_iterates_small_cases():
    it = oracles.volterra_sine_iterates(2)
    # V sin = 1 - cos, V^2 sin = t - sin
    assert it[1] == ([Fraction(1)], 0, -1)
    assert it[2] == ([Fraction(0), Fraction(1)], -1, 0)


def test_volterra_moments_closed_forms():
    with mpmath.workdps(30):
        c = oracles.volterra_sine_moments(3)
        pi = mpmath.pi
        assert abs(c[0]) < 1e-25
        assert abs(c[1] - 2 * pi) < 1e-25
        assert abs(c[2] - 2 * pi**2) < 1e-25
        assert abs(c[3] - (4 * pi**3 / 3 - 2 * pi)) < 1e-25
    assert float(c[3]) == pytest.approx(35.05852, abs=1e-5)


def test_volterra_moments_by_quadrature():
    # V^3 sin = t^2/2 + cos t - 1, integrated numerically
    val, _ = integrate.quad(lambda t: t**2 / 2 + np.cos(t) - 1, 0, 2 * np.pi)
    assert float(oracles.volterra_sine_moments(3)[3]) == pytest.approx(val, rel=1e-12)


def test_bfs_components_ring():
    free = np.ones((7, 7), bool)
    free[1:6, 1:6] = False
    free[2:5, 2:5] = True
    comps = oracles.bfs_components(free)
    assert sorted(comps) == [(9, False), (24, True)]


def test_bfs_connectivity_diagonal():
    free = np.eye(3, dtype=bool)
    assert len(oracles.bfs_components(free, 4)) == 3
    assert len(oracles.bfs_components(free, 8)) == 1


def test_algebraic_rank():
    assert oracles.algebraic_rank(np.zeros((3, 3))) == 0
    assert oracles.algebraic_rank(np.diag([1.0, 2.0, 0.0])) == 2


def test_secular_roots_two_by_two():
    r = oracles.secular_roots([1, -1], [-0.5, 0.5], [1, 1], 2.0)
    assert np.allclose(np.sort(r.real), [-np.sqrt(0.5), np.sqrt(0.5)])


def test_secular_matches_dense_eigenvalues(rng):
    d = rng.standard_normal(6)
    w = rng.standard_normal(6)
    u = rng.standard_normal(6)
    r = oracles.secular_roots(d, w, u, 0.7)
    ev = np.linalg.eigvals(np.diag(d) + np.outer(u, w) / 0.7)
    assert np.allclose(np.sort_complex(r), np.sort_complex(ev), atol=1e-10)


def test_quasi_root_radius():
    assert oracles.quasi_root_radius(1.0, 2, 0.5) == pytest.approx(1.0)
    assert oracles.quasi_root_radius(2.0, 2, 0.5) == pytest.approx(np.sqrt(0.5))
