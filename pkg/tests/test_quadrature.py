import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bos_spectra.quadrature import (
    PanelScheme,
    QuadratureRule,
    composite_rule,
    gauss_legendre,
    graded_unit_breakpoints,
    integrate_2d,
    lagrange_basis,
    map_panels,
    rule_from_breakpoints,
)


def test_small_rules():
    r1 = gauss_legendre(1)
    assert list(r1.nodes) == [0.0] and list(r1.weights) == [2.0]
    r2 = gauss_legendre(2)
    assert np.allclose(r2.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=2e-16, rtol=0)
    assert np.allclose(r2.weights, [1.0, 1.0], atol=4e-16, rtol=0)


@pytest.mark.parametrize("m", [3, 7, 10, 21, 64, 200])
def test_against_numpy_leggauss(m):
    x, w = np.polynomial.legendre.leggauss(m)
    r = gauss_legendre(m)
    assert np.allclose(r.nodes, x, atol=1e-14, rtol=0)
    assert np.allclose(r.weights, w, atol=1e-14, rtol=0)


@given(st.integers(3, 60))
def test_quartic_exact(m):
    assert gauss_legendre(m).integrate(lambda x: x**4) == pytest.approx(0.4, rel=1e-13)


@given(st.integers(1, 40))
def test_exactness_degree(m):
    r = gauss_legendre(m)
    k = 2 * m - 2  # even power, exact for degree <= 2m - 1
    assert r.integrate(lambda x: x**k) == pytest.approx(2.0 / (k + 1), rel=1e-12)
    assert np.all(r.weights > 0)
    assert np.all(np.diff(r.nodes) > 0)


def test_bad_orders():
    for m in (0, -3, 5000, 2.5):
        with pytest.raises(ValueError):
            gauss_legendre(m)


def test_rule_is_read_only():
    r = gauss_legendre(5)
    with pytest.raises(ValueError):
        r.nodes[0] = 1.0


def test_single_panel_map():
    r = map_panels(gauss_legendre(2), PanelScheme((0.0, 1.0), 2))
    assert np.allclose(r.nodes, [(1 - 1 / math.sqrt(3)) / 2, (1 + 1 / math.sqrt(3)) / 2])
    assert np.allclose(r.weights, [0.5, 0.5])
    assert list(r.panels()) == [(0.0, 1.0, slice(0, 2))]


def test_graded_sqrt():
    r = composite_rule(PanelScheme.graded(0.0, 1.0, 4, 10, n_left=10))
    assert r.integrate(np.sqrt) == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_geometric_exponential():
    T = 30.0
    scheme = PanelScheme.geometric(0.0, T, 0.5, 12, ratio=1.8)
    assert scheme.n_panels <= 8
    r = composite_rule(scheme)
    assert r.integrate(lambda s: np.exp(-2 * s)) == pytest.approx((1 - math.exp(-2 * T)) / 2, abs=1e-12)


def test_doubling_order_reduces_error():
    f = lambda s: np.exp(-s)
    exact = 1 - math.exp(-4.0)
    errs = [abs(composite_rule(PanelScheme((0.0, 4.0), m)).integrate(f) - exact) for m in (1, 2, 4)]
    assert errs[1] <= errs[0] / 2 and errs[2] <= errs[1] / 2


def test_scheme_validation():
    with pytest.raises(ValueError):
        PanelScheme((0.0,), 4)
    with pytest.raises(ValueError):
        PanelScheme((0.0, 1.0, 1.0), 4)
    with pytest.raises(ValueError):
        PanelScheme((0.0, 1.0), 0)
    with pytest.raises(ValueError):
        PanelScheme((0.0, 1.0), 4, geometric_ratio=1.0)


def test_integrate_2d():
    r = composite_rule(PanelScheme((0.0, 1.0), 6))
    assert integrate_2d(lambda s, t: np.ones_like(s), r) == pytest.approx(1.0, rel=1e-14)
    r = composite_rule(PanelScheme.geometric(0.0, 20.0, 0.25, 14, ratio=1.6))
    assert integrate_2d(lambda s, t: np.exp(-2 * s - 2 * t), r) == pytest.approx(0.25, abs=1e-10)


@given(st.integers(2, 14), st.floats(-1, 1))
def test_lagrange_partition_of_unity(m, y):
    nodes = gauss_legendre(m).nodes
    L = lagrange_basis(nodes, np.array([y]))
    assert L.sum() == pytest.approx(1.0, abs=1e-11)
    # reproduces polynomials of degree < m
    assert float(L[:, 0] @ nodes ** (m - 1)) == pytest.approx(y ** (m - 1), abs=1e-10)


def test_lagrange_exact_at_nodes():
    nodes = gauss_legendre(6).nodes
    assert np.array_equal(lagrange_basis(nodes, nodes), np.eye(6))


def test_graded_breakpoints():
    bp = graded_unit_breakpoints(5, 3.0, True, 4)
    assert bp[0] == 0.0 and bp[-1] == 1.0 and np.all(np.diff(bp) > 0)
    x, w = rule_from_breakpoints(bp, 8)
    assert w.sum() == pytest.approx(1.0, rel=1e-14)
    assert np.dot(w, np.sqrt(x)) == pytest.approx(2 / 3, abs=1e-8)


def test_rule_shape_check():
    with pytest.raises(ValueError):
        QuadratureRule(np.zeros(3), np.zeros(2), (0.0, 1.0))
