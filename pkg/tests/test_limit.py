import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from bos_spectra.limit import (
    EXACT_MAX_N,
    apply_L0,
    eigenpoly,
    eigenpoly_float,
    gram,
    gram_matrix,
    moment,
    norm_squared,
    normalized_eigenfunction_values,
    poly_eval,
    poly_str,
    projection_capture,
    resolvent_zero_apply,
    scale,
)


def test_first_eigenpolynomials():
    assert eigenpoly(1).coeffs == (0, 1)
    assert eigenpoly(2).coeffs == (0, -1, 1)
    assert eigenpoly(3).coeffs == (0, Fraction(3, 2), -3, 1)
    assert str(eigenpoly(3)) == "s^3 - 3 s^2 + 3/2 s"
    assert str(eigenpoly(2)) == "s^2 - s"


def test_apply_L0_examples():
    assert apply_L0((0, 1)) == (1,) or apply_L0((0, 1)) == (0, 1)
    assert apply_L0((0, 1)) == (0, 1)
    assert apply_L0((0, 0, 1)) == (0, -1, 2)
    assert apply_L0(eigenpoly(2).coeffs) == scale(eigenpoly(2).coeffs, 2)
    with pytest.raises(ValueError):
        apply_L0((1, 1))


def test_gram_examples():
    assert gram((0, 1), (0, -1, 1)) == 0
    assert gram((0, 1), (0, 1)) == Fraction(1, 2)
    assert moment(1, 1) == Fraction(1, 2)
    with pytest.raises(ValueError):
        moment(0, 2)


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 3), (4, 4)])
def test_moment_against_quadrature(a, b):
    val, _ = integrate.quad(lambda s: s ** (a + b - 1) * 2 * math.exp(-2 * s), 0, np.inf, epsabs=0, epsrel=1e-13)
    assert float(moment(a, b)) == pytest.approx(val, rel=1e-12)


def test_eigen_relation_exact_to_50():
    for n in range(1, 51):
        f = eigenpoly(n).coeffs
        assert apply_L0(f) == scale(f, n)


def test_orthogonality_exact_to_30():
    g = gram_matrix(30)
    for i in range(30):
        assert g[i][i] > 0
        for j in range(30):
            if i != j:
                assert g[i][j] == 0


@given(st.integers(1, 25))
def test_laguerre_form(n):
    # f_n is proportional to s L_{n-1}^{(1)}(2s)
    s = np.array([0.1, 0.7, 1.9, 3.5])
    lag = s * special.eval_genlaguerre(n - 1, 1, 2 * s)
    lead = (-2.0) ** (n - 1) / math.factorial(n - 1)
    assert np.allclose(poly_eval(eigenpoly(n).coeffs, s), lag / lead, rtol=1e-11, atol=1e-11 * np.max(np.abs(lag / lead)))


@given(st.integers(1, 60))
def test_float_coefficients(n):
    exact = np.array([float(c) for c in eigenpoly(n).coeffs])
    assert np.allclose(eigenpoly_float(n), exact, rtol=1e-13)


def test_cap_and_bad_n():
    for bad in (0, EXACT_MAX_N + 1, 2.0):
        with pytest.raises(ValueError):
            eigenpoly(bad)


def test_normalized_values():
    s = np.array([0.5, 1.0, 2.0])
    assert np.allclose(normalized_eigenfunction_values(1, s), math.sqrt(2) * s)
    for n in (1, 4, 9):
        val, _ = integrate.quad(
            lambda x: normalized_eigenfunction_values(n, x) ** 2 * 2 / x * math.exp(-2 * x),
            0, 80, epsabs=0, epsrel=1e-13, limit=200,
        )
        assert val == pytest.approx(1.0, abs=1e-12)
    assert eigenpoly(7).coeffs[-1] == 1
    with pytest.raises(ValueError):
        normalized_eigenfunction_values(2, [0.0])


def test_norm_squared_closed_form():
    # ||f_n||^2 = n! (n-1)! / 2^(2n-1) from the Laguerre normalization
    for n in range(1, 15):
        want = Fraction(math.factorial(n) * math.factorial(n - 1), 2 ** (2 * n - 1))
        assert norm_squared(n) == want


def test_projection_completeness():
    # g(s) = s e^-s: <g, s^r> = 2 r!/3^(r+1), ||g||^2 = 1/8
    def g_mom(r):
        return Fraction(2 * math.factorial(r), 3 ** (r + 1))

    cap = projection_capture(g_mom, Fraction(1, 8), 40)
    assert 1 - 1e-6 <= cap <= 1
    assert projection_capture(g_mom, Fraction(1, 8), 5) < cap


def test_resolvent_inverts_L0():
    s = np.array([0.05, 0.4, 1.0, 2.5, 6.0])
    for n in range(1, 6):
        f = eigenpoly(n).coeffs
        got = resolvent_zero_apply(f, s)
        want = np.asarray(poly_eval(f, s)) / n
        assert np.allclose(got, want, atol=1e-8, rtol=1e-8)


def test_resolvent_definition_and_linearity():
    f = (0, 1)
    direct, _ = integrate.quad(
        lambda t: 0.5 * math.expm1(2 * min(1.0, t)) * t * 2 / t * math.exp(-2 * t), 0, 60, points=[1.0], epsrel=1e-12
    )
    assert resolvent_zero_apply(f, 1.0) == pytest.approx(direct, rel=1e-10)
    two = resolvent_zero_apply((0, 2), [0.3, 1.7])
    assert np.allclose(two, 2 * resolvent_zero_apply(f, [0.3, 1.7]))


def test_poly_str_forms():
    assert poly_str((0, Fraction(-1, 2))) == "-1/2 s"
    assert poly_str((0,)) == "0"
    assert poly_str((0, 0, -1)) == "-s^2"
