import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bos_spectra.eigen import (
    JacobiConvergenceError,
    RootCountError,
    Spectrum,
    Tridiag,
    charpoly_eval,
    jacobi_eigen,
    tridiag_real_roots,
)


def _sym(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    return a + a.T


def test_jacobi_small_examples():
    assert np.array_equal(jacobi_eigen(np.diag([3.0, 1.0, 2.0])).values, [1.0, 2.0, 3.0])
    assert np.allclose(jacobi_eigen(np.array([[0.0, 1.0], [1.0, 0.0]])).values, [-1.0, 1.0], atol=1e-15)


def test_jacobi_trace_and_frobenius():
    a = _sym(50, 3)
    ev = jacobi_eigen(a).values
    assert abs(ev.sum() - np.trace(a)) < 1e-10
    assert abs(np.sum(ev**2) - np.sum(a * a)) < 1e-10 * np.sum(a * a)


@given(st.integers(1, 30), st.integers(0, 10_000))
def test_jacobi_matches_lapack(n, seed):
    a = _sym(n, seed)
    res = jacobi_eigen(a, vectors=True)
    assert np.allclose(res.values, np.linalg.eigvalsh(a), atol=1e-10 * max(1.0, np.abs(a).max()))
    v = res.vectors
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-10)
    assert np.allclose(a @ v, v * res.values, atol=1e-9)


def test_jacobi_does_not_modify_input():
    a = _sym(8, 1)
    b = a.copy()
    jacobi_eigen(a)
    assert np.array_equal(a, b)


def test_jacobi_rejects_bad_input():
    with pytest.raises(ValueError):
        jacobi_eigen(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        jacobi_eigen(np.array([[np.nan]]))
    with pytest.raises(JacobiConvergenceError):
        jacobi_eigen(_sym(40, 2), max_sweeps=1)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum((2.0, 1.0), "nystrom")
    with pytest.raises(ValueError):
        Spectrum((1.0,), "magic")
    s = Spectrum((1.0, 2.0), "fourier", reliable_count=1)
    assert s.shortfall and s.as_dict()["eigenvalues"] == [1.0, 2.0]


def test_tridiag_dense_layout():
    t = Tridiag.a_plus(0.2, 3)
    m = t.dense()
    assert np.allclose(np.diag(m), [1, 2, 3])
    assert m[1, 0] == pytest.approx(0.1 * 2 * 1)
    assert m[0, 1] == pytest.approx(-0.1 * 1 * 2)
    assert np.allclose(t.coupling()[1:], -(0.04 / 4) * np.array([2.0, 3.0]) ** 2 * np.array([1.0, 2.0]) ** 2)


def test_charpoly_one_by_one():
    t = Tridiag.a_plus(0.3, 1)
    sign, logmag, ratio = charpoly_eval(t, 0.25)
    assert sign == 1 and math.exp(logmag) == pytest.approx(0.75)
    assert ratio == pytest.approx(-1 / 0.75)
    assert tridiag_real_roots(t, window=(0.5, 2.0)).roots == pytest.approx((1.0,))


@given(st.floats(0.01, 0.49))
def test_two_by_two_roots(e):
    t = Tridiag.a_plus(e, 2)
    r = tridiag_real_roots(t, window=(0.5, 10.0), count=2).roots
    disc = math.sqrt(1 - 4 * e * e)
    assert r == pytest.approx(((3 - disc) / 2, (3 + disc) / 2), abs=1e-12)


@given(st.floats(-3, 40), st.floats(0.01, 0.9))
def test_charpoly_matches_dense_determinant(lam, e):
    t = Tridiag.a_plus(e, 12)
    sign, logmag, _ = charpoly_eval(t, lam)
    s2, l2 = np.linalg.slogdet(t.dense() - lam * np.eye(12))
    if sign != 0 and abs(l2) < 700:
        assert sign == s2
        assert logmag == pytest.approx(l2, abs=1e-8 * max(1.0, abs(l2)))


def test_charpoly_large_truncation_stays_finite():
    sign, logmag, ratio = charpoly_eval(Tridiag.a_plus(0.3, 2000), 3.3)
    assert sign in (-1, 1) and math.isfinite(logmag) and logmag > 1000


def test_roots_against_dense_eigvals():
    e, n = 0.1, 80
    t = Tridiag.a_plus(e, n)
    want = np.sort(np.linalg.eigvals(t.dense()).real)[:5]
    got = tridiag_real_roots(t, window=(0.5, 7.0), count=5).roots
    assert np.allclose(got, want, rtol=1e-10)
    # frozen values on which the Nystrom route agrees to 1e-12
    assert np.allclose(got, [1.0096792936, 2.0733414572, 3.2297758903, 4.5013411374, 5.8999309387], atol=1e-9)


@given(st.floats(0.05, 0.45))
def test_sign_flip_invariance(e):
    t = Tridiag.a_plus(e, 40)
    flipped = Tridiag(t.diag, -t.sub, -t.sup)
    a = tridiag_real_roots(t, window=(0.5, 8.0)).roots
    b = tridiag_real_roots(flipped, window=(0.5, 8.0)).roots
    assert np.allclose(a, b, atol=1e-10)


def test_roots_tend_to_integers_as_eps_vanishes():
    r = tridiag_real_roots(Tridiag.a_plus(1e-6, 10), window=(0.5, 10.5), count=10).roots
    assert np.allclose(r, np.arange(1, 11), atol=1e-8)


def test_full_line_symmetry():
    t = Tridiag.full_line(0.2, 30)
    pos = np.array(tridiag_real_roots(t, window=(0.5, 6.0)).roots)
    neg = -np.array(tridiag_real_roots(t, window=(-6.0, -0.5)).roots)[::-1]
    n = min(len(pos), len(neg), 4)
    assert n >= 4
    assert np.allclose(pos[:n], neg[:n], atol=1e-8)
    sign, logmag, _ = charpoly_eval(t, 0.0)
    assert sign == 0 or logmag < -30


def test_root_count_error():
    with pytest.raises(RootCountError) as info:
        tridiag_real_roots(Tridiag.a_plus(0.1, 5), window=(0.5, 3.5), count=5)
    assert info.value.found == 3 and info.value.requested == 5


def test_escaped_seeds_reported():
    rs = tridiag_real_roots(Tridiag.a_plus(0.1, 20), seeds=[25.0], window=(0.5, 3.0))
    assert 25.0 in rs.escaped_seeds


def test_doubling_truncation_plateau():
    lo = tridiag_real_roots(Tridiag.a_plus(0.1, 64), window=(0.5, 7.0), count=5).roots
    hi = tridiag_real_roots(Tridiag.a_plus(0.1, 128), window=(0.5, 7.0), count=5).roots
    assert np.max(np.abs(np.subtract(lo, hi))) < 1e-8
