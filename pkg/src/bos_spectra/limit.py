"""Exact polynomial eigenbasis of the limit operator.

Polynomials are tuples of :class:`fractions.Fraction` indexed by power, so
``(0, -1, 1)`` is ``s**2 - s``. The limit operator acts on polynomials with
zero constant term as ``p -> -(s/2) p'' + s p'`` and the Hilbert space carries
the weight ``2 s^-1 e^(-2s)`` on (0, inf), whose monomial moments are
``<s^a, s^b> = (a + b - 1)! / 2^(a + b - 1)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .quadrature import PanelScheme, composite_rule

Poly = tuple  # tuple[Fraction, ...], index = power of s

EXACT_MAX_N = 200


def _trim(coeffs) -> Poly:
    c = [Fraction(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class EigenPoly:
    n: int
    coeffs: Poly  # coeffs[r] = a_{n,r}; coeffs[0] == 0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, s):
        return poly_eval(self.coeffs, s)

    def __str__(self) -> str:
        return poly_str(self.coeffs)


@functools.lru_cache(maxsize=None)
def eigenpoly(n: int) -> EigenPoly:
    """Eigenpolynomial ``f_n = sum_r a_{n,r} s^r`` with ``L0 f_n = n f_n``.

    ``a_{n,n} = 1`` and ``a_{n,r} = -r(r+1) / (2(n-r)) * a_{n,r+1}``.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= EXACT_MAX_N:
        raise ValueError(f"n must be an integer in [1, {EXACT_MAX_N}], got {n!r}")
    n = int(n)
    a = [Fraction(0)] * (n + 1)
    a[n] = Fraction(1)
    for r in range(n - 1, 0, -1):
        a[r] = -Fraction(r * (r + 1), 2 * (n - r)) * a[r + 1]
    return EigenPoly(n, tuple(a))


def eigenpoly_float(n: int) -> np.ndarray:
    """Float coefficients of ``f_n`` for any n, by the same recursion.

    Beyond degree ~150 the low coefficients exceed the double range; callers
    should prefer :func:`eigenpoly` when exact values are needed.
    """
    if n < 1:
        raise ValueError("n must be positive")
    a = np.zeros(n + 1)
    a[n] = 1.0
    for r in range(n - 1, 0, -1):
        a[r] = -r * (r + 1) / (2.0 * (n - r)) * a[r + 1]
    return a


def _check_sP(p: Sequence) -> None:
    if len(p) and p[0] != 0:
        raise ValueError("polynomial must have zero constant term")


def apply_L0(p: Sequence) -> Poly:
    """Exact ``-(s/2) p'' + s p'`` for a polynomial with zero constant term.

    Monomials map as ``s^r -> -r(r-1)/2 s^(r-1) + r s^r``.
    """
    _check_sP(p)
    p = [Fraction(x) for x in p]
    out = [Fraction(0)] * max(len(p), 1)
    for r, c in enumerate(p):
        if r == 0 or c == 0:
            continue
        out[r] += r * c
        out[r - 1] -= Fraction(r * (r - 1), 2) * c
    return _trim(out)


def scale(p: Sequence, k) -> Poly:
    return _trim(Fraction(k) * Fraction(x) for x in p)


def moment(a: int, b: int) -> Fraction:
    """Exact ``int_0^inf s^a s^b 2 s^-1 e^(-2s) ds`` for integers a, b >= 1."""
    k = a + b
    if a < 1 or b < 1:
        raise ValueError("moments are defined for positive powers")
    return Fraction(math.factorial(k - 1), 2 ** (k - 1))


def gram(p: Sequence, q: Sequence) -> Fraction:
    """Exact weighted inner product of two polynomials with zero constant term."""
    _check_sP(p)
    _check_sP(q)
    total = Fraction(0)
    for a, ca in enumerate(p):
        if a == 0 or ca == 0:
            continue
        for b, cb in enumerate(q):
            if b == 0 or cb == 0:
                continue
            total += Fraction(ca) * Fraction(cb) * moment(a, b)
    return total


def gram_matrix(n_max: int) -> list[list[Fraction]]:
    fs = [eigenpoly(n).coeffs for n in range(1, n_max + 1)]
    return [[gram(p, q) for q in fs] for p in fs]


def poly_eval(coeffs: Sequence, s):
    """Evaluate at float points, rounding once.

    Rational coefficients are evaluated by exact Horner on ``Fraction(x)``;
    the monomial terms of high-degree eigenpolynomials cancel heavily, so
    term-wise float sums lose many digits. Float coefficients fall back to a
    compensated sum of the terms.
    """
    x = np.asarray(s, dtype=float)
    flat = x.ravel()
    if all(isinstance(c, (Fraction, int)) for c in coeffs):
        vals = []
        for v in flat:
            fv = Fraction(float(v))
            acc = Fraction(0)
            for c in reversed(coeffs):
                acc = acc * fv + c
            vals.append(float(acc))
        out = np.array(vals)
    else:
        cf = [float(c) for c in coeffs]
        out = np.array([math.fsum(c * v**r for r, c in enumerate(cf) if c) for v in flat])
    out = out.reshape(x.shape)
    return float(out) if np.ndim(s) == 0 else out


def poly_str(coeffs: Sequence) -> str:
    """Format as ``s^3 - 3 s^2 + 3/2 s``, highest power first."""
    parts = []
    for r in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[r])
        if c == 0:
            continue
        mag = abs(c)
        mono = "" if r == 0 else ("s" if r == 1 else f"s^{r}")
        body = str(mag) if (mag != 1 or r == 0) else ""
        term = " ".join(x for x in (body, mono) if x)
        if not parts:
            parts.append(("-" if c < 0 else "") + term)
        else:
            parts.append(("- " if c < 0 else "+ ") + term)
    return " ".join(parts) if parts else "0"


def norm_squared(n: int) -> Fraction:
    f = eigenpoly(n).coeffs
    return gram(f, f)


def normalized_eigenfunction_values(n: int, points) -> np.ndarray:
    """Values of ``e_n = f_n / ||f_n||`` at positive points."""
    x = np.asarray(points, dtype=float)
    if np.any(x <= 0):
        raise ValueError("points must be positive")
    nrm = math.sqrt(norm_squared(n))
    return np.asarray(poly_eval(eigenpoly(n).coeffs, x)) / nrm


def projection_capture(g_moments, g_norm_sq: Fraction, n_max: int) -> Fraction:
    """Fraction of ``||g||^2`` captured by ``span{e_1..e_N}``.

    ``g_moments(r)`` must return the exact inner product ``<g, s^r>``.
    """
    captured = Fraction(0)
    for n in range(1, n_max + 1):
        f = eigenpoly(n).coeffs
        ip = sum((c * g_moments(r) for r, c in enumerate(f) if r and c), Fraction(0))
        captured += ip * ip / gram(f, f)
    return captured / g_norm_sq


def resolvent_zero_apply(p: Sequence, s, m: int = 24) -> np.ndarray:
    """Apply the limit resolvent ``(R0 p)(s) = int G0(s, t) p(t) w0(t) dt``.

    Split at ``t = s``::

        R0 p(s) = int_0^s gamma0(t) w0(t) p(t) dt + gamma0(s) int_s^inf p(t) w0(t) dt

    where ``gamma0 w0 = -expm1(-2t)/t`` and the second term is evaluated as
    ``-expm1(-2s)/2 * int_0^inf p(s+v) 2 (s+v)^-1 e^(-2v) dv`` so nothing
    overflows.
    """
    _check_sP(p)
    x = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(x <= 0):
        raise ValueError("s must be positive")
    cf = np.array([float(c) for c in p])
    deg = len(cf) - 1
    # (t^r)/t collapses the 1/t factor exactly
    q = cf[1:]  # p(t)/t coefficients

    def p_over_t(t):
        return np.polynomial.polynomial.polyval(t, q)

    out = np.empty_like(x)
    unit = PanelScheme.graded(0.0, 1.0, 4, m, n_left=12, geometric_ratio=3.0, layer=0.25)
    r_unit = composite_rule(unit)
    vmax = 40.0 + 2.0 * deg
    tail = composite_rule(PanelScheme.geometric(0.0, vmax, 0.25, m, ratio=1.6))
    for i, si in enumerate(x):
        t = si * r_unit.nodes
        w = si * r_unit.weights
        left = np.dot(w, -np.expm1(-2.0 * t) * p_over_t(t))
        v = tail.nodes
        right = np.dot(tail.weights, 2.0 * np.polynomial.polynomial.polyval(si + v, cf) / (si + v) * np.exp(-2.0 * v))
        out[i] = left + (-0.5 * np.expm1(-2.0 * si)) * right
    return float(out[0]) if np.ndim(s) == 0 else out


__all__ = [
    "EigenPoly",
    "eigenpoly",
    "eigenpoly_float",
    "apply_L0",
    "gram",
    "gram_matrix",
    "moment",
    "norm_squared",
    "normalized_eigenfunction_values",
    "poly_eval",
    "poly_str",
    "projection_capture",
    "resolvent_zero_apply",
    "scale",
]
