"""Weights, Green functions and integral kernels for the epsilon family and its limit.

Every power of the form ``x**(1/eps)`` is evaluated in log domain through
:func:`log_ratio`, and every "power minus one" goes through ``expm1`` so that
small-argument behaviour is accurate and ``1/eps`` exponents of several
hundred do not overflow.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# exp() overflows just above this
_MAX_EXP = 709.0


class DomainError(ValueError):
    """An argument lies outside the open domain of a kernel function."""


class KernelOverflowError(OverflowError):
    """A Green-function value exceeds the double-precision range."""


@dataclass(frozen=True)
class Epsilon:
    """The small parameter, restricted to the open interval (0, 1)."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v) or not 0.0 < v < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def right_end(self) -> float:
        """The right endpoint 1/eps of the transformed domain."""
        return 1.0 / self.value

    def __float__(self) -> float:
        return self.value


def as_eps(eps: Union[Epsilon, float]) -> Epsilon:
    return eps if isinstance(eps, Epsilon) else Epsilon(eps)


def _out(x: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(x) if np.ndim(like) == 0 else x


def _check_open(name: str, x: np.ndarray, lo: float, hi: float, closed_lo: bool = False) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    bad_lo = x < lo if closed_lo else x <= lo
    if np.any(bad_lo) or np.any(x >= hi):
        left = "[" if closed_lo else "("
        raise DomainError(f"{name} outside {left}{lo}, {hi})")


def log_ratio(eps: Union[Epsilon, float], s: ArrayLike) -> ArrayLike:
    """Return ``(1/eps) * (log(1 - eps s) - log(1 + eps s))``.

    This is the logarithm of ``z = ((1 - eps s)/(1 + eps s))**(1/eps)``. It is
    non-positive for ``s >= 0``, tends to ``-2 s`` as eps -> 0 and to ``-inf``
    as ``s -> 1/eps``.
    """
    e = as_eps(eps).value
    x = np.asarray(s, dtype=float)
    _check_open("s", x, 0.0, 1.0 / e, closed_lo=True)
    with np.errstate(divide="ignore"):
        out = (np.log1p(-e * x) - np.log1p(e * x)) / e
    return _out(out, s)


def weight_eps(eps: Union[Epsilon, float], s: ArrayLike) -> ArrayLike:
    """Weight ``2 s^-1 (1 - eps s)^(1/eps) (1 + eps s)^(-1/eps)`` on (0, 1/eps)."""
    e = as_eps(eps)
    x = np.asarray(s, dtype=float)
    _check_open("s", x, 0.0, e.right_end)
    return _out(2.0 / x * np.exp(log_ratio(e, x)), s)


def coefficient_eps(eps: Union[Epsilon, float], s: ArrayLike) -> ArrayLike:
    """Leading coefficient ``(1 - eps s)^(1 + 1/eps) (1 + eps s)^(1 - 1/eps)``."""
    e = as_eps(eps)
    x = np.asarray(s, dtype=float)
    _check_open("s", x, 0.0, e.right_end, closed_lo=True)
    lg = np.log1p(-e.value * x) + np.log1p(e.value * x) + log_ratio(e, x)
    return _out(np.exp(lg), s)


def gamma_eps(eps: Union[Epsilon, float], s: ArrayLike) -> ArrayLike:
    """Antiderivative ``gamma_eps(s) = (1/2)(((1 + eps s)/(1 - eps s))^(1/eps) - 1)``.

    Raises :class:`KernelOverflowError` instead of returning ``inf`` when
    ``s`` is so close to ``1/eps`` that the value is not representable.
    """
    e = as_eps(eps)
    x = np.asarray(s, dtype=float)
    _check_open("s", x, 0.0, e.right_end, closed_lo=True)
    expo = -np.asarray(log_ratio(e, x))
    if np.any(expo > _MAX_EXP):
        raise KernelOverflowError(
            f"gamma_eps overflows for s within {e.right_end - float(np.max(x)):.3g} of 1/eps"
        )
    return _out(0.5 * np.expm1(expo), s)


def greens_eps(eps: Union[Epsilon, float], s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Green function ``G_eps(s, t) = gamma_eps(min(s, t))`` on (0, 1/eps)^2."""
    e = as_eps(eps)
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    _check_open("s", x, 0.0, e.right_end)
    _check_open("t", y, 0.0, e.right_end)
    return _out(np.asarray(gamma_eps(e, np.minimum(x, y))), np.asarray(s) + np.asarray(t))


def kernel_eps(eps: Union[Epsilon, float], s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Symmetric kernel of the inverse operator on ``L^2((0, 1/eps), ds)``.

    With ``a = min(s, t)``, ``b = max(s, t)`` and ``l = log_ratio``::

        K = (s t)^(-1/2) * exp((l(b) - l(a)) / 2) * (-expm1(l(a)))
    """
    e = as_eps(eps)
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    _check_open("s", x, 0.0, e.right_end)
    _check_open("t", y, 0.0, e.right_end)
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    la = np.asarray(log_ratio(e, a))
    lb = np.asarray(log_ratio(e, b))
    out = np.exp(0.5 * (lb - la)) * (-np.expm1(la)) / np.sqrt(x * y)
    return _out(out, np.asarray(s) + np.asarray(t))


def kernel_eps_extended(eps: Union[Epsilon, float], s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """``kernel_eps`` inside the square ``(0, 1/eps)^2`` and exactly 0 outside it."""
    e = as_eps(eps)
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("s, t must be finite")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("s, t must be positive")
    inside = (x < e.right_end) & (y < e.right_end)
    out = np.zeros(x.shape)
    if np.any(inside):
        out[inside] = kernel_eps(e, x[inside], y[inside])
    return _out(out, np.asarray(s) + np.asarray(t))


def weight_zero(s: ArrayLike) -> ArrayLike:
    """Limit weight ``w0(s) = 2 s^-1 e^(-2s)``."""
    x = np.asarray(s, dtype=float)
    _check_open("s", x, 0.0, math.inf)
    return _out(2.0 / x * np.exp(-2.0 * x), s)


def gamma_zero(s: ArrayLike) -> ArrayLike:
    """Limit antiderivative ``gamma0(s) = (e^(2s) - 1)/2``."""
    x = np.asarray(s, dtype=float)
    _check_open("s", x, 0.0, math.inf, closed_lo=True)
    if np.any(2.0 * x > _MAX_EXP):
        raise KernelOverflowError("gamma_zero overflows for s > 354")
    return _out(0.5 * np.expm1(2.0 * x), s)


def greens_zero(s: ArrayLike, t: ArrayLike) -> ArrayLike:
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    _check_open("s", x, 0.0, math.inf)
    _check_open("t", y, 0.0, math.inf)
    return _out(np.asarray(gamma_zero(np.minimum(x, y))), np.asarray(s) + np.asarray(t))


def kernel_zero(s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Limit kernel ``(s t)^(-1/2) e^(-a) (e^(2a) - 1) e^(-b)`` with a = min, b = max."""
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    _check_open("s", x, 0.0, math.inf)
    _check_open("t", y, 0.0, math.inf)
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    out = -np.expm1(-2.0 * a) * np.exp(a - b) / np.sqrt(x * y)
    return _out(out, np.asarray(s) + np.asarray(t))


def stripped_kernel_eps(eps: Union[Epsilon, float], s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """``sqrt(s t) * kernel_eps(s, t)``, extended by continuity to s = 0 or t = 0."""
    e = as_eps(eps)
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    _check_open("s", x, 0.0, e.right_end, closed_lo=True)
    _check_open("t", y, 0.0, e.right_end, closed_lo=True)
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    la = np.asarray(log_ratio(e, a))
    lb = np.asarray(log_ratio(e, b))
    out = np.exp(0.5 * (lb - la)) * (-np.expm1(la))
    return _out(out, np.asarray(s) + np.asarray(t))


def stripped_kernel_zero(s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """``sqrt(s t) * kernel_zero(s, t)``, extended by continuity to the axes."""
    x, y = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    _check_open("s", x, 0.0, math.inf, closed_lo=True)
    _check_open("t", y, 0.0, math.inf, closed_lo=True)
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    return _out(-np.expm1(-2.0 * a) * np.exp(a - b), np.asarray(s) + np.asarray(t))
