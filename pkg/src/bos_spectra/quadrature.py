"""Gauss-Legendre rules, composite panel rules and 2D integration helpers."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on an interval ``(a, b)``.

    Composite rules built by :func:`map_panels` also record their panel
    breakpoints and the number of points per panel; the Nystrom corrector
    needs that structure.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]
    breakpoints: Optional[np.ndarray] = None
    points_per_panel: Optional[int] = None

    def __post_init__(self) -> None:
        for name in ("nodes", "weights", "breakpoints"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in length")

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def panels(self):
        """Yield ``(a, b, slice)`` for each panel of a composite rule."""
        if self.breakpoints is None or self.points_per_panel is None:
            raise ValueError("rule carries no panel structure")
        m = self.points_per_panel
        for k, (a, b) in enumerate(zip(self.breakpoints[:-1], self.breakpoints[1:])):
            yield float(a), float(b), slice(k * m, (k + 1) * m)


@dataclass(frozen=True)
class PanelScheme:
    breakpoints: tuple[float, ...]
    points_per_panel: int
    geometric_ratio: float = 2.0

    def __post_init__(self) -> None:
        bp = tuple(float(b) for b in self.breakpoints)
        if len(bp) < 2:
            raise ValueError("a panel scheme needs at least one panel")
        if any(b1 <= b0 for b0, b1 in zip(bp[:-1], bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if self.points_per_panel < 1:
            raise ValueError("points_per_panel must be positive")
        if not self.geometric_ratio > 1.0:
            raise ValueError("geometric_ratio must exceed 1")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def n_panels(self) -> int:
        return len(self.breakpoints) - 1

    @classmethod
    def graded(
        cls,
        a: float,
        b: float,
        n_uniform: int,
        points_per_panel: int,
        n_left: int = 0,
        n_right: int = 0,
        geometric_ratio: float = 3.0,
        layer: Optional[float] = None,
    ) -> "PanelScheme":
        """Uniform panels on the bulk of ``(a, b)`` with geometric refinement at the ends.

        ``layer`` is the width of each graded end zone; the graded panels
        shrink by ``geometric_ratio`` towards the endpoint.
        """
        if not b > a:
            raise ValueError("empty interval")
        width = b - a
        if layer is None:
            layer = min(1.0, width / 4.0)
        lo = a + layer if n_left else a
        hi = b - layer if n_right else b
        left = [a + layer * geometric_ratio ** (-k) for k in range(n_left, 0, -1)]
        right = [b - layer * geometric_ratio ** (-k) for k in range(1, n_right + 1)]
        bulk = list(np.linspace(lo, hi, n_uniform + 1)) if n_uniform > 0 else [lo, hi]
        bp = [a] + left + bulk + right + ([b] if n_right else [])
        bp = sorted(set(bp))
        return cls(tuple(bp), points_per_panel, geometric_ratio)

    @classmethod
    def geometric(
        cls, a: float, b: float, first: float, points_per_panel: int, ratio: float = 2.0
    ) -> "PanelScheme":
        """Panels whose widths grow by ``ratio`` from ``first`` at ``a`` up to ``b``."""
        bp = [a]
        w = first
        while bp[-1] + w < b:
            bp.append(bp[-1] + w)
            w *= ratio
        bp.append(b)
        if len(bp) > 2 and (bp[-1] - bp[-2]) < 0.5 * (bp[-2] - bp[-3]):
            del bp[-2]
        return cls(tuple(bp), points_per_panel, ratio)


def _legendre_and_derivative(m: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, m + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # derivative from P_m and P_{m-1}
    dp = m * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@functools.lru_cache(maxsize=64)
def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on (-1, 1).

    Nodes are Newton-refined roots of ``P_m`` evaluated by the three-term
    recurrence, starting from the asymptotic guesses
    ``cos(pi (i - 1/4) / (m + 1/2))``.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 4096:
        raise ValueError(f"m must be an integer in [1, 4096], got {m!r}")
    m = int(m)
    if m == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]), (-1.0, 1.0))
    i = np.arange(1, m // 2 + 1)
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise QuadratureError(f"Newton iteration for Legendre roots did not converge (m={m})")
    _, dp = _legendre_and_derivative(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # x is decreasing and positive; mirror to the full symmetric set
    if m % 2:
        _, dp0 = _legendre_and_derivative(m, np.array([0.0]))
        w0 = 2.0 / dp0**2
        nodes = np.concatenate([-x, [0.0], x[::-1]])
        weights = np.concatenate([w, w0, w[::-1]])
    else:
        nodes = np.concatenate([-x, x[::-1]])
        weights = np.concatenate([w, w[::-1]])
    return QuadratureRule(nodes, weights, (-1.0, 1.0))


def map_panels(rule: QuadratureRule, scheme: PanelScheme) -> QuadratureRule:
    """Affinely map a reference rule on (-1, 1) onto every panel of ``scheme``."""
    if len(rule) != scheme.points_per_panel:
        rule = gauss_legendre(scheme.points_per_panel)
    bp = np.asarray(scheme.breakpoints)
    a, b = bp[:-1, None], bp[1:, None]
    half = 0.5 * (b - a)
    nodes = (half * rule.nodes[None, :] + 0.5 * (a + b)).ravel()
    weights = (half * rule.weights[None, :]).ravel()
    return QuadratureRule(
        nodes, weights, (float(bp[0]), float(bp[-1])), bp, scheme.points_per_panel
    )


def composite_rule(scheme: PanelScheme) -> QuadratureRule:
    return map_panels(gauss_legendre(scheme.points_per_panel), scheme)


def integrate_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], rule: QuadratureRule) -> float:
    """Tensor-product integral of a symmetric ``f`` over ``interval**2``.

    Only the strict upper triangle and the diagonal are evaluated.
    """
    x, w = rule.nodes, rule.weights
    iu, ju = np.triu_indices(len(x), k=1)
    upper = np.sum(w[iu] * w[ju] * f(x[iu], x[ju]))
    diag = np.sum(w * w * f(x, x))
    return float(2.0 * upper + diag)


def lagrange_basis(nodes: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Values of the Lagrange basis polynomials on ``nodes`` at points ``y``.

    Returns an array of shape ``(len(nodes),) + y.shape`` computed with the
    barycentric formula; exact at the nodes.
    """
    nodes = np.asarray(nodes, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / np.prod(diff, axis=1)
    d = y[None, ...] - nodes.reshape((-1,) + (1,) * y.ndim)
    # points within rounding of a node take the node's value; closer ones overflow
    scale = max(1.0, float(np.max(np.abs(nodes))))
    hit = np.abs(d) <= 1e-15 * scale
    d = np.where(hit, 1.0, d)
    terms = bw.reshape((-1,) + (1,) * y.ndim) / d
    out = terms / np.sum(terms, axis=0)
    any_hit = np.any(hit, axis=0)
    if np.any(any_hit):
        out = np.where(any_hit[None, ...], hit.astype(float), out)
    return out


def graded_unit_breakpoints(levels: int, ratio: float, both_ends: bool, bulk: int) -> np.ndarray:
    """Breakpoints on [0, 1] refined geometrically towards 0 (and optionally 1)."""
    edge = 0.25 if both_ends else 0.5
    left = [edge * ratio ** (-k) for k in range(levels, 0, -1)]
    hi = 1.0 - edge if both_ends else 1.0
    mid = list(np.linspace(edge, hi, bulk + 1))
    right = [1.0 - edge * ratio ** (-k) for k in range(1, levels + 1)] if both_ends else []
    return np.array([0.0] + left + mid + right + ([1.0] if both_ends else []))


def rule_from_breakpoints(breakpoints: Sequence[float], m: int) -> tuple[np.ndarray, np.ndarray]:
    """Plain (nodes, weights) arrays of the composite m-point rule on ``breakpoints``."""
    bp = np.asarray(breakpoints, dtype=float)
    ref = gauss_legendre(m)
    half = 0.5 * (bp[1:] - bp[:-1])[:, None]
    mid = 0.5 * (bp[1:] + bp[:-1])[:, None]
    return (half * ref.nodes + mid).ravel(), (half * ref.weights).ravel()
