"""Convergence experiments: Hilbert-Schmidt norms and distances, bound audits,
and the eigenvalue sweep as eps decreases.

Double integrals over the quadrant use the rotated variables
``u = min(s, t)``, ``v = |t - s|``; by symmetry ``int int F = 2 int du int dv F(u, u + v)``.
The integrands decay exponentially in ``v`` but only like ``u^-2`` in ``u``,
so ``u`` gets geometric panels out to a cutoff ``T`` that grows until the
estimated tail ``2 T g(T)`` (``g`` the inner integral) is small enough.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .eigen import Spectrum
from .kernels import (
    Epsilon,
    as_eps,
    log_ratio,
    stripped_kernel_eps,
    stripped_kernel_zero,
)
from .quadrature import (
    PanelScheme,
    gauss_legendre,
    graded_unit_breakpoints,
    rule_from_breakpoints,
)
from .routes import minmax_mu, nystrom_mu_direct, route_fourier, route_nystrom

log = logging.getLogger(__name__)

HALF_LOG2 = 0.5 * math.log(2.0)
PI2_6 = math.pi**2 / 6.0


@dataclass(frozen=True)
class HsReport:
    """Squared HS distance ``||N_eps - M0^-1||_HS^2`` and its error budget."""

    eps: float
    hs_distance_sq: float
    truncation_T: float
    tail_estimate: float
    quad_estimate: float
    tolerance: float
    tolerance_met: bool

    @property
    def hs_distance(self) -> float:
        return math.sqrt(self.hs_distance_sq)

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "hs_distance": self.hs_distance,
            "hs_distance_sq": self.hs_distance_sq,
            "truncation_T": self.truncation_T,
            "tail_estimate": self.tail_estimate,
            "quad_estimate": self.quad_estimate,
            "tolerance": self.tolerance,
            "tolerance_met": self.tolerance_met,
        }


# ------------------------------------------------------------ integrands ---


def _k0_sq(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # K0(u, u+v)^2 = (1 - e^-2u)^2 e^-2v / (u (u + v))
    return np.expm1(-2.0 * u) ** 2 * np.exp(-2.0 * v) / (u * (u + v))


def _weighted_g0_sq(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # G0(s,t)^2 w0(s) w0(t) in log form; gamma0(u) = e^2u (1 - e^-2u) / 2
    lg = 2.0 * u + np.log(-np.expm1(-2.0 * u)) - math.log(2.0)
    b = u + v
    return np.exp(2.0 * lg + math.log(2.0) - np.log(u) - 2.0 * u + math.log(2.0) - np.log(b) - 2.0 * b)


def _diff_sq(e: Epsilon) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    # (K_eps - K0)^2 at (u, u+v), both inside (0, 1/eps)
    top = np.nextafter(e.right_end, 0.0)

    def f(u, v):
        b = np.minimum(u + v, top)
        d = stripped_kernel_eps(e, u, b) - stripped_kernel_zero(u, b)
        return d * d / (u * b)

    return f


# ------------------------------------------------------ rotated integrals ---


def _u_breakpoints(knots: Sequence[float], T: float, levels: int = 22) -> np.ndarray:
    """Geometric grading to 0 and to every interior knot, then doubling out to T."""
    bp = {0.0}
    bp.update(3.0 ** (-k) for k in range(0, levels + 1))
    for c in knots:
        for k in range(1, 14):
            for side in (-1, 1):
                x = c + side * c * 0.25 * 3.0 ** (-k)
                if x > 0:
                    bp.add(x)
        bp.add(c)
        bp.add(0.75 * c)
        bp.add(1.25 * c)
    x = 1.0
    while x < T:
        x = min(T, x * 1.5)
        bp.add(x)
    return np.array(sorted(b for b in bp if b <= T))


def _inner_b(u: np.ndarray, start: np.ndarray, f, m: int, vmax: float = 40.0) -> np.ndarray:
    """``int_{start}^{start + vmax} f(u, v) dv`` per u, graded at the lower limit."""
    bp = [0.0] + [1e-8 * 2.0**k for k in range(0, 60) if 1e-8 * 2.0**k < vmax] + [vmax]
    y, wy = rule_from_breakpoints(bp, m)
    v = start[:, None] + y[None, :]
    return np.sum(wy[None, :] * f(u[:, None], v), axis=1)


def _inner_a(u: np.ndarray, length: np.ndarray, f, m: int) -> np.ndarray:
    """``int_0^{length} f(u, v) dv`` per u, graded at both ends."""
    bp = graded_unit_breakpoints(14, 3.0, both_ends=True, bulk=8)
    x, wx = rule_from_breakpoints(bp, m)
    v = length[:, None] * x[None, :]
    return np.sum(length[:, None] * wx[None, :] * f(u[:, None], v), axis=1)


def _rotated(inner: Callable[[np.ndarray, int], np.ndarray], knots, T: float, m: int) -> tuple[float, float]:
    """``2 int_0^T inner(u) du`` and the tail estimate ``2 T inner(T)``."""
    bp = _u_breakpoints(knots, T)
    u, wu = rule_from_breakpoints(bp, m)
    total = 2.0 * float(np.sum(wu * inner(u, m)))
    tail = 2.0 * T * float(inner(np.array([T]), m)[0])
    return total, tail


def _integrate_quadrant(inner, knots, tol: float, T0: float, m0: int = 12) -> tuple[float, float, float, float]:
    """Raise T until the tail estimate is below ``tol/100``, then check an order bump.

    Returns ``(value, T, tail_estimate, quad_estimate)``.
    """
    T = T0
    for _ in range(40):
        _, tail = _rotated(inner, knots, T, 4)
        if tail <= 1e-2 * tol:
            break
        T *= 4.0
    else:
        raise RuntimeError("tail of the quadrant integral did not decay")
    m = m0
    prev, _ = _rotated(inner, knots, T, m)
    while True:
        cur, tail = _rotated(inner, knots, T, m + 6)
        quad = abs(cur - prev)
        if quad <= 1e-2 * tol or m + 6 >= 40:
            return cur, T, tail, quad
        m += 6
        prev = cur


# -------------------------------------------------------------- public ---


def hs_norm_limit(tol: float = 1e-6) -> float:
    """Squared HS norm of the limit inverse, ``int int K0^2`` over the quadrant."""
    return hs_norm_limit_report(tol).hs_distance_sq


def hs_norm_limit_report(tol: float = 1e-6) -> HsReport:
    val, T, tail, quad = _integrate_quadrant(
        lambda u, m: _inner_b(u, np.zeros_like(u), _k0_sq, m), [], tol, 100.0
    )
    return HsReport(0.0, val, T, tail, quad, tol, tail + quad < tol)


def hs_weighted_limit(tol: float = 1e-6) -> float:
    """``int int G0(s,t)^2 w0(s) w0(t) ds dt``; finite and below 5."""
    val, *_ = _integrate_quadrant(
        lambda u, m: _inner_b(u, np.zeros_like(u), _weighted_g0_sq, m), [], tol, 100.0
    )
    return val


def hs_dominating_integral() -> float:
    """``int_0^inf (1 - e^-2s)^2 s^-2 ds``, the integrable majorant bounded by 5."""
    bp = _u_breakpoints([], 1e7)
    s, w = rule_from_breakpoints(bp, 16)
    val = float(np.sum(w * np.expm1(-2.0 * s) ** 2 / s**2))
    return val + 1.0 / 1e7  # tail of s^-2 beyond the cutoff


def hs_norm_eps(eps, tol: float = 1e-6) -> float:
    """Squared HS norm of ``N_eps``."""
    e = as_eps(eps)
    R = e.right_end

    top = np.nextafter(R, 0.0)

    def f(u, v):
        k = stripped_kernel_eps(e, u, np.minimum(u + v, top))
        return k * k / (u * (u + v))

    def inner(u, m):
        out = np.zeros_like(u)
        ins = u < R
        out[ins] = _inner_a(u[ins], R - u[ins], f, m)
        return out

    val, *_ = _integrate_quadrant(inner, [R], tol, R)
    return val


def hs_distance(eps, tol: float = 1e-5) -> HsReport:
    """Squared HS distance between ``N_eps`` (kernel extended by 0) and the limit inverse.

    For ``u < 1/eps`` the inner v-integral splits at ``v = 1/eps - u``: the
    kernel difference below, the pure limit kernel above; for ``u >= 1/eps``
    only the limit kernel remains.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    e = as_eps(eps)
    R = e.right_end
    diff = _diff_sq(e)

    def inner(u, m):
        out = np.empty_like(u)
        ins = u < R
        ui = u[ins]
        length = R - ui
        out[ins] = _inner_a(ui, length, diff, m) + _inner_b(ui, length, _k0_sq, m)
        uo = u[~ins]
        out[~ins] = _inner_b(uo, np.zeros_like(uo), _k0_sq, m)
        return out

    # the inner integrals stay accurate far below the requested tol
    target = min(tol, 1e-8)
    val, T, tail, quad = _integrate_quadrant(inner, [R], target, max(100.0, 4 * R))
    return HsReport(e.value, val, T, tail, quad, tol, tail + quad < tol)


def difference_bound_audit(eps, grid: Optional[Sequence[tuple[float, float]]] = None, size: int = 50) -> float:
    """Signed worst margin of ``sqrt(st)(K_eps - K0) - e^(-s-t)`` over pairs s <= t.

    With no ``grid``, a log-spaced ``size x size`` grid on ``[1e-6, 0.99/eps]``
    plus the origin is used. A positive result means the bound is violated.
    """
    e = as_eps(eps)
    if grid is None:
        g = np.concatenate([[0.0], np.geomspace(1e-6, 0.99 * e.right_end, size)])
        S, T = np.meshgrid(g, g, indexing="ij")
        keep = S <= T
        s, t = S[keep], T[keep]
    else:
        pairs = np.asarray(grid, dtype=float).reshape(-1, 2)
        s, t = pairs[:, 0], pairs[:, 1]
        if np.any(s > t) or np.any(s < 0) or np.any(t >= e.right_end):
            raise ValueError("grid pairs must satisfy 0 <= s <= t < 1/eps")
    diff = np.asarray(stripped_kernel_eps(e, s, t)) - np.asarray(stripped_kernel_zero(s, t))
    return float(np.max(diff - np.exp(-s - t)))


@dataclass(frozen=True)
class DominationAudit:
    eps: float
    margin_upper: float  # s >= log(2)/2
    margin_lower: float  # s < log(2)/2
    points: int

    def passed(self, slack: float = 1e-10) -> bool:
        return self.margin_upper <= slack and self.margin_lower <= slack


def domination_audit(eps, size: int = 60, t_factor: float = 3.0) -> DominationAudit:
    """Check the two integrable majorants of ``st (K_eps~ - K0)^2`` on a grid.

    For ``s >= log(2)/2`` the majorant is ``e^-2s (e^2s - 1)^2 e^-2t``; below
    it is the larger of that and ``e^-2s ((1+s)/(1-s) - 1)^2 e^-2t``. The grid
    extends past ``1/eps``, where the extended kernel vanishes.
    """
    e = as_eps(eps)
    g = np.unique(np.concatenate([
        np.geomspace(1e-6, t_factor * e.right_end, size),
        np.linspace(1e-3, HALF_LOG2, size // 3),
    ]))
    S, T = np.meshgrid(g, g, indexing="ij")
    keep = S <= T
    s, t = S[keep], T[keep]
    k_eps = np.zeros_like(s)
    inside = t < e.right_end
    k_eps[inside] = stripped_kernel_eps(e, s[inside], t[inside])
    k0 = np.asarray(stripped_kernel_zero(s, t))
    lhs = (k_eps - k0) ** 2
    upper_bound = k0**2
    lower_bound = np.maximum(np.exp(-2 * s) * (2 * s / (1 - np.minimum(s, 0.999))) ** 2 * np.exp(-2 * t), k0**2)
    up = s >= HALF_LOG2
    mu = float(np.max(lhs[up] - upper_bound[up])) if np.any(up) else -math.inf
    ml = float(np.max(lhs[~up] - lower_bound[~up])) if np.any(~up) else -math.inf
    return DominationAudit(e.value, mu, ml, int(s.size))


# ----------------------------------------------------------------- sweep ---


@dataclass(frozen=True)
class SweepCell:
    eps: float
    n: int
    route: str
    lam: Optional[float]
    reliable: bool
    gap: Optional[float]
    mu: Optional[float]
    mu_direct: Optional[float]
    error: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "eps": self.eps, "n": self.n, "route": self.route, "lambda": self.lam,
            "reliable": self.reliable, "gap": self.gap, "mu": self.mu,
            "mu_direct": self.mu_direct, "error": self.error,
        }


@dataclass
class ConvergenceReport:
    epsilons: tuple[float, ...]
    n_max: int
    route: str
    table: list[SweepCell]
    hs_curve: list[HsReport] = field(default_factory=list)
    fitted_rates: dict[int, Optional[float]] = field(default_factory=dict)
    extrapolated: dict[int, Optional[float]] = field(default_factory=dict)
    assertions: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    hs_rate: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def cell(self, eps: float, n: int) -> SweepCell:
        for c in self.table:
            if c.eps == eps and c.n == n:
                return c
        raise KeyError((eps, n))

    def gaps(self, n: int) -> list[Optional[float]]:
        return [self.cell(e, n).gap for e in self.epsilons]

    def as_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "n_max": self.n_max,
            "route": self.route,
            "table": [c.as_dict() for c in self.table],
            "hs_curve": [h.as_dict() for h in self.hs_curve],
            "fitted_rates": {str(k): v for k, v in self.fitted_rates.items()},
            "extrapolated": {str(k): v for k, v in self.extrapolated.items()},
            "hs_rate": self.hs_rate,
            "assertions": dict(self.assertions),
            "passed": self.passed,
            "notes": list(self.notes),
        }


def richardson_zero(h: Sequence[float], values: Sequence[float]) -> float:
    """Neville extrapolation of the interpolating polynomial in ``h`` to ``h = 0``."""
    h = [float(x) for x in h]
    p = [float(v) for v in values]
    n = len(h)
    if n == 0:
        raise ValueError("no points to extrapolate")
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i])
    return p[0]


def _run_cell(e: float, n_max: int, route: str, nodes: int) -> tuple[Optional[Spectrum], Optional[np.ndarray], Optional[str]]:
    try:
        if route == "fourier":
            sp = route_fourier(e, n_max)
        else:
            sp = route_nystrom(e, n_max, nodes=nodes)
        mu_direct = nystrom_mu_direct(e, n_max, nodes=nodes)
        return sp, mu_direct, None
    except Exception as exc:  # recorded per cell, the sweep carries on
        log.warning("sweep cell eps=%g failed: %s", e, exc)
        return None, None, f"{type(exc).__name__}: {exc}"


def convergence_sweep(
    epsilons: Sequence[float],
    n_max: int = 5,
    route: str = "nystrom",
    nodes: int = 320,
    with_hs: bool = True,
    hs_tol: float = 1e-5,
    workers: int = 1,
) -> ConvergenceReport:
    """Eigenvalues ``lambda_{eps,n}`` for a decreasing list of eps and n <= n_max.

    Assertions recorded in the report:

    * ``gap_decreasing_n{k}``: ``|lambda - k|`` strictly decreases along the list;
    * ``richardson_n{k}``: extrapolation in ``eps^2`` lands within 1e-2 of k
      (skipped with a note for a single eps);
    * ``mu_crosscheck``: ``1 - 1/lambda`` matches the directly computed
      eigenvalues of the discretized ``I - N_eps`` to 1e-8;
    * ``hs_decreasing`` and ``perturbation_bound`` when HS distances are on.
    """
    eps_list = tuple(float(as_eps(e).value) for e in epsilons)
    if not eps_list:
        raise ValueError("empty eps list")
    if any(b >= a for a, b in zip(eps_list[:-1], eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    if route not in ("fourier", "nystrom"):
        raise ValueError(f"route must be 'fourier' or 'nystrom', got {route!r}")
    if n_max < 1:
        raise ValueError("n_max must be positive")

    def job(e):
        return _run_cell(e, n_max, route, nodes)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, eps_list))
    else:
        results = [job(e) for e in eps_list]

    report = ConvergenceReport(eps_list, n_max, route, [])
    mu_dev = 0.0
    for e, (sp, mu_direct, err) in zip(eps_list, results):
        for k in range(1, n_max + 1):
            if sp is None or k > len(sp):
                report.table.append(SweepCell(e, k, route, None, False, None, None, None, err or "missing"))
                continue
            lam = sp.eigenvalues[k - 1]
            mu = minmax_mu([lam])[0]
            md = float(mu_direct[k - 1])
            mu_dev = max(mu_dev, abs(mu - md))
            report.table.append(SweepCell(e, k, route, lam, k <= sp.reliable_count, abs(lam - k), mu, md))

    failed = [c for c in report.table if c.lam is None]
    report.assertions["all_cells_computed"] = not failed
    report.assertions["all_cells_reliable"] = all(c.reliable for c in report.table)
    report.assertions["mu_crosscheck"] = not failed and mu_dev < 1e-8
    report.notes.append(f"max |(1 - 1/lambda) - mu_direct| = {mu_dev:.3e}")

    for k in range(1, n_max + 1):
        gaps = report.gaps(k)
        ok = all(g is not None for g in gaps)
        report.assertions[f"gap_decreasing_n{k}"] = ok and all(b < a for a, b in zip(gaps[:-1], gaps[1:]))
        if ok and len(eps_list) >= 2 and all(g > 0 for g in gaps):
            slope = np.polyfit(np.log(eps_list), np.log(gaps), 1)[0]
            report.fitted_rates[k] = float(slope)
        else:
            report.fitted_rates[k] = None
        if ok and len(eps_list) >= 2:
            lams = [report.cell(e, k).lam for e in eps_list]
            x = richardson_zero([e * e for e in eps_list], lams)
            report.extrapolated[k] = x
            report.assertions[f"richardson_n{k}"] = abs(x - k) < 1e-2
        else:
            report.extrapolated[k] = None
    if len(eps_list) < 2:
        report.notes.append("single eps: extrapolation and rate fit skipped")
    signed = [c.lam - c.n for c in report.table if c.lam is not None]
    if signed:
        side = "above" if all(x > 0 for x in signed) else "below" if all(x < 0 for x in signed) else "both sides of"
        report.notes.append(f"lambda_(eps,n) lies {side} n in every computed cell")

    if with_hs:
        report.hs_curve = [hs_distance(e, hs_tol) for e in eps_list]
        d = [h.hs_distance_sq for h in report.hs_curve]
        report.assertions["hs_decreasing"] = all(b < a for a, b in zip(d[:-1], d[1:]))
        report.assertions["hs_tolerance_met"] = all(h.tolerance_met for h in report.hs_curve)
        if len(eps_list) >= 2 and all(x > 0 for x in d):
            # reported only; no rate is asserted
            report.hs_rate = float(np.polyfit(np.log(eps_list), 0.5 * np.log(d), 1)[0])
            report.notes.append(f"fitted HS distance rate: eps^{report.hs_rate:.3f}")
        ok = True
        for h in report.hs_curve:
            for k in range(1, n_max + 1):
                c = report.cell(h.eps, k)
                if c.lam is not None and c.gap > c.lam * k * h.hs_distance + 1e-8:
                    ok = False
        report.assertions["perturbation_bound"] = ok
    return report


# --------------------------------------------------------------- regimes ---


@dataclass(frozen=True)
class QuadraticRegime:
    eps: float
    n_range: tuple[int, int]
    ratios: tuple[float, ...]
    constant: float
    max_rel_dev: float
    pi2_over_beta2: float
    reliable: bool


def quadratic_regime(eps: float = 0.2, n_lo: int = 10, n_hi: int = 20, nodes: int = 400) -> QuadraticRegime:
    """Fit ``lambda_n ~ c n^2`` over ``n_lo..n_hi``.

    ``c`` minimizes the relative residuals, i.e. it is the mean of
    ``lambda_n / n^2``; ``c / eps`` estimates ``pi^2 / beta^2``.
    """
    sp = route_nystrom(eps, n_hi, nodes=nodes)
    n = np.arange(n_lo, n_hi + 1)
    lam = np.array(sp.eigenvalues[n_lo - 1 : n_hi])
    ratios = lam / n**2
    c = float(np.mean(ratios))
    dev = float(np.max(np.abs(ratios / c - 1.0)))
    return QuadraticRegime(
        float(eps), (n_lo, n_hi), tuple(float(r) for r in ratios), c, dev, c / float(eps),
        sp.reliable_count >= n_hi,
    )
