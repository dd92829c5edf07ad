"""The three eigenvalue routes and their cross-validation.

fourier
    Real roots of truncations of the tridiagonal Fourier-side operator.
nystrom
    Eigenvalues ``mu`` of the symmetric Nystrom matrix of the inverse
    operator's kernel; ``lambda = 1/mu``.
exact_limit
    The integers ``1..n``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .eigen import RootCountError, Spectrum, Tridiag, jacobi_eigen, tridiag_real_roots
from .kernels import Epsilon, as_eps, kernel_eps, kernel_zero
from .quadrature import PanelScheme, QuadratureRule, composite_rule, gauss_legendre, lagrange_basis

log = logging.getLogger(__name__)

RELIABLE_RTOL = 1e-6
AGREE_RTOL = 1e-4
LIMIT = "limit"

EpsLike = Union[Epsilon, float, str, None]


class ReliabilityError(RuntimeError):
    pass


class TailControlError(RuntimeError):
    pass


def _is_limit(eps: EpsLike) -> bool:
    return eps is None or (isinstance(eps, str) and eps == LIMIT)


# ---------------------------------------------------------------- Nystrom ---


def nystrom_rule(length: float, nodes: int, m: int = 10, grade_right: bool = False) -> QuadratureRule:
    """Composite Gauss rule on ``(0, length)`` with about ``nodes`` points.

    Panels are geometrically graded towards 0 (eigenfunctions behave like
    ``sqrt(s)`` there) and, when ``grade_right`` is set, towards the right
    endpoint where the epsilon kernels vanish like a fractional power.
    """
    n_pan = max(4, int(round(nodes / m)))
    n_left = min(8, n_pan // 4)
    n_right = min(6, n_pan // 5) if grade_right else 0
    n_uniform = max(1, n_pan - n_left - n_right)
    layer = min(1.0, length / 8.0)
    scheme = PanelScheme.graded(
        0.0, length, n_uniform, m, n_left=n_left, n_right=n_right,
        geometric_ratio=3.0, layer=layer,
    )
    return composite_rule(scheme)


def nystrom_matrix(kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], rule: QuadratureRule) -> np.ndarray:
    """Symmetric Nystrom matrix ``B_ij = sqrt(w_i w_j) K(x_i, x_j)``.

    The kernels here are ``phi(min) psi(max)`` with a derivative jump on the
    diagonal, which limits plain Nystrom to second order. On every diagonal
    panel block the entries are replaced by the exact projections
    ``(w_i w_j)^(-1/2) * int int K(s, t) L_i(s) L_j(t)`` onto the panel's
    Lagrange basis, integrated separately on the two triangles ``s < t`` and
    ``s > t`` where the kernel is smooth. Off-diagonal blocks are untouched
    (the kernel is smooth there), and the result stays symmetric.
    """
    x, w = rule.nodes, rule.weights
    sw = np.sqrt(w)
    b = sw[:, None] * kernel(x[:, None], x[None, :]) * sw[None, :]
    m = rule.points_per_panel
    q = m + 8
    ref = gauss_legendre(q)
    for lo, hi, sl in rule.panels():
        xs = x[sl]
        half = 0.5 * (hi - lo)
        tk = half * ref.nodes + 0.5 * (hi + lo)  # outer variable
        wk = half * ref.weights
        hk = 0.5 * (tk - lo)  # inner variable on (lo, t_k)
        sk = hk[:, None] * ref.nodes[None, :] + 0.5 * (tk + lo)[:, None]
        wsk = hk[:, None] * ref.weights[None, :]
        kv = kernel(sk, np.broadcast_to(tk[:, None], sk.shape))
        ls = lagrange_basis(xs, sk)
        lt = lagrange_basis(xs, tk)
        g = np.einsum("k,kl,kl,ikl,jk->ij", wk, wsk, kv, ls, lt)
        g = g + g.T
        b[sl, sl] = g / np.sqrt(np.outer(w[sl], w[sl]))
    return 0.5 * (b + b.T)


@dataclass
class NystromDiscretization:
    eps: Optional[Epsilon]  # None for the limit kernel
    rule: QuadratureRule
    matrix: np.ndarray
    truncated: bool = False

    @property
    def size(self) -> int:
        return len(self.rule)


def nystrom_discretization(eps: EpsLike, nodes: int = 320, T: Optional[float] = None, m: int = 10) -> NystromDiscretization:
    """Discretize ``N_eps`` (or the limit inverse when ``eps`` is None/'limit')."""
    if nodes < 8:
        raise ValueError("nodes must be at least 8")
    if _is_limit(eps):
        length = 40.0 if T is None else float(T)
        rule = nystrom_rule(length, nodes, m)
        return NystromDiscretization(None, rule, nystrom_matrix(kernel_zero, rule), truncated=True)
    e = as_eps(eps)
    full = e.right_end
    length = min(full, 60.0) if T is None else min(full, float(T))
    truncated = length < full
    rule = nystrom_rule(length, nodes, m, grade_right=not truncated)
    mat = nystrom_matrix(lambda s, t: kernel_eps(e, s, t), rule)
    return NystromDiscretization(e, rule, mat, truncated)


def _leading_reciprocals(mus: np.ndarray, n_wanted: int, norm: float) -> np.ndarray:
    top = mus[::-1][:n_wanted]
    if len(top) < n_wanted:
        raise ReliabilityError(f"matrix has only {len(top)} eigenvalues, {n_wanted} requested")
    if np.any(top <= 1e-10 * norm):
        raise ReliabilityError("non-positive Nystrom eigenvalue inside the requested block")
    return 1.0 / top


def _stable_prefix(a: Sequence[float], b: Sequence[float], rtol: float) -> int:
    k = 0
    for x, y in zip(a, b):
        if abs(x - y) / abs(x) >= rtol:
            break
        k += 1
    return k


def route_nystrom(
    eps: EpsLike,
    n_wanted: int,
    nodes: int = 320,
    T: Optional[float] = None,
    m: int = 10,
    tail_tol: float = 1e-8,
    check: bool = True,
) -> Spectrum:
    """Lowest ``n_wanted`` eigenvalues via the Nystrom matrix of the inverse.

    Reliability compares against a discretization with half the nodes: an
    eigenvalue is reliable when the two agree to ``RELIABLE_RTOL``. On a
    truncated domain the eigenvector mass on the last tenth of the interval
    must stay below ``tail_tol``, otherwise :class:`TailControlError`.
    """
    if nodes < 64:
        raise ValueError("nodes must be at least 64")
    disc = nystrom_discretization(eps, nodes, T, m)
    norm = float(np.linalg.norm(disc.matrix))
    res = jacobi_eigen(disc.matrix, vectors=disc.truncated)
    lam = _leading_reciprocals(res.values, n_wanted, norm)
    notes = []
    tail = 0.0
    if disc.truncated:
        x = disc.rule.nodes
        far = x > 0.9 * disc.rule.interval[1]
        vecs = res.vectors[:, ::-1][:, :n_wanted]
        tail = float(np.max(np.sum(vecs[far] ** 2, axis=0)))
        if tail > tail_tol:
            raise TailControlError(
                f"eigenvector mass {tail:.2e} near the truncation point T={disc.rule.interval[1]:g}"
            )
    reliable = n_wanted
    if check:
        coarse = nystrom_discretization(eps, nodes // 2, T, m)
        res_c = jacobi_eigen(coarse.matrix)
        try:
            lam_c = _leading_reciprocals(res_c.values, n_wanted, norm)
            reliable = _stable_prefix(lam_c, lam, RELIABLE_RTOL)
        except ReliabilityError as exc:
            notes.append(f"coarse check failed: {exc}")
            reliable = 0
    return Spectrum(
        tuple(np.sort(lam)),
        "nystrom",
        {
            "eps": "limit" if disc.eps is None else disc.eps.value,
            "nodes": disc.size,
            "points_per_panel": m,
            "domain_cutoff": disc.rule.interval[1],
            "truncated": disc.truncated,
            "tail_mass": tail,
            "jacobi_sweeps": res.sweeps,
        },
        reliable,
        tuple(notes),
    )


def nystrom_mu_direct(eps: EpsLike, n_wanted: int, nodes: int = 320, T: Optional[float] = None, m: int = 10) -> np.ndarray:
    """Smallest eigenvalues of the discretized ``I - N_eps``, computed directly."""
    disc = nystrom_discretization(eps, nodes, T, m)
    eye_minus = np.eye(disc.size) - disc.matrix
    return jacobi_eigen(eye_minus).values[:n_wanted]


# ---------------------------------------------------------------- Fourier ---


def _fourier_roots(eps: float, trunc: int, count: int, seeds: Sequence[float], hi: float) -> tuple[float, ...]:
    t = Tridiag.a_plus(eps, trunc)
    try:
        return tridiag_real_roots(t, seeds, (0.5, hi), count=count).roots
    except RootCountError as exc:
        log.debug("trunc=%d: %s", trunc, exc)
        return tridiag_real_roots(t, seeds, (0.5, hi)).roots


def route_fourier(
    eps: Union[Epsilon, float],
    n_wanted: int,
    trunc: Optional[int] = None,
    seeds: Optional[Sequence[float]] = None,
    max_trunc: int = 1 << 16,
    rtol: float = RELIABLE_RTOL,
) -> Spectrum:
    """Lowest ``n_wanted`` real eigenvalues of truncations of the Fourier-side operator.

    Roots at truncation N and 2N are compared; N doubles until the first
    ``n_wanted`` agree to ``rtol`` or ``max_trunc`` is reached. The finer
    roots are returned.
    """
    e = as_eps(eps).value
    if n_wanted < 1:
        raise ValueError("n_wanted must be positive")
    n = max(4 * n_wanted, 32) if trunc is None else int(trunc)
    if n < 4 * n_wanted:
        raise ValueError("trunc must be at least 4 * n_wanted")
    if seeds is None:
        seeds = [float(k) for k in range(1, n_wanted + 1)]
    seeds = sorted(seeds)
    hi = n_wanted + 0.5 + 3.0 * e * n_wanted**2 + max(seeds) * 1.5
    coarse = _fourier_roots(e, n, n_wanted, seeds, hi)
    notes = []
    while True:
        fine = _fourier_roots(e, 2 * n, n_wanted, seeds, hi)
        reliable = _stable_prefix(coarse, fine, rtol) if len(coarse) else 0
        reliable = min(reliable, n_wanted, len(fine))
        if reliable >= n_wanted or 4 * n > max_trunc:
            break
        n *= 2
        coarse = fine
    if len(fine) < n_wanted:
        notes.append(f"only {len(fine)} real roots found below {hi:g}")
    return Spectrum(
        tuple(fine[:n_wanted]),
        "fourier",
        {"eps": e, "trunc": 2 * n, "trunc_check": n},
        reliable,
        tuple(notes),
    )


# ------------------------------------------------------------ exact limit ---


def route_exact_limit(n_wanted: int) -> Spectrum:
    if n_wanted < 1:
        raise ValueError("n_wanted must be positive")
    return Spectrum(tuple(float(k) for k in range(1, n_wanted + 1)), "exact_limit", {}, n_wanted)


# ------------------------------------------------------------------ utils ---


def minmax_mu(sp: Union[Spectrum, Sequence[float]]) -> list[float]:
    """Variational levels ``mu_n = 1 - 1/lambda_n`` of ``I - N_eps``."""
    lam = sp.eigenvalues if isinstance(sp, Spectrum) else tuple(sp)
    bad = [v for v in lam if v < 1.0 - 1e-9]
    if bad:
        raise ValueError(f"eigenvalues below 1 are not admissible: {bad}")
    return [max(0.0, 1.0 - 1.0 / v) for v in lam]


@dataclass(frozen=True)
class ComparisonRecord:
    n: int
    lambda_fourier: float
    lambda_nystrom: float
    abs_gap: float
    rel_gap: Optional[float]  # None unless both routes flag index n reliable

    @property
    def agree(self) -> bool:
        return self.rel_gap is not None and self.rel_gap < AGREE_RTOL


@dataclass(frozen=True)
class RouteComparison:
    eps: float
    records: tuple[ComparisonRecord, ...]
    fourier: Spectrum
    nystrom: Spectrum

    @property
    def agreement_count(self) -> int:
        return sum(r.agree for r in self.records)

    @property
    def mismatches(self) -> list[int]:
        return [r.n for r in self.records if not r.agree]


def compare_routes(
    eps: Union[Epsilon, float], n_wanted: int, nodes: int = 320, max_trunc: int = 1 << 16
) -> RouteComparison:
    """Run both epsilon routes, seed the Fourier search with the Nystrom values, compare."""
    e = as_eps(eps)
    ny = route_nystrom(e, n_wanted, nodes=nodes)
    fo = route_fourier(e, n_wanted, seeds=ny.eigenvalues, max_trunc=max_trunc)
    if len(fo) != len(ny):
        raise RootCountError(len(fo), len(ny), "Fourier and Nystrom routes returned different counts")
    recs = []
    for k, (lf, ln) in enumerate(zip(fo.eigenvalues, ny.eigenvalues), start=1):
        both = k <= fo.reliable_count and k <= ny.reliable_count
        gap = abs(lf - ln)
        recs.append(ComparisonRecord(k, lf, ln, gap, gap / abs(ln) if both else None))
    return RouteComparison(e.value, tuple(recs), fo, ny)
