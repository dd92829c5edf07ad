"""Dense symmetric and tridiagonal eigenvalue engines.

* :func:`jacobi_eigen` - cyclic Jacobi rotations for symmetric matrices.
* :func:`charpoly_eval` / :func:`tridiag_real_roots` - scaled characteristic
  polynomial recurrence of a (possibly nonsymmetric) tridiagonal matrix with
  Newton/bisection root finding on the real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np

ROUTES = ("fourier", "nystrom", "exact_limit")


class JacobiConvergenceError(RuntimeError):
    pass


class RootCountError(RuntimeError):
    def __init__(self, found: int, requested: int, msg: str = ""):
        self.found = found
        self.requested = requested
        super().__init__(msg or f"found {found} real roots, {requested} requested")


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues produced by one route.

    ``reliable_count`` is the number of leading eigenvalues that passed the
    route's stability-under-refinement test.
    """

    eigenvalues: tuple[float, ...]
    route: str
    discretization: dict = field(default_factory=dict)
    reliable_count: int = 0
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        ev = tuple(float(v) for v in self.eigenvalues)
        if any(b < a for a, b in zip(ev[:-1], ev[1:])):
            raise ValueError("eigenvalues must be sorted ascending")
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        if not 0 <= self.reliable_count <= len(ev):
            raise ValueError("reliable_count out of range")
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def shortfall(self) -> bool:
        return self.reliable_count < len(self.eigenvalues)

    def as_dict(self) -> dict:
        return {
            "route": self.route,
            "eigenvalues": list(self.eigenvalues),
            "reliable_count": self.reliable_count,
            "discretization": dict(self.discretization),
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------- Jacobi ---


@numba.njit(cache=True, nogil=True)
def _jacobi_sweep(a, vt, want_vectors, strict):
    n = a.shape[0]
    rotations = 0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            app = a[p, p]
            aqq = a[q, q]
            g = 100.0 * abs(apq)
            if strict and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                a[p, q] = 0.0
                a[q, p] = 0.0
                continue
            theta = (aqq - app) / (2.0 * apq)
            t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
            if theta < 0.0:
                t = -t
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            for k in range(n):
                akp = a[p, k]
                akq = a[q, k]
                a[p, k] = c * akp - s * akq
                a[q, k] = s * akp + c * akq
            for k in range(n):
                a[k, p] = a[p, k]
                a[k, q] = a[q, k]
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
            if want_vectors:
                for k in range(n):
                    vkp = vt[p, k]
                    vkq = vt[q, k]
                    vt[p, k] = c * vkp - s * vkq
                    vt[q, k] = s * vkp + c * vkq
            rotations += 1
    return rotations


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray  # ascending
    vectors: Optional[np.ndarray]  # columns, matching ``values``
    sweeps: int
    off_norm: float


def _off_norm(a: np.ndarray) -> float:
    d = np.diag(a)
    return math.sqrt(max(float(np.sum(a * a) - np.sum(d * d)), 0.0))


def jacobi_eigen(
    matrix: np.ndarray, tol: float = 1e-12, vectors: bool = False, max_sweeps: int = 30
) -> EigenResult:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Sweeps continue until the off-diagonal Frobenius norm drops below ``tol``.
    The input is symmetrized as ``(A + A.T)/2`` and never modified.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("expected a non-empty square matrix")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    a = np.ascontiguousarray(0.5 * (a + a.T))
    n = a.shape[0]
    vt = np.eye(n) if vectors else np.zeros((1, 1))
    off = _off_norm(a)
    sweeps = 0
    while off > tol:
        if sweeps >= max_sweeps:
            raise JacobiConvergenceError(
                f"off-diagonal norm {off:.3e} above tol {tol:.1e} after {max_sweeps} sweeps"
            )
        # after a few sweeps, annihilate entries negligible against the diagonal
        rot = _jacobi_sweep(a, vt, vectors, sweeps >= 4)
        sweeps += 1
        off = _off_norm(a)
        if rot == 0:
            break
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    vecs = vt[order].T.copy() if vectors else None
    return EigenResult(vals[order], vecs, sweeps, off)


# ------------------------------------------------------------- Tridiagonal ---


@dataclass(frozen=True)
class Tridiag:
    """Tridiagonal matrix: row k is ``sub[k] v[k-1] + diag[k] v[k] + sup[k] v[k+1]``.

    ``sub[0]`` and ``sup[-1]`` multiply entries outside the matrix and are
    ignored.
    """

    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray

    def __post_init__(self) -> None:
        d = np.array(self.diag, dtype=float)
        lo = np.array(self.sub, dtype=float)
        up = np.array(self.sup, dtype=float)
        if not (d.shape == lo.shape == up.shape) or d.ndim != 1 or len(d) == 0:
            raise ValueError("diag, sub and sup must be 1-D of equal positive length")
        for arr in (d, lo, up):
            arr.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "sub", lo)
        object.__setattr__(self, "sup", up)

    def __len__(self) -> int:
        return len(self.diag)

    def coupling(self) -> np.ndarray:
        """Products ``sub[k] * sup[k-1]`` entering the determinant recurrence (0 at k=0)."""
        c = np.zeros(len(self))
        c[1:] = self.sub[1:] * self.sup[:-1]
        return c

    def dense(self) -> np.ndarray:
        n = len(self)
        m = np.diag(self.diag)
        if n > 1:
            m[np.arange(1, n), np.arange(n - 1)] = self.sub[1:]
            m[np.arange(n - 1), np.arange(1, n)] = self.sup[:-1]
        return m

    @classmethod
    def a_plus(cls, eps: float, n: int) -> "Tridiag":
        """Truncation of the Fourier-side operator to indices 1..n."""
        k = np.arange(1, n + 1, dtype=float)
        return cls(k, 0.5 * eps * k * (k - 1), -0.5 * eps * k * (k + 1))

    @classmethod
    def full_line(cls, eps: float, n: int) -> "Tridiag":
        """Truncation of the Fourier-side operator to indices -n..n."""
        k = np.arange(-n, n + 1, dtype=float)
        return cls(k, 0.5 * eps * k * (k - 1), -0.5 * eps * k * (k + 1))


@numba.njit(cache=True, nogil=True)
def _charpoly(d, c, lam):
    # p_k = (d_k - lam) p_{k-1} - c_k p_{k-2}, renormalized every step
    p_prev = 1.0
    p = d[0] - lam
    dp_prev = 0.0
    dp = -1.0
    logscale = 0.0
    for k in range(1, d.shape[0]):
        pn = (d[k] - lam) * p - c[k] * p_prev
        dpn = -p + (d[k] - lam) * dp - c[k] * dp_prev
        sc = max(abs(pn), abs(p), abs(dpn))
        if sc == 0.0:
            sc = 1.0
        p_prev = p / sc
        dp_prev = dp / sc
        p = pn / sc
        dp = dpn / sc
        logscale += math.log(sc)
    return p, dp, logscale


@numba.njit(cache=True, nogil=True)
def _charpoly_signs(d, c, lams):
    out = np.empty(lams.shape[0])
    for i in range(lams.shape[0]):
        p, _, _ = _charpoly(d, c, lams[i])
        out[i] = np.sign(p)
    return out


def charpoly_eval(t: Tridiag, lam: float) -> tuple[int, float, float]:
    """Evaluate ``det(T - lam I)`` as ``(sign, log|det|, d/dlam log|det|)``.

    The last entry is the scale-free ratio ``p'(lam) / p(lam)`` used by Newton.
    At an exact root the log-magnitude is ``-inf`` and the ratio ``inf``.
    """
    p, dp, lg = _charpoly(t.diag, t.coupling(), float(lam))
    if p == 0.0:
        return 0, -math.inf, math.inf
    return int(np.sign(p)), lg + math.log(abs(p)), dp / p


@dataclass(frozen=True)
class RootSearch:
    roots: tuple[float, ...]
    brackets: int
    escaped_seeds: tuple[float, ...]
    window: tuple[float, float]


def _polish(d, c, lo: float, hi: float, start: float, s_lo: float) -> float:
    x = start
    for _ in range(200):
        p, dp, _ = _charpoly(d, c, x)
        if p == 0.0:
            return x
        if np.sign(p) == s_lo:
            lo = x
        else:
            hi = x
        step = p / dp if dp != 0.0 else math.inf
        xn = x - step
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * max(1.0, abs(x)) or hi - lo <= 4e-16 * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def tridiag_real_roots(
    t: Tridiag,
    seeds: Sequence[float] = (),
    window: tuple[float, float] = (0.5, 100.0),
    count: Optional[int] = None,
    rel_step: float = 0.004,
    min_step: float = 0.01,
) -> RootSearch:
    """Locate real simple roots of ``det(T - lam I)`` inside ``window``.

    The window is scanned from the left on a grid (relative spacing
    ``rel_step``, absolute at least ``min_step``, seeds inserted as extra grid
    points) and every sign change is polished by safeguarded Newton starting
    from the seed inside the bracket if there is one. Scanning stops once
    ``count`` roots are found. Raises :class:`RootCountError` when fewer than
    ``count`` brackets exist in the window.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("window must be a finite interval")
    seeds = sorted(float(s) for s in seeds)
    d, c = t.diag, t.coupling()

    roots: list[float] = []
    n_brackets = 0
    x0 = lo
    s0 = np.sign(_charpoly(d, c, x0)[0])
    inner_seeds = [s for s in seeds if lo < s < hi]
    while x0 < hi and (count is None or len(roots) < count):
        # scan a block of grid points at once
        pts = [x0]
        x = x0
        for _ in range(256):
            x = min(hi, x + max(min_step, rel_step * abs(x)))
            pts.append(x)
            if x >= hi:
                break
        block_lo, block_hi = pts[0], pts[-1]
        pts.extend(s for s in inner_seeds if block_lo < s < block_hi)
        grid = np.array(sorted(pts))
        signs = _charpoly_signs(d, c, grid)
        signs[0] = s0
        for i in range(len(grid) - 1):
            a, b = grid[i], grid[i + 1]
            sa, sb = signs[i], signs[i + 1]
            if sb == 0.0:
                # exact root on a grid point
                roots.append(float(b))
                n_brackets += 1
                signs[i + 1] = -sa
                continue
            if sa != sb:
                n_brackets += 1
                inside = [s for s in inner_seeds if a < s < b]
                start = inside[0] if inside else 0.5 * (a + b)
                roots.append(_polish(d, c, a, b, start, sa))
                if count is not None and len(roots) >= count:
                    break
        x0 = block_hi
        s0 = signs[-1]

    merged: list[float] = []
    for r in sorted(roots):
        if merged and abs(r - merged[-1]) <= 1e-9 * max(1.0, abs(r)):
            continue
        merged.append(r)

    escaped = []
    for s in seeds:
        x = s
        for _ in range(50):
            p, dp, _ = _charpoly(d, c, x)
            if p == 0.0 or dp == 0.0:
                break
            x -= p / dp
            if not lo <= x <= hi:
                escaped.append(s)
                break

    if count is not None and len(merged) < count:
        raise RootCountError(len(merged), count, f"only {len(merged)} sign changes in {window}, {count} requested")
    return RootSearch(tuple(merged), n_brackets, tuple(escaped), (lo, hi))
