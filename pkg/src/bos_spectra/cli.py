"""Command-line front end: spectra, sweeps, HS norms, audits and eigenpolynomials.

Every document written embeds the resolved configuration and the package
version. Exit codes::

    0  success
    1  computation error or failed assertion
    2  reliability shortfall (not enough resolution)
    3  configuration rejected
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .eigen import RootCountError, Tridiag, jacobi_eigen
from .routes import (
    LIMIT,
    ReliabilityError,
    TailControlError,
    compare_routes,
    minmax_mu,
    route_exact_limit,
    route_fourier,
    route_nystrom,
)

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "BOS_SPECTRA_OUTPUT_DIR"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SHORTFALL = 2
EXIT_CONFIG = 3

COMMANDS = ("spectrum", "converge", "hsnorm", "audit", "eigenpoly", "selftest")
FORMATS = ("csv", "json", "pretty")
SPECTRUM_ROUTES = ("nystrom", "fourier", "both", "exact_limit")
SWEEP_ROUTES = ("nystrom", "fourier")
DEFAULT_SWEEP = (0.2, 0.1, 0.05, 0.025)

SPECTRUM_COLUMNS = ("n", "lambda", "mu", "route", "reliable", "gap_to_n")
COMPARISON_COLUMNS = ("n", "lambda_fourier", "lambda_nystrom", "abs_gap", "rel_gap", "agree")
CONVERGE_COLUMNS = ("eps", "n", "route", "lambda", "gap", "mu", "mu_direct", "reliable", "error")
HSNORM_COLUMNS = ("quantity", "eps", "value", "reference", "tolerance", "passed")
AUDIT_COLUMNS = ("check", "eps", "margin", "threshold", "points", "passed")
EIGENPOLY_COLUMNS = ("n", "r", "coefficient")
SELFTEST_COLUMNS = ("check", "passed", "detail")

_SHORTFALL_ERRORS = (ReliabilityError, TailControlError, RootCountError)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


@dataclass
class RunConfig:
    command: str
    eps: tuple[float, ...] = ()
    limit: bool = False
    n_max: int = 5
    n: int = 3
    route: str = "nystrom"
    nodes: int = 320
    cutoff: Optional[float] = None
    max_trunc: int = 1 << 16
    tol: float = 1e-6
    hs_tol: float = 1e-5
    grid: int = 50
    with_hs: bool = True
    workers: int = 1
    format: str = "pretty"
    output: Optional[str] = None

    def validate(self) -> "RunConfig":
        """Check every field before any numerics run; raise :class:`ConfigError`."""
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"must be one of {', '.join(FORMATS)}")
        for e in self.eps:
            if not (isinstance(e, float) and math.isfinite(e) and 0.0 < e < 1.0):
                raise ConfigError("eps", f"each eps must lie in (0, 1), got {e!r}")
        _int_range("n_max", self.n_max, 1, 200)
        _int_range("n", self.n, 1, 200)
        _int_range("nodes", self.nodes, 64, 4000)
        _int_range("max_trunc", self.max_trunc, 64, 1 << 20)
        _int_range("grid", self.grid, 4, 400)
        _int_range("workers", self.workers, 1, 64)
        for name in ("tol", "hs_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 < v < 1.0):
                raise ConfigError(name, f"must lie in (0, 1), got {v!r}")
        if self.cutoff is not None and not (math.isfinite(self.cutoff) and 1.0 <= self.cutoff <= 200.0):
            raise ConfigError("cutoff", f"must lie in [1, 200], got {self.cutoff!r}")

        if self.command == "spectrum":
            if self.route not in SPECTRUM_ROUTES:
                raise ConfigError("route", f"must be one of {', '.join(SPECTRUM_ROUTES)}")
            if self.limit:
                if self.eps:
                    raise ConfigError("eps", "give either --eps or --limit, not both")
                if self.route not in ("nystrom", "exact_limit"):
                    raise ConfigError("route", "the limit operator supports nystrom or exact_limit")
            elif self.route != "exact_limit" and len(self.eps) != 1:
                raise ConfigError("eps", "spectrum needs exactly one eps (or --limit)")
            if self.route in ("nystrom", "both") and 4 * self.n_max > self.nodes:
                raise ConfigError("n_max", "n_max must not exceed nodes / 4")
        elif self.command == "converge":
            if self.route not in SWEEP_ROUTES:
                raise ConfigError("route", f"must be one of {', '.join(SWEEP_ROUTES)}")
            if not self.eps:
                self.eps = DEFAULT_SWEEP
            if any(b >= a for a, b in zip(self.eps[:-1], self.eps[1:])):
                raise ConfigError("eps", "eps list must be strictly decreasing")
            if 4 * self.n_max > self.nodes:
                raise ConfigError("n_max", "n_max must not exceed nodes / 4")
        elif self.command == "hsnorm":
            if not self.limit and not self.eps:
                raise ConfigError("eps", "hsnorm needs --limit or at least one eps")
        elif self.command == "audit":
            if not self.eps:
                raise ConfigError("eps", "audit needs at least one eps")
        return self

    def resolved(self) -> dict:
        d = asdict(self)
        d["eps"] = list(self.eps)
        return d


def _int_range(name: str, v: Any, lo: int, hi: int) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not lo <= v <= hi:
        raise ConfigError(name, f"must be an integer in [{lo}, {hi}], got {v!r}")


# ---------------------------------------------------------------- results ---


@dataclass
class Result:
    """What a command hands to the writer."""

    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    error: Optional[str] = None
    status: int = EXIT_OK
    text: list[str] = field(default_factory=list)  # extra lines for the pretty view


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(cfg: RunConfig, res: Result) -> str:
    buf = io.StringIO()
    buf.write(f"# bos_spectra {__version__} schema {SCHEMA_VERSION}\n")
    for k, v in cfg.resolved().items():
        buf.write(f"# config {k}={json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.columns)
    for row in res.rows:
        w.writerow([_fmt(row.get(c)) for c in res.columns])
    for k, v in res.summary.items():
        buf.write(f"# summary {k}={json.dumps(v)}\n")
    for k, ok in res.checks.items():
        buf.write(f"# check {k}={'PASS' if ok else 'FAIL'}\n")
    for note in res.notes:
        buf.write(f"# note {note}\n")
    if res.error:
        buf.write(f"# error {res.error}\n")
    return buf.getvalue()


def render_json(cfg: RunConfig, res: Result) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config": cfg.resolved(),
        "columns": list(res.columns),
        "rows": res.rows,
        "summary": res.summary,
        "checks": res.checks,
        "notes": res.notes,
        "error": res.error,
        "exit_status": res.status,
    }
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n"


def render_pretty(cfg: RunConfig, res: Result) -> str:
    out = [f"bos_spectra {__version__}: {cfg.command}"]
    out.extend(res.text)
    if res.rows:
        cells = [[_pretty_cell(r.get(c)) for c in res.columns] for r in res.rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(res.columns)]
        out.append("  ".join(c.rjust(w) for c, w in zip(res.columns, widths)))
        for row in cells:
            out.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    for k, v in res.summary.items():
        out.append(f"{k}: {_pretty_cell(v)}")
    for k, ok in res.checks.items():
        out.append(f"[{'PASS' if ok else 'FAIL'}] {k}")
    out.extend(f"note: {n}" for n in res.notes)
    if res.error:
        out.append(f"error: {res.error}")
    return "\n".join(out) + "\n"


def _pretty_cell(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return ", ".join(_pretty_cell(x) for x in v)
    return _fmt(v)


RENDERERS = {"csv": render_csv, "json": render_json, "pretty": render_pretty}
EXTENSIONS = {"csv": "csv", "json": "json", "pretty": "txt"}


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename it into place."""
    target = os.path.abspath(path)
    folder = os.path.dirname(target)
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def output_path(cfg: RunConfig) -> Optional[str]:
    if cfg.output:
        return cfg.output
    folder = os.environ.get(OUTPUT_DIR_ENV)
    if folder:
        return os.path.join(folder, f"{cfg.command}.{EXTENSIONS[cfg.format]}")
    return None


# --------------------------------------------------------------- commands ---


def cmd_spectrum(cfg: RunConfig) -> Result:
    if cfg.route == "both":
        return _spectrum_both(cfg)
    res = Result(SPECTRUM_COLUMNS)
    if cfg.route == "exact_limit":
        sp = route_exact_limit(cfg.n_max)
    elif cfg.route == "fourier":
        sp = route_fourier(cfg.eps[0], cfg.n_max, max_trunc=cfg.max_trunc)
    else:
        eps = LIMIT if cfg.limit else cfg.eps[0]
        sp = route_nystrom(eps, cfg.n_max, nodes=cfg.nodes, T=cfg.cutoff)
    mus = minmax_mu(sp)
    for k, (lam, mu) in enumerate(zip(sp.eigenvalues, mus), start=1):
        res.rows.append({
            "n": k, "lambda": lam, "mu": mu, "route": sp.route,
            "reliable": k <= sp.reliable_count, "gap_to_n": lam - k,
        })
    res.summary = {"reliable_count": sp.reliable_count, "discretization": sp.discretization}
    res.notes.extend(sp.notes)
    if len(sp) < cfg.n_max or sp.shortfall:
        res.status = EXIT_SHORTFALL
        res.notes.append(f"only {sp.reliable_count} of {cfg.n_max} eigenvalues are reliable")
    return res


def _spectrum_both(cfg: RunConfig) -> Result:
    res = Result(COMPARISON_COLUMNS)
    cmp = compare_routes(cfg.eps[0], cfg.n_max, nodes=cfg.nodes, max_trunc=cfg.max_trunc)
    for r in cmp.records:
        res.rows.append({
            "n": r.n, "lambda_fourier": r.lambda_fourier, "lambda_nystrom": r.lambda_nystrom,
            "abs_gap": r.abs_gap, "rel_gap": r.rel_gap, "agree": r.agree,
        })
    res.summary = {
        "agreement_count": cmp.agreement_count,
        "fourier": cmp.fourier.discretization,
        "nystrom": cmp.nystrom.discretization,
    }
    if cmp.fourier.shortfall or cmp.nystrom.shortfall:
        res.status = EXIT_SHORTFALL
        res.notes.append("a route flagged unreliable eigenvalues")
    elif cmp.mismatches:
        res.status = EXIT_ERROR
        res.notes.append(f"routes disagree at n = {cmp.mismatches}")
    return res


def cmd_converge(cfg: RunConfig) -> Result:
    from .lab import convergence_sweep

    rep = convergence_sweep(
        cfg.eps, cfg.n_max, route=cfg.route, nodes=cfg.nodes,
        with_hs=cfg.with_hs, hs_tol=cfg.hs_tol, workers=cfg.workers,
    )
    res = Result(CONVERGE_COLUMNS)
    for c in rep.table:
        res.rows.append({
            "eps": c.eps, "n": c.n, "route": c.route, "lambda": c.lam, "gap": c.gap,
            "mu": c.mu, "mu_direct": c.mu_direct, "reliable": c.reliable, "error": c.error,
        })
    res.summary = {
        "extrapolated": {str(k): v for k, v in rep.extrapolated.items()},
        "fitted_rates": {str(k): v for k, v in rep.fitted_rates.items()},
    }
    if rep.hs_curve:
        res.summary["hs_distance"] = {repr(h.eps): h.hs_distance for h in rep.hs_curve}
    res.checks = dict(rep.assertions)
    res.notes.extend(rep.notes)
    if not rep.passed:
        only_reliability = all(ok for k, ok in rep.assertions.items() if k != "all_cells_reliable")
        res.status = EXIT_SHORTFALL if only_reliability else EXIT_ERROR
    return res


def cmd_hsnorm(cfg: RunConfig) -> Result:
    from .lab import PI2_6, hs_distance, hs_dominating_integral, hs_norm_limit, hs_norm_eps, hs_weighted_limit

    res = Result(HSNORM_COLUMNS)
    if cfg.limit:
        v = hs_norm_limit(cfg.tol)
        res.rows.append({"quantity": "hs_norm_sq_limit", "eps": None, "value": v,
                         "reference": PI2_6, "tolerance": 1e-4, "passed": abs(v - PI2_6) <= 1e-4})
        w = hs_weighted_limit(cfg.tol)
        res.rows.append({"quantity": "weighted_integral", "eps": None, "value": w,
                         "reference": 5.0, "tolerance": None, "passed": w <= 5.0})
        d = hs_dominating_integral()
        res.rows.append({"quantity": "dominating_integral", "eps": None, "value": d,
                         "reference": 5.0, "tolerance": None, "passed": d <= 5.0})
    for e in cfg.eps:
        rep = hs_distance(e, cfg.hs_tol)
        res.rows.append({"quantity": "hs_distance", "eps": e, "value": rep.hs_distance,
                         "reference": None, "tolerance": rep.tolerance, "passed": rep.tolerance_met})
        res.rows.append({"quantity": "hs_distance_sq", "eps": e, "value": rep.hs_distance_sq,
                         "reference": None, "tolerance": rep.tolerance, "passed": rep.tolerance_met})
        res.rows.append({"quantity": "hs_norm_sq_eps", "eps": e, "value": hs_norm_eps(e, cfg.tol),
                         "reference": None, "tolerance": cfg.tol, "passed": True})
    if len(cfg.eps) > 1:
        d = [r["value"] for r in res.rows if r["quantity"] == "hs_distance"]
        order = np.argsort(cfg.eps)[::-1]
        d = [d[i] for i in order]
        res.checks["hs_decreasing"] = all(b < a for a, b in zip(d[:-1], d[1:]))
    res.checks.update({f"{r['quantity']}@{_fmt(r['eps']) or 'limit'}": r["passed"] for r in res.rows})
    if not all(res.checks.values()):
        res.status = EXIT_ERROR
    return res


def cmd_audit(cfg: RunConfig) -> Result:
    from .lab import domination_audit, difference_bound_audit

    res = Result(AUDIT_COLUMNS)
    for e in cfg.eps:
        m = difference_bound_audit(e, size=cfg.grid)
        pts = (cfg.grid + 1) * (cfg.grid + 2) // 2
        res.rows.append({"check": "difference_bound", "eps": e, "margin": m,
                         "threshold": 1e-12, "points": pts, "passed": m <= 1e-12})
        dom = domination_audit(e)
        res.rows.append({"check": "majorant_s_ge_half_log2", "eps": e, "margin": dom.margin_upper,
                         "threshold": 1e-10, "points": dom.points, "passed": dom.margin_upper <= 1e-10})
        res.rows.append({"check": "majorant_s_lt_half_log2", "eps": e, "margin": dom.margin_lower,
                         "threshold": 1e-10, "points": dom.points, "passed": dom.margin_lower <= 1e-10})
    res.checks = {f"{r['check']}@{r['eps']!r}": r["passed"] for r in res.rows}
    if not all(res.checks.values()):
        res.status = EXIT_ERROR
    return res


def cmd_eigenpoly(cfg: RunConfig) -> Result:
    from .limit import apply_L0, eigenpoly, gram, norm_squared, scale

    f = eigenpoly(cfg.n)
    res = Result(EIGENPOLY_COLUMNS)
    for r, c in enumerate(f.coeffs):
        if r:
            res.rows.append({"n": cfg.n, "r": r, "coefficient": str(c)})
    res.text.append(f"f_{cfg.n}(s) = {f}")
    res.summary = {"polynomial": str(f), "norm_squared": str(norm_squared(cfg.n))}
    res.checks[f"L0 f_{cfg.n} = {cfg.n} f_{cfg.n}"] = apply_L0(f.coeffs) == scale(f.coeffs, cfg.n)
    for m in range(1, cfg.n):
        res.checks[f"<f_{m}, f_{cfg.n}> = 0"] = gram(eigenpoly(m).coeffs, f.coeffs) == 0
    if not all(res.checks.values()):
        res.status = EXIT_ERROR
    return res


def _selftest_checks() -> list[tuple[str, Any]]:
    from .lab import PI2_6, convergence_sweep, domination_audit, hs_norm_limit, difference_bound_audit
    from .limit import apply_L0, eigenpoly, gram, scale
    from .quadrature import PanelScheme, composite_rule, gauss_legendre

    def gauss():
        r = gauss_legendre(2)
        err = abs(r.nodes[1] - 1 / math.sqrt(3))
        return err < 1e-15, f"node error {err:.1e}"

    def panels():
        r = composite_rule(PanelScheme.graded(0.0, 1.0, 4, 10, n_left=10))
        err = abs(r.integrate(np.sqrt) - 2.0 / 3.0)
        return err < 1e-10, f"int sqrt error {err:.1e}"

    def jacobi():
        rng = np.random.default_rng(7)
        a = rng.standard_normal((40, 40))
        a = a + a.T
        ev = jacobi_eigen(a).values
        err = abs(ev.sum() - np.trace(a)) + abs(np.sum(ev**2) - np.sum(a * a))
        return err < 1e-9, f"trace/Frobenius error {err:.1e}"

    def charpoly():
        e = 0.3
        t = Tridiag.a_plus(e, 2)
        from .eigen import tridiag_real_roots
        roots = tridiag_real_roots(t, [1.0, 2.0], (0.5, 10.0)).roots
        disc = math.sqrt(1 - 4 * e * e)
        want = ((3 - disc) / 2, (3 + disc) / 2)
        err = max(abs(a - b) for a, b in zip(roots, want))
        return err < 1e-12, f"2x2 root error {err:.1e}"

    def algebra():
        ok = all(apply_L0(eigenpoly(n).coeffs) == scale(eigenpoly(n).coeffs, n) for n in range(1, 13))
        ok &= all(gram(eigenpoly(m).coeffs, eigenpoly(n).coeffs) == 0 for n in range(2, 13) for m in range(1, n))
        return ok, "n <= 12 exact"

    def limit_spectrum():
        sp = route_nystrom(LIMIT, 4, nodes=200)
        err = max(abs(v - k) for k, v in enumerate(sp.eigenvalues, start=1))
        return err < 1e-6, f"max |lambda_n - n| = {err:.1e}"

    def routes():
        cmp = compare_routes(0.2, 3, nodes=160)
        worst = max(r.rel_gap if r.rel_gap is not None else math.inf for r in cmp.records)
        return cmp.agreement_count == 3, f"max rel gap {worst:.1e}"

    def hs():
        v = hs_norm_limit(1e-6)
        return abs(v - PI2_6) < 1e-4, f"HS^2 - pi^2/6 = {v - PI2_6:.1e}"

    def audits():
        m = difference_bound_audit(0.3, size=20)
        d = domination_audit(0.3, size=30)
        return m <= 1e-12 and d.passed(), f"margins {m:.1e}, {d.margin_upper:.1e}, {d.margin_lower:.1e}"

    def sweep():
        rep = convergence_sweep([0.1, 0.05], 3, route="fourier", nodes=160, with_hs=False)
        return rep.passed, f"extrapolated {[round(rep.extrapolated[k], 4) for k in (1, 2, 3)]}"

    return [
        ("gauss_legendre_m2", gauss),
        ("graded_panel_sqrt", panels),
        ("jacobi_invariants", jacobi),
        ("charpoly_2x2_roots", charpoly),
        ("eigenpoly_algebra", algebra),
        ("limit_spectrum", limit_spectrum),
        ("route_agreement", routes),
        ("hs_identity", hs),
        ("kernel_audits", audits),
        ("reduced_sweep", sweep),
    ]


def cmd_selftest(cfg: RunConfig) -> Result:
    res = Result(SELFTEST_COLUMNS)
    for name, fn in _selftest_checks():
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        res.rows.append({"check": name, "passed": bool(ok), "detail": detail})
        res.checks[name] = bool(ok)
    if not all(res.checks.values()):
        res.status = EXIT_ERROR
    return res


COMMAND_TABLE = {
    "spectrum": cmd_spectrum,
    "converge": cmd_converge,
    "hsnorm": cmd_hsnorm,
    "audit": cmd_audit,
    "eigenpoly": cmd_eigenpoly,
    "selftest": cmd_selftest,
}


def execute(cfg: RunConfig) -> Result:
    """Run a validated config; route failures become a result with an error field."""
    try:
        return COMMAND_TABLE[cfg.command](cfg)
    except _SHORTFALL_ERRORS as exc:
        return Result((), error=f"{type(exc).__name__}: {exc}", status=EXIT_SHORTFALL)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return Result((), error=f"{type(exc).__name__}: {exc}", status=EXIT_ERROR)


# ------------------------------------------------------------------- argv ---


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would collide with the shortfall code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


def _eps_values(raw: Optional[Sequence[str]]) -> tuple[float, ...]:
    if not raw:
        return ()
    vals = []
    for chunk in raw:
        for tok in chunk.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                vals.append(float(tok))
            except ValueError:
                raise ConfigError("eps", f"not a number: {tok!r}") from None
    return tuple(vals)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", default="pretty", help="csv, json or pretty")
    common.add_argument("--output", "-o", default=None,
                        help=f"output file (default: stdout, or ${OUTPUT_DIR_ENV}/<command>.<ext>)")

    p = _Parser(prog="bos-spectra", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", parents=[common], help="lowest eigenvalues by one or both routes")
    sp.add_argument("--eps", nargs="+")
    sp.add_argument("--limit", action="store_true", help="use the limit kernel")
    sp.add_argument("--n-max", type=int, default=5)
    sp.add_argument("--route", default="nystrom", help="nystrom, fourier, both or exact_limit")
    sp.add_argument("--nodes", type=int, default=320)
    sp.add_argument("--cutoff", type=float, default=None, help="Nystrom domain cutoff T")
    sp.add_argument("--max-trunc", type=int, default=1 << 16)

    cv = sub.add_parser("converge", parents=[common], help="eps -> 0 sweep with assertions")
    cv.add_argument("--eps", nargs="+", help="strictly decreasing list (default 0.2 0.1 0.05 0.025)")
    cv.add_argument("--n-max", type=int, default=5)
    cv.add_argument("--route", default="nystrom")
    cv.add_argument("--nodes", type=int, default=320)
    cv.add_argument("--hs-tol", type=float, default=1e-5)
    cv.add_argument("--no-hs", dest="with_hs", action="store_false")
    cv.add_argument("--workers", type=int, default=1)

    hs = sub.add_parser("hsnorm", parents=[common], help="Hilbert-Schmidt norms and distances")
    hs.add_argument("--limit", action="store_true")
    hs.add_argument("--eps", nargs="+")
    hs.add_argument("--tol", type=float, default=1e-6)
    hs.add_argument("--hs-tol", type=float, default=1e-5)

    au = sub.add_parser("audit", parents=[common], help="pointwise kernel bound audits")
    au.add_argument("--eps", nargs="+", required=True)
    au.add_argument("--grid", type=int, default=50)

    ep = sub.add_parser("eigenpoly", parents=[common], help="exact eigenpolynomial of the limit operator")
    ep.add_argument("--n", type=int, default=3)

    sub.add_parser("selftest", parents=[common], help="reduced-size checks, under a minute")
    return p


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    kw = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    kw["eps"] = _eps_values(getattr(ns, "eps", None))
    return RunConfig(**kw).validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"bos-spectra: config error in field '{exc.field}': {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    res = execute(cfg)
    text = RENDERERS[cfg.format](cfg, res)
    path = output_path(cfg)
    if path:
        atomic_write(path, text)
        print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    print(f"{cfg.command} finished in {time.perf_counter() - t0:.2f}s (exit {res.status})", file=sys.stderr)
    return res.status


if __name__ == "__main__":
    sys.exit(main())
