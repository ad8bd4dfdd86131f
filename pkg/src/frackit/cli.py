"""Command-line front end.  Every subcommand writes CSV with a header row.

Exit status: 0 on success, 1 on a numerical failure (reported as
``frackit: <module>: <category>: <message>``), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import os
import sys
import tempfile
from typing import Sequence

import numpy as np

from .errors import FrackitError
from .expr import FuncSpec
from .fde import FdeProblem, solve
from .gronwall import GronwallQuery, comparison_bound, ml_bound, series_bound
from .mesh import Domain, build_grid
from .operators import OrderParams, caputo_deriv, frac_integral, ibp_sides, rl_deriv
from .specfun import ML_ALPHA_MAX, mittag_leffler

__all__ = ["build_parser", "main", "run"]

# modules are reported under their public names
_MODULE_NAMES = {"expr": "exprlang", "quadrature": "operators"}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


# {{{ parser


def _common(p: argparse.ArgumentParser, *, order: bool = True, interval: bool = True) -> None:
    if order:
        p.add_argument("--alpha", type=float, required=True, help="fractional order")
        p.add_argument("--rho", type=float, default=1.0, help="Katugampola parameter (default 1)")
    if interval:
        p.add_argument("--a", type=float, required=True, help="left endpoint (> 0)")
        p.add_argument("--b", type=float, required=True, help="right endpoint")
    p.add_argument("--out", help="output file (default: standard output)")


def _sweep_flags(p: argparse.ArgumentParser, name: str = "t") -> None:
    p.add_argument(f"--{name}", type=float, help=f"single evaluation point")
    p.add_argument(f"--{name}-from", type=float)
    p.add_argument(f"--{name}-to", type=float)
    p.add_argument(f"--{name}-steps", type=int, help="number of intervals in the sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frackit", description="Katugampola fractional calculus toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, hlp in (("integral", "fractional integral"), ("deriv", "fractional derivative")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--expr", required=True, help="function of t")
        p.add_argument("--side", choices=("left", "right"), default="left")
        p.add_argument("--n-grid", type=int, default=1024)
        _sweep_flags(p)
        if name == "deriv":
            p.add_argument("--kind", choices=("caputo", "rl"), default="caputo")

    p = sub.add_parser("ml", help="Mittag-Leffler function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out")
    _sweep_flags(p, "z")

    p = sub.add_parser("solve", help="solve CD^{alpha,rho} x = f(t, x)")
    _common(p)
    p.add_argument("--f", required=True, help="right-hand side f(t, x)")
    p.add_argument("--init", type=float, nargs="+", required=True, help="x_(k)(a), k < n")
    p.add_argument("--n-grid", type=int, default=1024)

    p = sub.add_parser("gronwall", help="Gronwall bound for u <= v + g Gamma(alpha) I u")
    _common(p)
    p.add_argument("--v", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--u", help="optional u to tabulate next to the bound")
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--form", choices=("series", "ml"), default="series")
    p.add_argument("--n-grid", type=int, default=256)
    p.add_argument("--eps-series", type=float, default=1e-12)
    p.add_argument("--k-max", type=int, default=200)

    p = sub.add_parser("compare", help="certify |x - y| for two perturbed problems")
    _common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--f-pert", required=True, help="perturbed right-hand side")
    p.add_argument("--init", type=float, nargs="+", required=True)
    p.add_argument("--init-pert", type=float, nargs="+", required=True)
    p.add_argument("--lipschitz", type=float, required=True, help="Lipschitz constant of f in x")
    p.add_argument("--psi", default="0", help="bound on |f - f_pert| as a function of t")
    p.add_argument("--n-grid", type=int, default=256)

    p = sub.add_parser("ibp-check", help="integration-by-parts residual")
    _common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--n-grid", type=int, nargs="+", default=[1024])
    return parser


# }}}


# {{{ validation


def _need(cond: bool, flag: str, msg: str) -> None:
    if not cond:
        raise UsageError(f"argument {flag}: {msg}")


def _domain(ns) -> Domain:
    _need(math.isfinite(ns.a) and ns.a > 0, "--a", "must be positive")
    _need(math.isfinite(ns.b) and ns.b > ns.a, "--b", "must exceed --a")
    return Domain(ns.a, ns.b)


def _order(ns, side: str = "left", integer_ok: bool = False) -> tuple[float, float]:
    _need(math.isfinite(ns.alpha) and ns.alpha > 0, "--alpha", "must be positive")
    if not integer_ok:
        _need(ns.alpha != math.floor(ns.alpha), "--alpha", "must not be an integer")
    _need(math.isfinite(ns.rho) and ns.rho > 0, "--rho", "must be positive")
    return ns.alpha, ns.rho


def _n_grid(value: int, flag: str = "--n-grid") -> int:
    _need(value >= 4, flag, "must be at least 4")
    return value


def _expr(text: str, flag: str, allowed: set[str]) -> FuncSpec:
    try:
        f = FuncSpec.from_expr(text)
    except FrackitError as exc:
        raise UsageError(f"argument {flag}: {exc}") from None
    extra = f.variables - allowed
    _need(not extra, flag, f"unexpected variable(s) {', '.join(sorted(extra))}")
    return f


def _points(ns, name: str, lo: float | None = None, hi: float | None = None) -> list[float]:
    single = getattr(ns, name)
    start, stop = getattr(ns, f"{name}_from"), getattr(ns, f"{name}_to")
    steps = getattr(ns, f"{name}_steps")
    sweep = (start, stop, steps)
    if single is not None:
        _need(all(v is None for v in sweep), f"--{name}", f"cannot be combined with a --{name}-from sweep")
        pts = [single]
    else:
        _need(all(v is not None for v in sweep), f"--{name}",
              f"give --{name} or all of --{name}-from/--{name}-to/--{name}-steps")
        _need(steps >= 1, f"--{name}-steps", "must be at least 1")
        _need(stop >= start, f"--{name}-to", f"must not be below --{name}-from")
        i = np.arange(steps + 1) / steps
        pts = list(start * (1 - i) + stop * i)
        pts[-1] = stop
    for v in pts:
        _need(math.isfinite(v), f"--{name}", "must be finite")
        if lo is not None:
            _need(lo <= v <= hi, f"--{name}", f"{v:g} outside [{lo:g}, {hi:g}]")
    return pts


# }}}


# {{{ commands


def _cmd_operator(ns) -> tuple[list[str], list[list]]:
    dom = _domain(ns)
    alpha, rho = _order(ns)
    N = _n_grid(ns.n_grid)
    x = _expr(ns.expr, "--expr", {"t"})
    ts = _points(ns, "t", dom.a, dom.b)
    p = OrderParams(alpha, rho, ns.side)
    if ns.command == "integral":
        op = frac_integral
    else:
        op = caputo_deriv if ns.kind == "caputo" else rl_deriv
    rows = []
    for t in ts:
        r = op(x, p, dom, t, N)
        rows.append([t, r.value, r.est_error])
    return ["t", "value", "est_error"], rows


def _cmd_ml(ns):
    _need(0 < ns.alpha <= ML_ALPHA_MAX, "--alpha", f"must lie in (0, {ML_ALPHA_MAX:g}]")
    zs = _points(ns, "z")
    return ["z", "value"], [[z, mittag_leffler(ns.alpha, z)] for z in zs]


def _problem(ns, f: FuncSpec, init: list[float], flag: str) -> FdeProblem:
    alpha, rho = _order(ns)
    p = OrderParams(alpha, rho)
    _need(len(init) == p.n, flag, f"expects {p.n} value(s) for alpha={alpha:g}")
    return FdeProblem(p, _domain(ns), f, tuple(init))


def _cmd_solve(ns):
    f = _expr(ns.f, "--f", {"t", "x"})
    prob = _problem(ns, f, ns.init, "--init")
    sol = solve(prob, _n_grid(ns.n_grid))
    return ["t", "x"], [[t, x] for t, x in zip(sol.grid.t_nodes, sol.values)]


def _cmd_gronwall(ns):
    dom = _domain(ns)
    alpha, rho = _order(ns, integer_ok=True)
    N = _n_grid(ns.n_grid)
    _need(ns.eps_series > 0, "--eps-series", "must be positive")
    _need(ns.k_max >= 1, "--k-max", "must be at least 1")
    v = _expr(ns.v, "--v", {"t"})
    g = _expr(ns.g, "--g", {"t"})
    u = _expr(ns.u, "--u", {"t"}) if ns.u else None
    grid = build_grid(dom, rho, N)
    q = GronwallQuery(v=v, g=g, alpha=alpha, rho=rho, domain=dom, grid=grid, side=ns.side, u=u)
    uvals = np.asarray(u.at_w(grid.w_nodes, rho), dtype=float) * np.ones(N + 1) if u else [None] * (N + 1)
    if ns.form == "series":
        rep = series_bound(q, ns.eps_series, ns.k_max)
        series, K = rep.bound_values, rep.K_terms_used
        ml = rep.ml_bound_values if rep.ml_bound_values is not None else [None] * (N + 1)
    else:
        ml = ml_bound(q)
        series, K = [None] * (N + 1), [None] * (N + 1)
    rows = [list(r) for r in zip(grid.t_nodes, uvals, series, ml, K)]
    return ["t", "u", "bound_series", "bound_ml", "K_terms"], rows


def _cmd_compare(ns):
    f = _expr(ns.f, "--f", {"t", "x"})
    fp = _expr(ns.f_pert, "--f-pert", {"t", "x"})
    psi = _expr(ns.psi, "--psi", {"t"})
    _need(math.isfinite(ns.lipschitz) and ns.lipschitz >= 0, "--lipschitz", "must be nonnegative")
    N = _n_grid(ns.n_grid)
    px = _problem(ns, f, ns.init, "--init")
    py = _problem(ns, fp, ns.init_pert, "--init-pert")
    sx, sy = solve(px, N), solve(py, N)
    gaps = [abs(a - b) for a, b in zip(ns.init, ns.init_pert)]
    rep = comparison_bound(ns.lipschitz, psi, gaps, ns.alpha, ns.rho, px.domain, sx.grid)
    rows = [
        [t, x, y, abs(x - y), bnd, k]
        for t, x, y, bnd, k in zip(sx.grid.t_nodes, sx.values, sy.values, rep.bound_values, rep.K_terms_used)
    ]
    return ["t", "x", "y", "abs_diff", "bound", "K_terms"], rows


def _cmd_ibp(ns):
    dom = _domain(ns)
    alpha, rho = _order(ns)
    Ns = [_n_grid(n) for n in ns.n_grid]
    x = _expr(ns.x, "--x", {"t"})
    y = _expr(ns.y, "--y", {"t"})
    p = OrderParams(alpha, rho)
    rows = []
    for N in Ns:
        lhs, rhs = ibp_sides(x, y, p, dom, N)
        rows.append([N, lhs, rhs, abs(lhs - rhs) / (1 + abs(lhs))])
    return ["n_grid", "lhs", "rhs", "residual"], rows


_COMMANDS = {
    "integral": _cmd_operator,
    "deriv": _cmd_operator,
    "ml": _cmd_ml,
    "solve": _cmd_solve,
    "gronwall": _cmd_gronwall,
    "compare": _cmd_compare,
    "ibp-check": _cmd_ibp,
}


# }}}


def _render(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _write(text: str, path: str | None, stdout) -> None:
    if path is None:
        stdout.write(text)
        return
    # write beside the target and rename, so a failure never leaves a partial file
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".frackit-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _origin(exc: BaseException) -> str:
    tb = exc.__traceback__
    name = "frackit"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("frackit.") and mod != __name__:
            name = mod.split(".")[-1]
        tb = tb.tb_next
    return _MODULE_NAMES.get(name, name)


_EXPR_FLAGS = {"--expr", "--f", "--f-pert", "--v", "--g", "--u", "--psi", "--x", "--y"}


def _glue_expressions(argv: list[str]) -> list[str]:
    """``--f -x`` -> ``--f=-x``: expressions may start with a minus sign."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in _EXPR_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    """Execute one command line; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    argv = _glue_expressions(list(sys.argv[1:] if argv is None else argv))
    try:
        # argparse prints usage and --help itself; keep it on our streams
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        header, rows = _COMMANDS[ns.command](ns)
    except UsageError as exc:
        parser.print_usage(stderr)
        stderr.write(f"frackit {ns.command}: error: {exc}\n")
        return 2
    except FrackitError as exc:
        stderr.write(f"frackit: {_origin(exc)}: {exc.category}: {exc}\n")
        return 1
    _write(_render(header, rows), ns.out, stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
