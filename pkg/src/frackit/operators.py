"""Katugampola fractional integrals and Caputo-Katugampola derivatives.

Every operator is evaluated in ``w = t**rho`` coordinates, where

* ``I^{alpha,rho} x(t) = rho**(-alpha) * I^alpha[x~](t**rho)``
* ``CD^{alpha,rho} x(t) = rho**(alpha-n) * I^{n-alpha}[x_(n)~](t**rho)``

with ``I^beta`` the classical Riemann-Liouville integral and ``x~(w) = x(w**(1/rho))``.
Right-sided operators are computed by reflecting the grid about its
midpoint.  Internally every computation runs in an *oriented* coordinate
``s`` (the ``w``-distance from the anchor endpoint); in that coordinate the
right-sided formulas coincide with the left-sided ones once the modified
derivatives are multiplied by ``(-1)**k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DifferentiationError, DomainError, NonFiniteError, SingularPointError
from .expr import Binary, Const, FuncSpec, Var, fd_derivative, modified_diff
from .mesh import Domain, WGrid, build_grid, to_w
from .quadrature import rl_integral_all, rl_integral_last
from .specfun import gamma

__all__ = [
    "OperatorResult",
    "OrderParams",
    "caputo_all",
    "caputo_deriv",
    "cn_norm",
    "frac_integral",
    "frac_integral_all",
    "ibp_residual",
    "ibp_sides",
    "operator_norm_K",
    "pointwise_bound",
    "rl_deriv",
]

SIDES = ("left", "right")


@dataclass(frozen=True)
class OrderParams:
    """Order ``alpha`` (non-integer, positive), parameter ``rho > 0`` and side."""

    alpha: float
    rho: float = 1.0
    side: str = "left"
    n: int = field(init=False)

    def __post_init__(self) -> None:
        a, r = float(self.alpha), float(self.rho)
        if not (math.isfinite(a) and a > 0):
            raise DomainError(f"alpha must be positive, got {a:g}")
        if a == math.floor(a):
            raise DomainError(f"alpha must not be an integer, got {a:g}")
        if not (math.isfinite(r) and r > 0):
            raise DomainError(f"rho must be positive, got {r:g}")
        if self.side not in SIDES:
            raise DomainError(f"side must be 'left' or 'right', got {self.side!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "n", int(math.floor(a)) + 1)

    @property
    def sign(self) -> int:
        """``+1`` for left-sided operators, ``-1`` for right-sided ones."""
        return 1 if self.side == "left" else -1

    def with_side(self, side: str) -> "OrderParams":
        return OrderParams(self.alpha, self.rho, side)


@dataclass(frozen=True)
class OperatorResult:
    value: float
    est_error: float
    N_used: int


# {{{ helpers


def _check_t(dom: Domain, t: float) -> float:
    t = float(t)
    if not dom.a <= t <= dom.b:
        raise DomainError(f"t={t:g} outside [{dom.a:g}, {dom.b:g}]")
    return t


def _oriented_nodes(p: OrderParams, dom: Domain, t: float, N: int) -> tuple[np.ndarray, float]:
    """``N + 1`` ``w``-nodes from the anchor endpoint to ``t`` and the spacing."""
    anchor = to_w(dom.a if p.side == "left" else dom.b, p.rho)
    wt = to_w(t, p.rho)
    i = np.arange(N + 1, dtype=float) / N
    w = anchor * (1.0 - i) + wt * i
    w[0], w[-1] = anchor, wt
    return w, abs(wt - anchor) / N


def _check_finite(vals: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmin(np.isfinite(vals)))
        raise NonFiniteError(f"{what} is not finite at quadrature node {bad}")


def _mdiff_values(x: FuncSpec, k: int, rho: float, w: np.ndarray) -> np.ndarray:
    """``x_(k)`` evaluated at the ``w``-points ``w``."""
    return np.asarray(modified_diff(x, k, rho).at_w(w, rho), dtype=float)


def _taylor(s: np.ndarray, d: list[float], rho: float) -> np.ndarray:
    """``sum_k rho**(-k)/k! s**k d_k`` in oriented coordinates."""
    out = np.zeros_like(s, dtype=float)
    for k, dk in enumerate(d):
        if dk != 0.0:
            out = out + rho ** (-k) / math.factorial(k) * s**k * dk
    return out


def _one_sided_derivative_last(J: np.ndarray, h: float, k: int) -> float:
    """k-th derivative (k in {1, 2}) at the last of uniformly spaced samples."""
    if k == 1:
        return (3 * J[-1] - 4 * J[-2] + J[-3]) / (2 * h)
    if k == 2:
        return (2 * J[-1] - 5 * J[-2] + 4 * J[-3] - J[-4]) / h**2
    raise DifferentiationError(f"numerical differentiation supports order <= 2, got {k}")


def _half(N: int) -> int:
    return max(N // 2, 4)


# }}}


# {{{ expression path (single evaluation point)


def _integral_expr(x: FuncSpec, p: OrderParams, dom: Domain, t: float, N: int) -> float:
    w, h = _oriented_nodes(p, dom, t, N)
    f = np.asarray(x.at_w(w, p.rho), dtype=float)
    _check_finite(f, "integrand")
    return p.rho ** (-p.alpha) * rl_integral_last(f, p.alpha, h)


def _anchor_data(x: FuncSpec, p: OrderParams, dom: Domain) -> list[float]:
    """Oriented modified derivatives ``sign**k x_(k)(anchor)``, ``k < n``."""
    anchor = np.array([to_w(dom.a if p.side == "left" else dom.b, p.rho)])
    d = [float(p.sign**k * _mdiff_values(x, k, p.rho, anchor)[0]) for k in range(p.n)]
    if not all(math.isfinite(v) for v in d):
        raise NonFiniteError("modified derivatives at the anchor endpoint are not finite")
    return d


def _caputo_expr(x: FuncSpec, p: OrderParams, dom: Domain, t: float, N: int) -> float:
    w, h = _oriented_nodes(p, dom, t, N)
    n, rho, beta = p.n, p.rho, p.n - p.alpha
    dn = p.sign**n * _mdiff_values(x, n, rho, w)
    if np.all(np.isfinite(dn)):
        return rho ** (-beta) * rl_integral_last(dn, beta, h)

    # x_(n) is singular at the anchor.  Preferably differentiate once:
    # sign**n x_(n) = rho d/ds [sign**(n-1) x_(n-1)] with x_(n-1) finite
    dm = p.sign ** (n - 1) * _mdiff_values(x, n - 1, rho, w)
    if np.all(np.isfinite(dm)):
        J = np.array([rl_integral_last(dm[: N + 1 - j] - dm[0], beta, h) for j in range(3)][::-1])
        return rho ** (1 - beta) * _one_sided_derivative_last(J, h, 1)

    # otherwise differentiate the integral of the Taylor remainder n times
    # (Caputo = RL derivative of x - Taylor part)
    d = _anchor_data(x, p, dom)
    s = np.arange(N + 1) * h
    r = np.asarray(x.at_w(w, rho), dtype=float) - _taylor(s, d, rho)
    _check_finite(r, "Taylor remainder")
    J = np.array([rl_integral_last(r[: N + 1 - j], beta, h) for j in range(n + 2)][::-1])
    return rho ** (-beta) * rho**n * _one_sided_derivative_last(J, h, n)


# }}}


# {{{ all-node evaluation on a grid


def _oriented(values: np.ndarray, side: str) -> np.ndarray:
    return values if side == "left" else values[::-1]


def _grid_values(x: FuncSpec, grid: WGrid) -> np.ndarray:
    if x.grid is not None and x.grid is grid:
        return np.asarray(x.values, dtype=float)
    return np.asarray(x.at_w(grid.w_nodes, grid.rho), dtype=float)


def frac_integral_all(x: FuncSpec, p: OrderParams, grid: WGrid) -> np.ndarray:
    """Katugampola integral of ``x`` at every node of ``grid``."""
    _check_grid(p, grid)
    f = _grid_values(x, grid)
    _check_finite(f, "integrand")
    out = p.rho ** (-p.alpha) * rl_integral_all(_oriented(f, p.side), p.alpha, grid.h)
    return _oriented(out, p.side)


def caputo_all(x: FuncSpec, p: OrderParams, grid: WGrid, method: str = "auto") -> np.ndarray:
    """Caputo-Katugampola derivative of ``x`` at every node of ``grid``.

    ``method="direct"`` integrates the ``n``-th modified derivative with the
    product trapezoidal rule.  ``method="rl"`` differentiates (by central
    differences) the integral of the Taylor remainder; it is used for
    sampled inputs.  Expressions whose ``x_(n)`` is singular at the anchor
    differentiate ``I^{n-alpha}`` of the finite ``x_(n-1)`` once instead.
    """
    _check_grid(p, grid)
    n, rho, beta, h = p.n, p.rho, p.n - p.alpha, grid.h
    if method not in ("auto", "direct", "rl"):
        raise ValueError(f"unknown method {method!r}")
    if x.grid is None and method != "rl":
        dn = p.sign**n * _mdiff_values(x, n, rho, grid.w_nodes)
        if np.all(np.isfinite(dn)):
            out = rho ** (-beta) * rl_integral_all(_oriented(dn, p.side), beta, h)
            return _oriented(out, p.side)
        if method == "direct":
            _check_finite(dn, f"x_({n})")
        # singular x_(n): one numerical derivative of I^beta of the finite x_(n-1)
        dm = _oriented(p.sign ** (n - 1) * _mdiff_values(x, n - 1, rho, grid.w_nodes), p.side)
        if np.all(np.isfinite(dm)):
            out = rho ** (1 - beta) * fd_derivative(rl_integral_all(dm - dm[0], beta, h), h, 1)
            out[0] = 0.0
            return _oriented(out, p.side)

    f = _oriented(_grid_values(x, grid), p.side)
    _check_finite(f, "function values")
    s = np.arange(grid.N + 1) * h
    c = 0.0
    if x.grid is None:
        d = _anchor_data(x, p, grid.domain)
    else:
        d, c = _anchor_fit(f, h, p)
    r = f - _taylor(s, d, rho)
    J = rl_integral_all(r, beta, h)
    if c != 0.0:
        J = J + c * _power_defect(p.alpha, beta, h, grid.N)
    out = rho ** (-beta) * rho**n * fd_derivative(J, h, n)
    out[0] = 0.0
    return _oriented(out, p.side)


def _anchor_fit(f: np.ndarray, h: float, p: OrderParams) -> tuple[list[float], float]:
    """Fit ``f ~ sum_{k<=n} a_k s**k + c s**alpha`` through the first ``n + 2`` nodes.

    Sampled inputs of an order-``alpha`` derivative typically carry an
    ``s**alpha`` term at the anchor (outputs of ``I^alpha``, solutions of
    order-``alpha`` equations).  One-sided differences cannot estimate the
    Taylor data of such samples and the linear interpolant misses the term
    in the first cell.  Returns the oriented modified derivatives
    ``rho**k k! a_k`` for ``k < n`` and the coefficient ``c``.
    """
    n = p.n
    if f.size < n + 2:
        raise DifferentiationError(f"need at least {n + 2} samples, got {f.size}")
    j = np.arange(n + 2, dtype=float)
    M = np.column_stack([j**k for k in range(n + 1)] + [j**p.alpha])
    coef = np.linalg.solve(M, f[: n + 2])
    d = [float(p.rho**k * math.factorial(k) * coef[k] / h**k) for k in range(n)]
    return d, float(coef[-1] / h**p.alpha)


def _power_defect(alpha: float, beta: float, h: float, N: int) -> np.ndarray:
    """Exact minus product-trapezoid ``I^beta`` of ``s**alpha`` at every node."""
    s = np.arange(N + 1) * h
    exact = gamma(alpha + 1) / gamma(alpha + beta + 1) * s ** (alpha + beta)
    return exact - rl_integral_all(s**alpha, beta, h)


def _check_grid(p: OrderParams, grid: WGrid) -> None:
    if not math.isclose(p.rho, grid.rho, rel_tol=1e-14):
        raise DomainError(f"grid built for rho={grid.rho:g}, operator has rho={p.rho:g}")


def _at_t(grid: WGrid, values: np.ndarray, t: float) -> float:
    i = grid.node_index(t)
    if i is not None:
        return float(values[i])
    return float(np.interp(to_w(t, grid.rho), grid.w_nodes, values))


def _coarse(x: FuncSpec) -> FuncSpec | None:
    g = x.grid
    if g.N % 2 or g.N < 8:
        return None
    cg = build_grid(g.domain, g.rho, g.N // 2)
    return FuncSpec.sampled(cg, x.values[::2])


def _sampled_op(x: FuncSpec, p: OrderParams, dom: Domain, t: float, fn) -> OperatorResult:
    if x.grid.domain != dom:
        raise DomainError("sampled function's grid does not span the requested domain")
    value = _at_t(x.grid, fn(x, p, x.grid), t)
    xc = _coarse(x)
    est = abs(value - _at_t(xc.grid, fn(xc, p, xc.grid), t)) if xc is not None else math.inf
    return OperatorResult(value, est, x.grid.N)


# }}}


# {{{ public single-point operators


def frac_integral(x: FuncSpec, p: OrderParams, dom: Domain, t: float, N: int = 1024) -> OperatorResult:
    """Katugampola fractional integral of order ``p.alpha`` at ``t``.

    Left: ``rho**(1-alpha)/Gamma(alpha) int_a^t tau**(rho-1) (t**rho - tau**rho)**(alpha-1) x(tau) dtau``;
    the right-sided integral runs over ``[t, b]``.  For expression inputs
    ``N`` cells are laid between the anchor and ``t``; sampled inputs use
    their own grid.  ``est_error`` is the change from halving ``N``.
    """
    t = _check_t(dom, t)
    if x.grid is not None:
        return _sampled_op(x, p, dom, t, frac_integral_all)
    anchor = dom.a if p.side == "left" else dom.b
    if t == anchor:
        return OperatorResult(0.0, 0.0, N)
    v = _integral_expr(x, p, dom, t, N)
    vc = _integral_expr(x, p, dom, t, _half(N))
    return OperatorResult(v, abs(v - vc), N)


def caputo_deriv(x: FuncSpec, p: OrderParams, dom: Domain, t: float, N: int = 1024) -> OperatorResult:
    """Caputo-Katugampola derivative ``I^{n-alpha,rho} x_(n)`` (left) at ``t``.

    The right-sided derivative integrates ``(-1)**n x_(n)`` over ``[t, b]``.
    """
    t = _check_t(dom, t)
    if x.grid is not None:
        return _sampled_op(x, p, dom, t, caputo_all)
    anchor = dom.a if p.side == "left" else dom.b
    if t == anchor:
        return OperatorResult(0.0, 0.0, N)
    v = _caputo_expr(x, p, dom, t, N)
    vc = _caputo_expr(x, p, dom, t, _half(N))
    return OperatorResult(v, abs(v - vc), N)


def rl_deriv(x: FuncSpec, p: OrderParams, dom: Domain, t: float, N: int = 1024) -> OperatorResult:
    """Riemann-Liouville-type Katugampola derivative at ``t``.

    Obtained from the Caputo-type derivative by adding back
    ``sum_k rho**(alpha-k)/Gamma(k+1-alpha) (t**rho - a**rho)**(k-alpha) x_(k)(a)``
    (with ``(-1)**k`` and ``b**rho - t**rho`` on the right).
    """
    t = _check_t(dom, t)
    c = caputo_deriv(x, p, dom, t, N)
    if x.grid is not None:
        f = _oriented(np.asarray(x.values, dtype=float), p.side)
        d, _ = _anchor_fit(f, x.grid.h, p)
    else:
        d = _anchor_data(x, p, dom)
    s = abs(to_w(t, p.rho) - to_w(dom.a if p.side == "left" else dom.b, p.rho))
    if s == 0.0:
        if any(dk != 0.0 for dk in d):
            raise SingularPointError(
                "RL-type derivative is singular at the anchor endpoint unless x_(k) vanish there"
            )
        return c
    corr = sum(
        p.rho ** (p.alpha - k) / gamma(k + 1 - p.alpha) * s ** (k - p.alpha) * dk
        for k, dk in enumerate(d)
    )
    return OperatorResult(c.value + corr, c.est_error, c.N_used)


# }}}


# {{{ bounds


def _max_abs_mdiff(x: FuncSpec, k: int, rho: float, w0: float, w1: float, samples: int = 4097) -> float:
    """``max |x_(k)|`` over the ``w``-interval between ``w0`` and ``w1``."""
    lo, hi = min(w0, w1), max(w0, w1)
    if x.grid is not None:
        g = x.grid
        vals = np.abs(_mdiff_values(x, k, rho, g.w_nodes))
        mask = (g.w_nodes >= lo - 1e-12 * hi) & (g.w_nodes <= hi + 1e-12 * hi)
        return float(np.max(vals[mask])) if np.any(mask) else float(abs(_mdiff_values(x, k, rho, np.array([lo]))[0]))
    if lo == hi:
        return float(abs(_mdiff_values(x, k, rho, np.array([lo]))[0]))
    dk = modified_diff(x, k, rho)
    w = np.linspace(lo, hi, samples)
    vals = np.abs(np.asarray(dk.at_w(w, rho), dtype=float))
    if np.any(np.isnan(vals)):
        return math.inf
    i = int(np.argmax(vals))
    best = float(vals[i])
    if not math.isfinite(best):
        return best
    # polish the discrete maximum inside its bracket
    from scipy.optimize import minimize_scalar

    a, b = w[max(i - 1, 0)], w[min(i + 1, samples - 1)]
    if b > a:
        res = minimize_scalar(
            lambda z: -abs(float(dk.at_w(z, rho))), bounds=(a, b), method="bounded",
            options={"xatol": 1e-14 * max(1.0, hi)},
        )
        best = max(best, -float(res.fun))
    return best


def pointwise_bound(x: FuncSpec, p: OrderParams, dom: Domain, t: float) -> float:
    """``rho**(alpha-n)/Gamma(n+1-alpha) max|x_(n)| (t**rho - a**rho)**(n-alpha)``.

    The maximum runs over ``[a, t]`` (left) or ``[t, b]`` (right).
    """
    t = _check_t(dom, t)
    n, rho = p.n, p.rho
    anchor = to_w(dom.a if p.side == "left" else dom.b, rho)
    wt = to_w(t, rho)
    s = abs(wt - anchor)
    if s == 0.0:
        return 0.0
    m = _max_abs_mdiff(x, n, rho, anchor, wt)
    return rho ** (p.alpha - n) / gamma(n + 1 - p.alpha) * m * s ** (n - p.alpha)


def operator_norm_K(p: OrderParams, dom: Domain) -> float:
    """Bound constant ``K = rho**(alpha-n)/Gamma(n+1-alpha) (b**rho - a**rho)**(n-alpha)``."""
    L = to_w(dom.b, p.rho) - to_w(dom.a, p.rho)
    return p.rho ** (p.alpha - p.n) / gamma(p.n + 1 - p.alpha) * L ** (p.n - p.alpha)


def cn_norm(x: FuncSpec, p: OrderParams, dom: Domain) -> float:
    """``sum_{k=0}^{n} max_[a,b] |x_(k)|``.

    The printed norm sums ``max |x^(n)|`` for every ``k``; the index is read
    here as the modified derivative ``x_(k)``, which is what the boundedness
    argument needs.
    """
    wa, wb = to_w(dom.a, p.rho), to_w(dom.b, p.rho)
    return sum(_max_abs_mdiff(x, k, p.rho, wa, wb) for k in range(p.n + 1))


# }}}


# {{{ integration by parts


def _weighted_x(x: FuncSpec, rho: float, grid: WGrid) -> FuncSpec:
    """``t**(1-rho) x(t)``."""
    if x.grid is not None:
        return FuncSpec.sampled(x.grid, grid.t_nodes ** (1.0 - rho) * np.asarray(x.values))
    if x.wrho is not None:
        x = FuncSpec(ast=x.ast, wrho=x.wrho)
        weight = Binary("^", Var("w"), Const((1.0 - rho) / x.wrho))
    else:
        weight = Binary("^", Var("t"), Const(1.0 - rho))
    if rho == 1:
        return x
    return FuncSpec(ast=Binary("*", weight, x.ast), wrho=x.wrho)


def _vanishes(v: float, scale: float) -> bool:
    return abs(v) <= 1e-13 * max(1.0, scale)


def ibp_sides(x: FuncSpec, y: FuncSpec, p: OrderParams, dom: Domain, N: int = 2048) -> tuple[float, float]:
    """Both sides of the left-sided fractional integration-by-parts formula.

    ``lhs = int_a^b x CD_{a+} y dt`` and
    ``rhs = int_a^b D_{b-}(t**(1-rho) x) t**(rho-1) y dt
    + [sum_{k<n} (-t**(1-rho) d/dt)**k I_{b-}^{n-alpha}(t**(1-rho) x) y_(n-k-1)]_a^b``.

    The right-sided operators applied to ``X = t**(1-rho) x`` split into a
    bounded Caputo-like part and explicit powers of ``(b**rho - t**rho)``; the
    powers are integrated against ``y`` exactly by product integration, the
    bounded integrands with the plain trapezoidal rule in ``t``.  Terms that
    diverge individually (``n >= 2`` with ``x(b) != 0``) raise
    :class:`~frackit.errors.DomainError`.
    """
    if p.side != "left":
        raise DomainError("ibp_residual implements the left-sided formula only")
    n, rho, alpha = p.n, p.rho, p.alpha
    beta = n - alpha
    grid = build_grid(dom, rho, N)
    h, w, t = grid.h, grid.w_nodes, grid.t_nodes
    A, B = grid.wa, grid.wb
    pl = p.with_side("left")

    # left side
    yv = _grid_values(y, grid)
    Dy = caputo_all(y, pl, grid)
    xv = _grid_values(x, grid)
    # CD y ~ rho^-beta y_(n)(a) (w-A)^beta / Gamma(beta+1) near a; that term
    # is integrated against x dt = x t^(1-rho)/rho dw by product integration
    yn_a = float(_mdiff_values(y, n, rho, np.array([A]))[0]) if y.grid is None else 0.0
    if not math.isfinite(yn_a):
        yn_a = 0.0
    lead = rho ** (-beta) * yn_a / gamma(beta + 1) * (w - A) ** beta
    phi = xv * t ** (1.0 - rho) / rho
    lhs = float(np.trapezoid(xv * (Dy - lead), t))
    lhs += rho ** (-beta) * yn_a * rl_integral_last(phi[::-1], beta + 1, h)

    # X = t^(1-rho) x and its modified derivatives
    X = _weighted_x(x, rho, grid)
    Xk = [_mdiff_values(X, k, rho, w) if X.grid is None else
          (np.asarray(X.values) if k == 0 else rho**k * fd_derivative(X.values, h, k))
          for k in range(n + 1)]
    for k, arr in enumerate(Xk):
        _check_finite(arr, f"modified derivative {k} of t^(1-rho) x")
    scale = max(float(np.max(np.abs(a))) for a in Xk)
    Xb = [float(arr[-1]) for arr in Xk]

    def bounded(k: int) -> np.ndarray:
        # (-1)^k rho^-beta I^beta_{b-}[X_(k)] at every node
        return (-1) ** k * rho ** (-beta) * rl_integral_all(Xk[k][::-1], beta, h)[::-1]

    def singular_coeffs(k: int) -> list[tuple[float, float, int]]:
        # J_k = bounded(k) + sum_j coeff_j (B - w)^expo_j
        out = []
        for j in range(k):
            expo = beta - k + j
            coeff = (-1) ** j * rho ** (k - j - beta) * Xb[j] / gamma(expo + 1)
            out.append((coeff, expo, j))
        return out

    # outer integral of D_{b-} X against t^(rho-1) y
    # the bounded part behaves like (B-w)^beta at b; peel that term off too
    tail = (-1) ** n * rho ** (-beta) * Xb[n] / gamma(beta + 1) * (B - w) ** beta
    outer = float(np.trapezoid((bounded(n) - tail) * t ** (rho - 1.0) * yv, t))
    outer += (-1) ** n * rho ** (-beta) * Xb[n] * rl_integral_last(yv, beta + 1, h) / rho
    for coeff, expo, j in singular_coeffs(n):
        if _vanishes(Xb[j], scale):
            continue
        if expo <= -1:
            raise DomainError(
                f"integration by parts diverges: (t^(1-rho) x)_({j})(b) != 0 with alpha={alpha:g}"
            )
        # int_A^B (B-w)^expo y~(w) dw = Gamma(expo+1) * (I^{expo+1} y~)(B)
        moment = gamma(expo + 1) * rl_integral_last(yv, expo + 1, h)
        outer += coeff * moment / rho

    # boundary terms
    boundary_a = boundary_b = 0.0
    wa_arr, wb_arr = np.array([A]), np.array([B])
    for k in range(n):
        m = n - k - 1
        ya = float(_mdiff_values(y, m, rho, wa_arr)[0]) if y.grid is None else float(
            (rho**m * fd_derivative(y.values, h, m))[0] if m else y.values[0])
        yb = float(_mdiff_values(y, m, rho, wb_arr)[0]) if y.grid is None else float(
            (rho**m * fd_derivative(y.values, h, m))[-1] if m else y.values[-1])
        Ja = float(bounded(k)[0])
        Jb = 0.0
        for coeff, expo, j in singular_coeffs(k):
            if _vanishes(Xb[j], scale):
                continue
            Ja += coeff * (B - A) ** expo
            if expo < 0:
                raise DomainError(
                    f"integration by parts boundary term diverges at t=b for alpha={alpha:g}"
                )
        boundary_a += Ja * ya
        boundary_b += Jb * yb

    rhs = outer + boundary_b - boundary_a
    return lhs, rhs


def ibp_residual(x: FuncSpec, y: FuncSpec, p: OrderParams, dom: Domain, N: int = 2048) -> float:
    """Relative mismatch ``|lhs - rhs| / (1 + |lhs|)`` of :func:`ibp_sides`."""
    lhs, rhs = ibp_sides(x, y, p, dom, N)
    return abs(lhs - rhs) / (1.0 + abs(lhs))


# }}}
