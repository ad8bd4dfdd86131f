"""Computable Gronwall-type bounds for Katugampola integral inequalities.

Premise (left side, ``s = t**rho - a**rho``)::

    u(t) <= v(t) + g(t) rho**(1-alpha) int_a^t tau**(rho-1) (t**rho - tau**rho)**(alpha-1) u(tau) dtau
          = v(t) + g(t) Gamma(alpha) I^{alpha,rho} u(t)

Conclusion::

    u(t) <= v(t) + sum_{k>=1} (g(t) Gamma(alpha))**k I^{k alpha,rho} v(t)
         <= v(t) E_alpha(g(t) Gamma(alpha) (s/rho)**alpha)      (v nondecreasing)

``g`` is evaluated at the outer point ``t``.  The right-sided version anchors
at ``b``, uses ``b**rho - t**rho`` and needs ``g`` (and ``v`` for the closed
form) nonincreasing.  Unlike :class:`~frackit.operators.OrderParams`, the order
here may be an integer: ``alpha = 1`` gives the classical inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, HypothesisError, TruncationError
from .expr import FuncSpec
from .mesh import Domain, WGrid, build_grid
from .operators import OrderParams
from .quadrature import rl_integral_all
from .specfun import gamma, mittag_leffler

__all__ = [
    "BoundReport",
    "GronwallQuery",
    "check_hypothesis",
    "comparison_bound",
    "ml_bound",
    "series_bound",
]

MONOTONE_TOL = 1e-12
HYPOTHESIS_SLACK = 1e-10


@dataclass(frozen=True)
class GronwallQuery:
    v: FuncSpec
    g: FuncSpec
    alpha: float
    rho: float
    domain: Domain
    grid: WGrid
    side: str = "left"
    u: FuncSpec | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive, got {self.alpha:g}")
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise DomainError(f"rho must be positive, got {self.rho:g}")
        if self.side not in ("left", "right"):
            raise DomainError(f"side must be 'left' or 'right', got {self.side!r}")
        if not math.isclose(self.grid.rho, self.rho, rel_tol=1e-14) or self.grid.domain != self.domain:
            raise DomainError("grid does not match the query's rho and domain")
        v, g = self.v_nodes(), self.g_nodes()
        if np.any(v < 0):
            raise HypothesisError("v must be nonnegative on the grid")
        if np.any(g < 0):
            raise HypothesisError("g must be nonnegative on the grid")
        if not _monotone(g, self.side):
            word = "nondecreasing" if self.side == "left" else "nonincreasing"
            raise HypothesisError(f"g must be {word} on the grid nodes")
        if self.u is not None and np.any(_nodes(self.u, self.grid) < 0):
            raise HypothesisError("u must be nonnegative on the grid")

    @classmethod
    def from_params(cls, params: OrderParams, v: FuncSpec, g: FuncSpec, domain: Domain,
                    grid: WGrid, u: FuncSpec | None = None) -> "GronwallQuery":
        return cls(v=v, g=g, alpha=params.alpha, rho=params.rho, domain=domain, grid=grid,
                   side=params.side, u=u)

    def v_nodes(self) -> np.ndarray:
        return _nodes(self.v, self.grid)

    def g_nodes(self) -> np.ndarray:
        return _nodes(self.g, self.grid)


@dataclass(frozen=True)
class BoundReport:
    bound_values: np.ndarray = field(repr=False)
    K_terms_used: np.ndarray = field(repr=False)
    series_tail_estimate: float
    monotonic_v: bool
    ml_bound_values: np.ndarray | None = field(default=None, repr=False)


def _nodes(f: FuncSpec, grid: WGrid) -> np.ndarray:
    if f.grid is not None and f.grid is grid:
        vals = np.asarray(f.values, dtype=float)
    else:
        vals = np.asarray(f.at_w(grid.w_nodes, grid.rho), dtype=float)
        vals = np.broadcast_to(vals, grid.w_nodes.shape).astype(float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("function is not finite on the grid")
    return vals


def _monotone(vals: np.ndarray, side: str) -> bool:
    """Nondecreasing (left) or nonincreasing (right), ties within ``MONOTONE_TOL``."""
    d = np.diff(vals)
    tol = MONOTONE_TOL * max(1.0, float(np.max(np.abs(vals))))
    return bool(np.all(d >= -tol)) if side == "left" else bool(np.all(d <= tol))


def _orient(vals: np.ndarray, side: str) -> np.ndarray:
    return vals if side == "left" else vals[::-1]


def _distance(q: GronwallQuery) -> np.ndarray:
    w = q.grid.w_nodes
    return w - q.grid.wa if q.side == "left" else q.grid.wb - w


def _katugampola_all(vals: np.ndarray, order: float, rho: float, grid: WGrid, side: str) -> np.ndarray:
    """``I^{order,rho}`` at every node; any positive order, including integers."""
    out = rho ** (-order) * rl_integral_all(_orient(vals, side), order, grid.h)
    return _orient(out, side)


def check_hypothesis(q: GronwallQuery, N: int | None = None) -> np.ndarray:
    """Per-node truth of ``u <= v + g Gamma(alpha) I^{alpha,rho} u``.

    The comparison allows ``1e-10`` plus the quadrature's own error estimate
    (the change from halving the grid, as a running maximum from the anchor),
    since an exact solution of the equality case would otherwise fail on
    discretisation error alone.
    """
    if q.u is None:
        raise DomainError("check_hypothesis needs u")
    grid = q.grid if N is None or N == q.grid.N else build_grid(q.domain, q.rho, N)
    u, v, g = _nodes(q.u, grid), _nodes(q.v, grid), _nodes(q.g, grid)
    Iu = _katugampola_all(u, q.alpha, q.rho, grid, q.side)
    slack = np.full(grid.N + 1, HYPOTHESIS_SLACK)
    if grid.N % 2 == 0 and grid.N >= 4:
        coarse = build_grid(q.domain, q.rho, grid.N // 2)
        Iu_c = _katugampola_all(_nodes(q.u, coarse), q.alpha, q.rho, coarse, q.side)
        est = np.abs(Iu[::2] - Iu_c)
        fine = np.empty(grid.N + 1)
        fine[::2] = est
        # odd nodes take the larger estimate of their two neighbours
        fine[1::2] = np.maximum(est[:-1], est[1:])
        # the error starts at the anchor singularity and is carried forward
        fine = _orient(np.maximum.accumulate(_orient(fine, q.side)), q.side)
        slack += g * gamma(q.alpha) * fine
    rhs = v + g * gamma(q.alpha) * Iu
    return u <= rhs + slack


def _tail(term: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    """Geometric tail ``term r / (1 - r)``; infinite when ``r >= 1``."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        tail = np.where(ratio < 1, term * ratio / np.maximum(1 - ratio, 1e-300), np.inf)
    return np.where(term == 0, 0.0, tail)


def series_bound(q: GronwallQuery, eps_series: float = 1e-12, K_max: int = 200) -> BoundReport:
    """Truncated series ``v + sum_k (g Gamma(alpha))**k I^{k alpha,rho} v`` per node.

    Node ``i`` stops after the first ``k`` whose term is at most
    ``eps_series`` times the running bound; the tail beyond it is estimated
    from the ratio of the last two terms (the terms eventually decay
    faster than any geometric sequence).
    """
    if K_max < 1:
        raise DomainError("K_max must be at least 1")
    v, g = q.v_nodes(), q.g_nodes()
    size = v.size
    c = g * gamma(q.alpha)
    acc = v.copy()
    K = np.zeros(size, dtype=int)
    done = np.zeros(size, dtype=bool)
    tails = np.zeros(size)
    prev = np.full(size, np.inf)
    ck = np.ones(size)
    for k in range(1, K_max + 1):
        ck = ck * c
        term = ck * _katugampola_all(v, k * q.alpha, q.rho, q.grid, q.side)
        term = np.where(done, 0.0, term)
        acc = acc + term
        K = np.where(done, K, k)
        stop = ~done & (term <= eps_series * acc)
        if np.any(stop):
            ratio = np.divide(term, prev, out=np.zeros(size), where=prev > 0)
            tails = np.where(stop, _tail(term, ratio), tails)
        done |= stop
        prev = np.where(done, prev, term)
        if np.all(done):
            break
    if not np.all(done):
        ratio = np.divide(term, prev, out=np.full(size, np.inf), where=prev > 0)
        tails = np.where(done, tails, _tail(term, ratio))
        bad = ~done & (tails > 1e-8 * acc)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise TruncationError(
                f"series not converged after K_max={K_max} terms at t={q.grid.t_nodes[i]:.6g}"
            )
    monotone = _monotone(v, q.side)
    ml = ml_bound(q) if monotone else None
    return BoundReport(
        bound_values=acc,
        K_terms_used=K,
        series_tail_estimate=float(np.max(tails)) if size else 0.0,
        monotonic_v=monotone,
        ml_bound_values=ml,
    )


def ml_bound(q: GronwallQuery) -> np.ndarray:
    """``v(t) E_alpha(g(t) Gamma(alpha) (s/rho)**alpha)`` per node; needs monotone ``v``."""
    v, g = q.v_nodes(), q.g_nodes()
    if not _monotone(v, q.side):
        word = "nondecreasing" if q.side == "left" else "nonincreasing"
        raise HypothesisError(f"the Mittag-Leffler bound needs v {word} on the grid nodes")
    z = g * gamma(q.alpha) * (_distance(q) / q.rho) ** q.alpha
    E = np.array([mittag_leffler(q.alpha, float(zi)) for zi in z])
    return v * E


def comparison_bound(C: float, psi: FuncSpec, init_gaps, alpha: float, rho: float, domain: Domain,
                     grid: WGrid, eps_series: float = 1e-12, K_max: int = 200) -> BoundReport:
    """Bound on ``|x - y|`` for two solutions of ``CD^{alpha,rho} x = f(t, x)`` problems.

    With ``|f(t, x) - f(t, y)| <= C |x - y|`` and ``|f - f~| <= psi``, the
    difference satisfies the Gronwall premise with
    ``v = sum_k rho**-k/k! s**k gap_k + I^{alpha,rho} psi`` and
    ``g = C / Gamma(alpha)``; the series bound follows.
    """
    if not (math.isfinite(C) and C >= 0):
        raise DomainError(f"Lipschitz constant must be nonnegative, got {C!r}")
    gaps = [abs(float(d)) for d in init_gaps]
    n = math.floor(alpha) + 1 if alpha != math.floor(alpha) else int(alpha)
    if len(gaps) != n:
        raise DomainError(f"alpha={alpha:g} needs {n} initial gaps, got {len(gaps)}")
    ps = _nodes(psi, grid)
    if np.any(ps < 0):
        raise HypothesisError("psi must be nonnegative on the grid")
    s = grid.w_nodes - grid.wa
    v = sum(rho ** (-k) / math.factorial(k) * s**k * d for k, d in enumerate(gaps))
    v = v + _katugampola_all(ps, alpha, rho, grid, "left")
    q = GronwallQuery(
        v=FuncSpec.sampled(grid, np.maximum(v, 0.0)),
        g=FuncSpec.constant(C / gamma(alpha)),
        alpha=alpha, rho=rho, domain=domain, grid=grid,
    )
    return series_bound(q, eps_series, K_max)
