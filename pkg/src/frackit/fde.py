"""Initial-value problems ``CD^{alpha,rho}_{a+} x = f(t, x)`` with ``x_(k)(a) = c_k``.

The problem is solved through its Volterra form

    x(t) = sum_k rho**-k/k! (t**rho - a**rho)**k c_k + I^{alpha,rho}[f(., x)](t)

which in ``w = t**rho`` is a classical Caputo problem with right-hand side
``rho**-alpha f``.  The scheme is the fractional Adams-Bashforth-Moulton
method (product-rectangle predictor, product-trapezoid corrector, one
correction per step) on a grid uniform in ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, DomainError
from .expr import FuncSpec
from .mesh import Domain, WGrid, build_grid
from .operators import OrderParams
from .quadrature import predictor_weights, rl_integral_all, rl_integral_last, trapezoid_weights

__all__ = ["FdeProblem", "Solution", "residual", "solve", "volterra_rhs"]

BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class FdeProblem:
    params: OrderParams
    domain: Domain
    f: FuncSpec
    init: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.params.side != "left":
            raise DomainError("the solver handles left-sided (initial value) problems only")
        init = tuple(float(c) for c in self.init)
        if len(init) != self.params.n:
            raise DomainError(
                f"alpha={self.params.alpha:g} needs {self.params.n} initial values, got {len(init)}"
            )
        if not all(math.isfinite(c) for c in init):
            raise DomainError("initial values must be finite")
        object.__setattr__(self, "init", init)


@dataclass(frozen=True)
class Solution:
    grid: WGrid
    values: np.ndarray = field(repr=False)
    residual_norm: float


def _taylor_part(problem: FdeProblem, grid: WGrid) -> np.ndarray:
    rho = problem.params.rho
    s = grid.w_nodes - grid.wa
    out = np.zeros(grid.N + 1)
    for k, c in enumerate(problem.init):
        out += rho ** (-k) / math.factorial(k) * s**k * c
    return out


def _rhs_values(problem: FdeProblem, grid: WGrid, values: np.ndarray) -> np.ndarray:
    F = problem.f(grid.t_nodes[: values.size], values)
    return problem.params.rho ** (-problem.params.alpha) * np.asarray(F, dtype=float)


def volterra_rhs(problem: FdeProblem, grid: WGrid, values: np.ndarray, i: int) -> float:
    """Right side of the Volterra equation at node ``i`` from the trace ``values[: i + 1]``."""
    if not 0 <= i <= grid.N or len(values) < i + 1:
        raise DomainError(f"trace does not cover node {i}")
    vals = np.asarray(values[: i + 1], dtype=float)
    taylor = _taylor_part(problem, grid)[i]
    if i == 0:
        return float(taylor)
    F = _rhs_values(problem, grid, vals)
    return float(taylor + rl_integral_last(F, problem.params.alpha, grid.h))


def _singular_exponents(alpha: float, limit: int = 1) -> list[float]:
    """Exponents ``k alpha < 1`` (non-integer) carried by solutions near ``a``."""
    out = []
    k = 1
    while k * alpha < 1 and len(out) < limit:
        out.append(k * alpha)
        k += 1
    return [g for g in out if abs(g - round(g)) > 1e-12]


def _defects(alpha: float, h: float, N: int, gammas: list[float]) -> tuple[np.ndarray, np.ndarray]:
    """Exact minus discrete ``I^alpha s**gamma`` for corrector and predictor, per node."""
    s = np.arange(N + 1) * h
    pred = predictor_weights(alpha, h, N)
    dc = np.zeros((len(gammas), N + 1))
    dp = np.zeros((len(gammas), N + 1))
    for r, g in enumerate(gammas):
        phi = s**g
        exact = math.gamma(g + 1) / math.gamma(g + alpha + 1) * s ** (g + alpha)
        dc[r] = exact - rl_integral_all(phi, alpha, h)
        dp[r] = exact - np.convolve(phi, pred)[: N + 1]
    return dc, dp


def _fit_singular(F: np.ndarray, gammas: list[float], h: float) -> np.ndarray:
    """Coefficients of ``s**gamma`` in ``F ~ c0 + sum c_g s**g + c1 s`` on the first nodes."""
    q = len(gammas)
    j = np.arange(q + 2, dtype=float)
    M = np.column_stack([np.ones(q + 2)] + [j**g for g in gammas] + [j])
    coef = np.linalg.solve(M, F[: q + 2])
    return coef[1 : q + 1] / h ** np.array(gammas)


def _sweep(problem: FdeProblem, grid: WGrid, taylor: np.ndarray, upto: int,
           corr_c: np.ndarray, corr_p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    alpha, h, N = problem.params.alpha, grid.h, grid.N
    scale = problem.params.rho ** (-alpha)
    kern, endw = trapezoid_weights(alpha, h, N)
    pred = predictor_weights(alpha, h, N)
    f, t = problem.f, grid.t_nodes

    x = np.empty(upto + 1)
    F = np.empty(upto + 1)
    x[0] = taylor[0]
    F[0] = scale * float(f(t[0], x[0]))
    drift = 0.0
    stiff = True
    for m in range(1, upto + 1):
        xp = taylor[m] + float(np.dot(pred[m:0:-1], F[:m])) + corr_p[m]
        raw = xp
        # modifier: the rectangle rule's error varies smoothly from step to
        # step; skipped while kern[0] * |dF/dx| is not small (it can amplify)
        if not stiff:
            xp -= drift
        hist = endw[m] * F[0] + float(np.dot(kern[m - 1 : 0 : -1], F[1:m]))
        fp = scale * float(f(t[m], xp))
        xm = taylor[m] + hist + kern[0] * fp + corr_c[m]
        if not math.isfinite(xm) or abs(xm) > BLOWUP_LIMIT:
            raise BlowUpError(f"solution left [-1e12, 1e12] at step {m} (t={t[m]:.6g})", step=m)
        x[m] = xm
        F[m] = scale * float(f(t[m], xm))
        drift = raw - xm
        dx = xm - xp
        lip = abs(F[m] - fp) / abs(dx) if dx != 0.0 else 0.0
        stiff = kern[0] * lip > 0.25
    return x, F


def _starting_coefficients(problem, grid, taylor, gammas, dc, dp) -> np.ndarray:
    """Fixed point of fit-then-solve on the first nodes; zero if it does not settle."""
    c = np.zeros(len(gammas))
    upto = len(gammas) + 1
    for _ in range(50):
        try:
            _, F = _sweep(problem, grid, taylor, upto, c @ dc, c @ dp)
        except BlowUpError:
            break
        c_new = _fit_singular(F, gammas, grid.h)
        if np.allclose(c_new, c, rtol=1e-12, atol=1e-12 * (1 + np.max(np.abs(F)))):
            return c_new
        c = c_new
    return np.zeros(len(gammas))


def solve(problem: FdeProblem, N: int) -> Solution:
    """Fractional Adams predictor-corrector (PECE) on ``N`` cells uniform in ``w``.

    Solutions of order-``alpha`` problems behave like ``c0 + c1 s**alpha +
    c2 s**(2 alpha) + ...`` at ``a`` (``s = w - a**rho``), which linear
    interpolation resolves only to ``O(h**(1+alpha))``.  For ``alpha < 1`` the
    coefficients of the ``s**(k alpha) < s`` terms in ``f`` are fitted on the
    first few nodes (made self-consistent by fixed-point iteration on that
    prefix) and the exact quadrature defects of those powers are added to
    predictor and corrector.
    """
    grid = build_grid(problem.domain, problem.params.rho, N)
    alpha, h = problem.params.alpha, grid.h
    taylor = _taylor_part(problem, grid)
    zero = np.zeros(N + 1)
    gammas = _singular_exponents(alpha) if N >= 2 * (len(_singular_exponents(alpha)) + 2) else []

    if gammas:
        dc, dp = _defects(alpha, h, N, gammas)
        c = _starting_coefficients(problem, grid, taylor, gammas, dc, dp)
        x, _ = _sweep(problem, grid, taylor, N, c @ dc, c @ dp)
    else:
        x, _ = _sweep(problem, grid, taylor, N, zero, zero)

    x.setflags(write=False)
    sol = Solution(grid=grid, values=x, residual_norm=0.0)
    return Solution(grid=grid, values=x, residual_norm=residual(problem, sol))


def residual(problem: FdeProblem, sol: Solution) -> float:
    """``max_i |x_i - volterra_rhs(x, t_i)|`` over all nodes."""
    grid = sol.grid
    F = _rhs_values(problem, grid, np.asarray(sol.values))
    rhs = _taylor_part(problem, grid) + rl_integral_all(F, problem.params.alpha, grid.h)
    return float(np.max(np.abs(np.asarray(sol.values) - rhs)))
