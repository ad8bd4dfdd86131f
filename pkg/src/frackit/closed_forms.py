"""Closed-form values used as oracles: power rule, Mittag-Leffler eigenpairs, Taylor remainders."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import FuncSpec, modified_diff
from .mesh import Domain, to_w
from .operators import OrderParams
from .specfun import gamma, mittag_leffler

__all__ = ["PowerFunc", "ml_eigenpair", "power_rule", "taylor_remainder"]


def _distance(params: OrderParams, domain: Domain, t: float) -> float:
    """``t**rho - a**rho`` (left) or ``b**rho - t**rho`` (right)."""
    t = float(t)
    if not domain.contains(t):
        raise DomainError(f"t={t:g} outside [{domain.a:g}, {domain.b:g}]")
    wt = to_w(t, params.rho)
    if params.side == "left":
        return max(wt - to_w(domain.a, params.rho), 0.0)
    return max(to_w(domain.b, params.rho) - wt, 0.0)


@dataclass(frozen=True)
class PowerFunc:
    """``x(t) = (t**rho - a**rho)**v`` (left) or ``(b**rho - t**rho)**v`` (right)."""

    v: float
    params: OrderParams
    domain: Domain

    def __post_init__(self) -> None:
        if not self.v > self.params.n - 1:
            raise DomainError(f"power rule needs v > n - 1 = {self.params.n - 1}, got v={self.v:g}")

    def expr(self) -> FuncSpec:
        """The function itself as an expression in ``t``."""
        p, d = self.params, self.domain
        if p.side == "left":
            text = f"(t^{p.rho!r} - {d.a ** p.rho!r})^{self.v!r}"
        else:
            text = f"({d.b ** p.rho!r} - t^{p.rho!r})^{self.v!r}"
        return FuncSpec.from_expr(text)

    def __call__(self, t: float) -> float:
        return _distance(self.params, self.domain, t) ** self.v


def power_rule(pf: PowerFunc, t: float) -> float:
    """Caputo-Katugampola derivative of ``pf`` at ``t``.

    ``rho**alpha Gamma(v+1)/Gamma(v-alpha+1) (t**rho - a**rho)**(v-alpha)``.
    """
    p = pf.params
    s = _distance(p, pf.domain, t)
    e = pf.v - p.alpha
    if s == 0.0:
        if e > 0:
            return 0.0
        if e < 0:
            return math.inf
    return p.rho**p.alpha * gamma(pf.v + 1) / gamma(e + 1) * s**e


def ml_eigenpair(lam: float, params: OrderParams, domain: Domain, t: float) -> tuple[float, float]:
    """``(E, lam rho**alpha E)`` with ``E = E_alpha(lam (t**rho - a**rho)**alpha)``.

    The second entry is the Caputo-Katugampola derivative of the first.
    """
    s = _distance(params, domain, t)
    value = mittag_leffler(params.alpha, lam * s**params.alpha)
    return value, lam * params.rho**params.alpha * value


def taylor_remainder(x: FuncSpec, params: OrderParams, domain: Domain, t: float) -> float:
    """``x(t) - sum_{k<n} rho**-k/k! (t**rho - a**rho)**k x_(k)(a)``.

    On the right side the anchor is ``b``, the distance ``b**rho - t**rho``
    and the ``k``-th term carries ``(-1)**k``.
    """
    p = params
    s = _distance(p, domain, t)
    anchor = np.array([to_w(domain.a if p.side == "left" else domain.b, p.rho)])
    total = float(x(float(t)))
    for k in range(p.n):
        dk = float(modified_diff(x, k, p.rho).at_w(anchor, p.rho)[0])
        total -= p.sign**k * p.rho ** (-k) / math.factorial(k) * s**k * dk
    return total
