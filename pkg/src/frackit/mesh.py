"""Grids uniform in the transformed variable ``w = t**rho``.

Under ``w = tau**rho`` the Katugampola kernel
``tau**(rho-1) (t**rho - tau**rho)**(alpha-1) dtau`` becomes the classical
kernel ``(T - w)**(alpha-1) dw / rho``.  All quadrature therefore runs on
grids that are uniform in ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["Domain", "WGrid", "build_grid", "from_w", "to_w"]


@dataclass(frozen=True)
class Domain:
    """Closed interval ``[a, b]`` with ``0 < a < b < inf``."""

    a: float
    b: float

    def __post_init__(self) -> None:
        a, b = self.a, self.b
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"domain endpoints must be finite, got [{a:g}, {b:g}]")
        if a <= 0:
            raise DomainError(f"domain requires a > 0, got a={a:g}")
        if a >= b:
            raise DomainError(f"domain requires a < b, got [{a:g}, {b:g}]")

    def contains(self, t: float) -> bool:
        return self.a <= t <= self.b


def to_w(t, rho: float):
    """Map ``t -> t**rho`` (scalar or array)."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho:g}")
    if np.any(np.asarray(t) <= 0):
        raise DomainError("to_w: t must be positive")
    if rho == 1:
        return t
    return np.power(t, rho) if isinstance(t, np.ndarray) else float(t) ** rho


def from_w(w, rho: float):
    """Inverse of :func:`to_w`: ``w -> w**(1/rho)``."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho:g}")
    if np.any(np.asarray(w) <= 0):
        raise DomainError("from_w: w must be positive")
    if rho == 1:
        return w
    return np.power(w, 1.0 / rho) if isinstance(w, np.ndarray) else float(w) ** (1.0 / rho)


@dataclass(frozen=True)
class WGrid:
    """``N + 1`` nodes on ``[a, b]``, uniform in ``w = t**rho``."""

    domain: Domain
    rho: float
    N: int
    w_nodes: np.ndarray = field(repr=False, compare=False)
    t_nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def h(self) -> float:
        """Spacing in ``w``."""
        return (self.w_nodes[-1] - self.w_nodes[0]) / self.N

    @property
    def wa(self) -> float:
        return float(self.w_nodes[0])

    @property
    def wb(self) -> float:
        return float(self.w_nodes[-1])

    def __len__(self) -> int:
        return self.N + 1

    def node_index(self, t: float, tol: float = 1e-12) -> int | None:
        """Index of the node equal to ``t`` (within ``tol`` relative in ``w``), if any."""
        w = to_w(float(t), self.rho)
        x = (w - self.wa) / self.h
        i = int(round(x))
        if 0 <= i <= self.N and abs(w - self.w_nodes[i]) <= tol * max(abs(w), self.h):
            return i
        return None


def build_grid(domain: Domain, rho: float, N: int) -> WGrid:
    """Grid with ``N + 1`` nodes uniform in ``w`` on ``[a**rho, b**rho]``."""
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho:g}")
    if int(N) != N or N < 2:
        raise DomainError(f"grid needs an integer N >= 2, got {N}")
    N = int(N)
    wa = to_w(domain.a, rho)
    wb = to_w(domain.b, rho)
    i = np.arange(N + 1, dtype=float)
    # convex combination keeps both endpoints exact
    w = wa * (1.0 - i / N) + wb * (i / N)
    w[0], w[-1] = wa, wb
    t = from_w(w, rho).copy()
    t[0], t[-1] = domain.a, domain.b
    w.setflags(write=False)
    t.setflags(write=False)
    return WGrid(domain=domain, rho=float(rho), N=N, w_nodes=w, t_nodes=t)
