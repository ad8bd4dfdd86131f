"""Product-integration weights for ``I^beta f(T) = 1/Gamma(beta) int (T-w)^(beta-1) f(w) dw``.

All routines work on a uniform grid ``w_j = w_0 + j h`` with ``f`` replaced
by its piecewise-linear interpolant; the cell moments of the kernel are
integrated exactly.  With ``G(s) = s^beta / Gamma(beta+1)`` and
``F(s) = s^(beta+1) / Gamma(beta+2)`` the weight of node ``j`` at target
node ``n`` (distance ``m = n - j``) is

* ``F(h) / h`` for ``m = 0``,
* ``(F((m+1)h) - 2F(mh) + F((m-1)h)) / h`` for ``0 < j < n``,
* ``G(nh) - (F(nh) - F((n-1)h)) / h`` for ``j = 0``.

The differences are evaluated in ``expm1/log1p`` form, which keeps the
rounding error at ``O(eps * m)`` instead of ``O(eps * m^2)`` and allows very
large ``beta`` without overflow.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = [
    "predictor_weights",
    "rl_integral_all",
    "rl_integral_last",
    "trapezoid_weights",
]


def _G(s: np.ndarray, beta: float) -> np.ndarray:
    """``s^beta / Gamma(beta + 1)`` for ``s > 0``."""
    if beta + 1 < 170:
        return np.power(s, beta) / math.gamma(beta + 1)
    return np.exp(beta * np.log(s) - math.lgamma(beta + 1))


@lru_cache(maxsize=64)
def _trapezoid_weights_cached(beta: float, h: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    p = beta + 1.0
    m = np.arange(1, n + 1, dtype=float)
    Gm = _G(m * h, beta)
    with np.errstate(divide="ignore"):
        lo = np.expm1(p * np.log1p(-1.0 / m))  # (1 - 1/m)^p - 1
    hi = np.expm1(p * np.log1p(1.0 / m))  # (1 + 1/m)^p - 1

    kern = np.empty(n + 1)
    kern[0] = float(_G(np.array(h), beta)) / p
    kern[1:] = Gm * (m / p) * (hi + lo)

    endw = np.empty(n + 1)
    endw[0] = 0.0
    endw[1:] = Gm * (1.0 + (m / p) * lo)

    kern.setflags(write=False)
    endw.setflags(write=False)
    return kern, endw


def trapezoid_weights(beta: float, h: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Toeplitz part and first-node weights of the product trapezoidal rule.

    Returns ``(kern, endw)`` with ``len == n + 1``: the weight of node ``j >= 1``
    at target node ``i`` is ``kern[i - j]`` and the weight of node 0 is
    ``endw[i]``.
    """
    if not beta > 0:
        raise ValueError(f"integration order must be positive, got {beta}")
    return _trapezoid_weights_cached(float(beta), float(h), int(n))


def rl_integral_all(f: np.ndarray, beta: float, h: float) -> np.ndarray:
    """``I^beta f`` at every node of a uniform grid anchored at node 0."""
    f = np.asarray(f, dtype=float)
    n = f.size - 1
    out = np.zeros_like(f)
    if n == 0:
        return out
    kern, endw = trapezoid_weights(beta, h, n)
    conv = np.convolve(f[1:], kern[:n])[:n]
    out[1:] = conv + endw[1:] * f[0]
    return out


def rl_integral_last(f: np.ndarray, beta: float, h: float) -> float:
    """``I^beta f`` at the last node only."""
    f = np.asarray(f, dtype=float)
    n = f.size - 1
    if n == 0:
        return 0.0
    kern, endw = trapezoid_weights(beta, h, n)
    return float(np.dot(kern[n - 1 :: -1], f[1:]) + endw[n] * f[0])


@lru_cache(maxsize=16)
def _predictor_weights_cached(beta: float, h: float, n: int) -> np.ndarray:
    m = np.arange(1, n + 1, dtype=float)
    out = np.empty(n + 1)
    out[0] = 0.0
    # int over the cell at distance (m-1, m] of the kernel: G(mh) - G((m-1)h)
    with np.errstate(divide="ignore"):
        out[1:] = -_G(m * h, beta) * np.expm1(beta * np.log1p(-1.0 / m))
    out.setflags(write=False)
    return out


def predictor_weights(beta: float, h: float, n: int) -> np.ndarray:
    """Product rectangle weights: ``out[m]`` multiplies ``f`` at distance ``m`` cells.

    ``I^beta f(w_{i+1}) ~ sum_{j<=i} out[i + 1 - j] f_j``.
    """
    return _predictor_weights_cached(float(beta), float(h), int(n))
