"""Scalar special functions: Gamma, Beta and the one-parameter Mittag-Leffler function."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .errors import DomainError, NumericalOverflowError, PoleError

__all__ = [
    "MLQuery",
    "beta",
    "gamma",
    "lgamma",
    "ml_domain",
    "ml_zmax",
    "mittag_leffler",
]

#: Largest argument for which Gamma is finite in double precision.
GAMMA_OVERFLOW = 171.6243769563027

ML_ALPHA_MAX = 5.0
ML_Z_MIN = -30.0
_LOG_DBL_MAX = math.log(sys.float_info.max)
_ML_MAX_TERMS = 200_000


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function for real ``x`` away from the poles.

    Backed by the C library's Lanczos-type approximation with reflection for
    small arguments; relative accuracy is a few ulps on ``[0.1, 170]``.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("gamma: argument is NaN")
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma: pole at x={x:g}")
    if x > GAMMA_OVERFLOW:
        raise NumericalOverflowError(f"gamma: overflow for x={x:g}")
    try:
        return math.gamma(x)
    except OverflowError as exc:  # huge negative non-integers underflow instead
        raise NumericalOverflowError(f"gamma: overflow for x={x:g}") from exc


def lgamma(x: float) -> float:
    """``log|Gamma(x)|``; used where Gamma itself would overflow."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"lgamma: pole at x={x:g}")
    return math.lgamma(x)


def beta(x: float, y: float) -> float:
    """Euler Beta function ``B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)``."""
    if not (x > 0 and y > 0):
        raise DomainError(f"beta: arguments must be positive, got ({x:g}, {y:g})")
    if x + y < GAMMA_OVERFLOW:
        return gamma(x) * gamma(y) / gamma(x + y)
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


# {{{ Mittag-Leffler


@dataclass(frozen=True)
class MLQuery:
    """Order and argument of ``E_alpha(z)``."""

    alpha: float
    z: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= ML_ALPHA_MAX:
            raise DomainError(
                f"mittag_leffler: alpha must lie in (0, {ML_ALPHA_MAX:g}], got {self.alpha:g}"
            )
        if math.isnan(self.z):
            raise DomainError("mittag_leffler: argument is NaN")


def _log_max_term(alpha: float, logz: float) -> float:
    # the log-term k*logz - lgamma(alpha*k + 1) is concave in k; its maximiser
    # satisfies alpha*psi(alpha*k + 1) = logz, i.e. alpha*k ~ exp(logz/alpha) - 1/2
    ratio = logz / alpha
    if ratio > 700:
        return math.inf
    kstar = max(0.0, (math.exp(ratio) - 0.5) / alpha)
    lo = max(0, int(kstar) - 25)
    return max(k * logz - math.lgamma(alpha * k + 1) for k in range(lo, int(kstar) + 26))


def ml_zmax(alpha: float) -> float:
    """Largest ``z`` for which no term of the series for ``E_alpha(z)`` overflows."""
    MLQuery(alpha, 0.0)
    lo, hi = 0.0, 1.0
    while _log_max_term(alpha, hi) < _LOG_DBL_MAX:
        lo, hi = hi, 2.0 * hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _log_max_term(alpha, mid) < _LOG_DBL_MAX:
            lo = mid
        else:
            hi = mid
    return math.exp(lo)


def ml_domain(alpha: float) -> tuple[float, float]:
    """Supported argument interval ``[zmin, zmax]`` for order ``alpha``.

    Negative arguments are limited to ``-30`` and, for small ``alpha``, to
    ``-zmax``: beyond that the alternating series has terms that overflow.
    """
    zmax = ml_zmax(alpha)
    return max(ML_Z_MIN, -zmax), zmax


def _ml_term(alpha: float, z: float, k: int) -> float:
    if k == 0:
        return 1.0
    if z == 0.0:
        return 0.0
    arg = alpha * k + 1
    if arg < 170.0:
        try:
            p = math.pow(abs(z), k)
        except OverflowError:
            p = math.inf
        if math.isfinite(p):
            t = p / math.gamma(arg)
            return -t if (z < 0 and k % 2) else t
    logt = k * math.log(abs(z)) - math.lgamma(arg)
    if logt > _LOG_DBL_MAX:
        raise NumericalOverflowError(
            f"mittag_leffler: series term {k} overflows for alpha={alpha:g}, z={z:g}"
        )
    t = math.exp(logt)
    return -t if (z < 0 and k % 2) else t


def _ml_series(alpha: float, z: float) -> tuple[float, float]:
    """Compensated partial sums; returns ``(sum, sum of |terms|)``."""
    s = 0.0
    c = 0.0
    abs_sum = 0.0
    small = 0
    for k in range(_ML_MAX_TERMS):
        term = _ml_term(alpha, z, k)
        abs_sum += abs(term)
        # Neumaier's variant of Kahan summation
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        if abs(term) < 1e-16 * abs(s + c):
            small += 1
            if small == 3:
                return s + c, abs_sum
        else:
            small = 0
    raise NumericalOverflowError(
        f"mittag_leffler: series did not converge in {_ML_MAX_TERMS} terms"
    )


def _ml_series_mp(alpha: float, z: float, abs_sum: float) -> float:
    import mpmath

    # |E_alpha(z)| is not tiny on the supported range, so log10(sum |terms|)
    # bounds the digits lost to cancellation
    extra = max(0, int(math.ceil(math.log10(max(abs_sum, 1.0)))))
    with mpmath.workdps(30 + extra):
        zz = mpmath.mpf(z)
        al = mpmath.mpf(alpha)
        s = mpmath.mpf(0)
        tol = mpmath.mpf(10) ** (-25)
        prev = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k / mpmath.gamma(al * k + 1)
            s += term
            if k > 2 and abs(term) <= abs(prev) and abs(term) < tol * max(abs(s), tol):
                break
            prev = term
            k += 1
        return float(s)


def mittag_leffler(alpha: float | MLQuery, z: float | None = None) -> float:
    """One-parameter Mittag-Leffler function ``E_alpha(z) = sum z^k / Gamma(alpha k + 1)``.

    Accepts either ``mittag_leffler(alpha, z)`` or ``mittag_leffler(MLQuery(...))``.
    Arguments outside ``ml_domain(alpha)`` are rejected.  For negative ``z``
    the alternating series can cancel badly; when the double-precision result
    would lose more than six digits the same series is re-summed in extended
    precision.
    """
    q = alpha if isinstance(alpha, MLQuery) else MLQuery(float(alpha), float(z))
    a, x = q.alpha, q.z
    if x < ML_Z_MIN:
        raise DomainError(f"mittag_leffler: z={x:g} below supported minimum {ML_Z_MIN:g}")
    if x < 0 and _log_max_term(a, math.log(-x)) >= _LOG_DBL_MAX:
        raise DomainError(
            f"mittag_leffler: z={x:g} below supported minimum {-ml_zmax(a):g} for alpha={a:g}"
        )
    if x > 0 and _log_max_term(a, math.log(x)) >= _LOG_DBL_MAX:
        raise NumericalOverflowError(
            f"mittag_leffler: z={x:g} exceeds zmax for alpha={a:g}"
        )

    value, abs_sum = _ml_series(a, x)
    if x < 0:
        cond = abs_sum / max(abs(value), sys.float_info.min)
        if cond > 1e3 or abs_sum > 1e8:
            return _ml_series_mp(a, x, abs_sum)
    return value


# }}}
