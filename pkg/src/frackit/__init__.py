"""Numerical Katugampola fractional calculus: operators, closed forms, Gronwall bounds and an FDE solver."""

from .errors import FrackitError
from .expr import FuncSpec, parse
from .mesh import Domain, WGrid, build_grid
from .operators import OperatorResult, OrderParams, caputo_deriv, frac_integral, rl_deriv
from .specfun import gamma, mittag_leffler

__all__ = [
    "Domain",
    "FrackitError",
    "FuncSpec",
    "OperatorResult",
    "OrderParams",
    "WGrid",
    "build_grid",
    "caputo_deriv",
    "frac_integral",
    "gamma",
    "mittag_leffler",
    "parse",
    "rl_deriv",
]

__version__ = "0.1.0"
