"""A tiny expression language for scalar functions of ``t`` (and ``x``).

Grammar::

    expr   := term (("+"|"-") term)* ;
    term   := factor (("*"|"/") factor)* ;
    factor := unary ("^" factor)? ;
    unary  := "-" unary | atom ;
    atom   := NUMBER | "t" | "x" | FUNC "(" expr ")" | "(" expr ")" ;
    FUNC   := "exp" | "ln" | "sin" | "cos" | "sqrt" ;

Note that unary minus binds tighter than ``^``: ``-t^2`` is ``(-t)^2``.

Expressions evaluate element-wise on numpy arrays.  Domain violations
(``ln`` of a negative number, division by zero, ...) produce NaN or inf
instead of raising.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import (
    DifferentiationError,
    DomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownIdentifierError,
)
from .mesh import WGrid, to_w

__all__ = [
    "Binary",
    "Const",
    "Expr",
    "FuncSpec",
    "Unary",
    "Var",
    "diff",
    "evaluate",
    "modified_diff",
    "parse",
    "substitute_w",
    "to_text",
]

FUNCS = ("exp", "ln", "sin", "cos", "sqrt")
VARIABLES = ("t", "x")


# {{{ AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCS
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # "+", "-", "*", "/", "^"
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]

ZERO = Const(0.0)
ONE = Const(1.0)


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Unary):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)


def depends_on(e: Expr, var: str) -> bool:
    return var in free_vars(e)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def to_text(e: Expr) -> str:
    """Render an AST back into (fully parseable) source text."""
    if isinstance(e, Const):
        v = float(e.value)
        s = repr(v)
        if s.endswith(".0"):
            s = s[:-2]
        return f"({s})" if v < 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"-({to_text(e.arg)})"
        return f"{e.op}({to_text(e.arg)})"
    lt, rt = to_text(e.left), to_text(e.right)
    p = _PREC[e.op]
    if isinstance(e.left, Binary) and (_PREC[e.left.op] < p or (e.op == "^")):
        lt = f"({lt})"
    elif isinstance(e.left, Unary) and e.left.op == "neg" and e.op == "^":
        lt = f"({lt})"
    if isinstance(e.right, Binary) and (
        _PREC[e.right.op] < p or (_PREC[e.right.op] == p and e.op != "^")
    ):
        rt = f"({rt})"
    return f"{lt}{e.op}{rt}" if e.op in "*/^" else f"{lt} {e.op} {rt}"


# }}}


# {{{ parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, off = self.advance()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            e = Binary(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        base = self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return Binary("^", base, self.factor())
        return base

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.atom()

    def atom(self) -> Expr:
        kind, val, off = self.advance()
        if kind == "num":
            return Const(float(val))
        if kind == "id":
            if val in VARIABLES:
                return Var(val)
            if val in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(val, arg)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"expected a number, variable, function or '(', found {found}", off)


def parse(text: str) -> Expr:
    """Parse ``text`` into an AST; raises :class:`ExprSyntaxError` with the offset."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# }}}


# {{{ evaluation

_UNARY_NP = {
    "neg": np.negative,
    "exp": np.exp,
    "ln": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}


def _eval(e: Expr, env: Mapping[str, object]):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Unary):
        return _UNARY_NP[e.op](_eval(e.arg, env))
    lhs = _eval(e.left, env)
    rhs = _eval(e.right, env)
    if e.op == "+":
        return np.add(lhs, rhs)
    if e.op == "-":
        return np.subtract(lhs, rhs)
    if e.op == "*":
        return np.multiply(lhs, rhs)
    if e.op == "/":
        return np.divide(lhs, rhs)
    return np.power(np.asarray(lhs, dtype=float), rhs)


def evaluate(e: Expr, env: Mapping[str, object]):
    """Evaluate ``e`` with variables bound by ``env`` (floats or arrays).

    Returns a float for scalar inputs and an array otherwise.  Invalid
    operations yield non-finite values.
    """
    with np.errstate(all="ignore"):
        out = _eval(e, {k: (np.asarray(v, dtype=float) if not np.isscalar(v) else float(v)) for k, v in env.items()})
    if np.ndim(out) == 0:
        return float(out)
    return out


# }}}


# {{{ differentiation


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return Binary("-", a, b)


def _neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return _neg(b)
    if _is_const(b, -1.0):
        return _neg(a)
    return Binary("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return ONE
    if _is_const(b, 1.0):
        return a
    return Binary("^", a, b)


def diff(e: Expr, var: str) -> Expr:
    """Symbolic derivative of ``e`` with respect to ``var`` (lightly simplified)."""
    if not depends_on(e, var):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Unary):
        u = e.arg
        du = diff(u, var)
        if e.op == "neg":
            return _neg(du)
        if e.op == "exp":
            return _mul(e, du)
        if e.op == "ln":
            return _div(du, u)
        if e.op == "sin":
            return _mul(Unary("cos", u), du)
        if e.op == "cos":
            return _neg(_mul(Unary("sin", u), du))
        if e.op == "sqrt":
            return _div(du, _mul(Const(2.0), e))
        raise AssertionError(e.op)
    a, b = e.left, e.right
    if e.op == "+":
        return _add(diff(a, var), diff(b, var))
    if e.op == "-":
        return _sub(diff(a, var), diff(b, var))
    if e.op == "*":
        return _add(_mul(diff(a, var), b), _mul(a, diff(b, var)))
    if e.op == "/":
        return _div(_sub(_mul(diff(a, var), b), _mul(a, diff(b, var))), _pow(b, Const(2.0)))
    # power
    if depends_on(b, var):
        if depends_on(a, var):
            raise DifferentiationError(
                f"cannot differentiate {to_text(e)!r}: variable base with variable exponent"
            )
        return _mul(_mul(e, Unary("ln", a)), diff(b, var))
    if _is_const(b):
        exponent = Const(b.value - 1.0)
    else:
        exponent = _sub(b, ONE)
    return _mul(_mul(b, _pow(a, exponent)), diff(a, var))


def substitute_w(e: Expr, rho: float) -> Expr:
    """Rewrite ``e(t)`` as a function of ``w = t**rho`` (variable name ``"w"``).

    ``t`` becomes ``w^(1/rho)``; a power ``t^c`` with constant ``c`` is folded
    into ``w^(c/rho)`` (valid because ``w > 0``).
    """
    if isinstance(e, Var):
        if e.name != "t":
            return e
        return Var("w") if rho == 1 else Binary("^", Var("w"), Const(1.0 / rho))
    if isinstance(e, Const):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, substitute_w(e.arg, rho))
    if e.op == "^" and isinstance(e.left, Var) and e.left.name == "t" and isinstance(e.right, Const):
        return _pow(Var("w"), Const(e.right.value / rho))
    return Binary(e.op, substitute_w(e.left, rho), substitute_w(e.right, rho))


# }}}


# {{{ FuncSpec


@dataclass(frozen=True)
class FuncSpec:
    """A real function of ``t`` (optionally also of ``x``).

    Two variants:

    * expression: ``ast`` is set.  If ``wrho`` is set the AST is written in
      the variable ``w = t**wrho`` rather than ``t``.
    * sampled: ``grid`` and ``values`` are set; evaluation is piecewise
      linear in ``w`` on the grid.
    """

    ast: Expr | None = None
    wrho: float | None = None
    grid: WGrid | None = None
    values: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if (self.ast is None) == (self.grid is None):
            raise ValueError("FuncSpec needs exactly one of an expression or a sampled grid")
        if self.grid is not None:
            vals = np.asarray(self.values, dtype=float)
            if vals.shape != (self.grid.N + 1,):
                raise DomainError(
                    f"sampled FuncSpec needs {self.grid.N + 1} values, got shape {vals.shape}"
                )
            vals = vals.copy()
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    # constructors

    @classmethod
    def from_expr(cls, text: str | Expr) -> "FuncSpec":
        return cls(ast=parse(text) if isinstance(text, str) else text)

    @classmethod
    def sampled(cls, grid: WGrid, values) -> "FuncSpec":
        return cls(grid=grid, values=np.asarray(values, dtype=float))

    @classmethod
    def constant(cls, c: float) -> "FuncSpec":
        return cls(ast=Const(float(c)))

    @property
    def is_sampled(self) -> bool:
        return self.grid is not None

    @property
    def variables(self) -> frozenset[str]:
        if self.ast is None:
            return frozenset(("t",))
        names = set(free_vars(self.ast))
        if "w" in names:
            names.discard("w")
            names.add("t")
        return frozenset(names)

    def text(self) -> str:
        if self.ast is None:
            return f"<sampled on {self.grid.N + 1} nodes>"
        return to_text(self.ast)

    # evaluation

    def at_w(self, w, rho: float, x=None):
        """Evaluate at points given in ``w = t**rho`` coordinates."""
        if self.grid is not None:
            if rho != self.grid.rho:
                w = np.power(np.power(w, 1.0 / rho), self.grid.rho)
            return self._interp(w)
        env: dict[str, object] = {}
        if self.wrho is not None and self.wrho == rho:
            env["w"] = w
        else:
            t = np.power(w, 1.0 / rho) if rho != 1 else w
            if self.wrho is not None:
                env["w"] = np.power(t, self.wrho) if self.wrho != 1 else t
            else:
                env["t"] = t
        if x is not None:
            env["x"] = x
        return self._eval_env(env, w)

    def __call__(self, t, x=None):
        """Evaluate at ``t`` (and ``x`` when the function depends on it)."""
        if self.grid is not None:
            return self._interp(to_w(t, self.grid.rho))
        env: dict[str, object] = {}
        if self.wrho is not None:
            env["w"] = to_w(t, self.wrho) if self.wrho != 1 else t
        else:
            env["t"] = t
        if x is not None:
            env["x"] = x
        return self._eval_env(env, t)

    def _eval_env(self, env, like):
        out = evaluate(self.ast, env)
        if np.ndim(like) > 0 or (env.get("x") is not None and np.ndim(env["x"]) > 0):
            shape = np.broadcast_shapes(np.shape(like), np.shape(env.get("x", 0.0)))
            return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()
        return out

    def _interp(self, w):
        g = self.grid
        w_arr = np.asarray(w, dtype=float)
        tol = 1e-12 * max(abs(g.wa), abs(g.wb))
        if np.any(w_arr < g.wa - tol) or np.any(w_arr > g.wb + tol):
            raise DomainError("sampled FuncSpec evaluated outside its grid")
        out = np.interp(w_arr, g.w_nodes, self.values)
        return float(out) if out.ndim == 0 else out


def modified_diff(spec: FuncSpec, k: int, rho: float) -> FuncSpec:
    """k-fold application of ``t**(1-rho) d/dt``.

    Computed in ``w = t**rho`` coordinates as ``rho**k (d/dw)**k``.  Expression
    inputs are differentiated symbolically; sampled inputs (``k <= 2``) use
    finite differences in ``w`` on their grid, central inside and
    second-order one-sided at the endpoints.
    """
    if k < 0:
        raise DifferentiationError(f"derivative order must be nonnegative, got {k}")
    if k == 0:
        return spec
    if spec.grid is not None:
        return FuncSpec.sampled(spec.grid, _sampled_modified_diff(spec, k, rho))

    if spec.wrho is None:
        e = substitute_w(spec.ast, rho)
    elif spec.wrho == rho:
        e = spec.ast
    else:
        # re-express w' = t**spec.wrho in terms of w = t**rho
        e = _subst_var(spec.ast, "w", _pow(Var("w"), Const(spec.wrho / rho)))
    for _ in range(k):
        e = diff(e, "w")
    return FuncSpec(ast=_mul(Const(rho**k), e) if rho != 1 else e, wrho=rho)


def _subst_var(e: Expr, name: str, repl: Expr) -> Expr:
    if isinstance(e, Var):
        return repl if e.name == name else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, _subst_var(e.arg, name, repl))
    return Binary(e.op, _subst_var(e.left, name, repl), _subst_var(e.right, name, repl))


def fd_derivative(values: np.ndarray, h: float, k: int) -> np.ndarray:
    """k-th derivative (k in {1, 2}) of uniformly spaced samples."""
    f = np.asarray(values, dtype=float)
    out = np.empty_like(f)
    if k == 1:
        if f.size < 3:
            raise DifferentiationError("first differences need at least 3 samples")
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    elif k == 2:
        if f.size < 4:
            raise DifferentiationError("second differences need at least 4 samples")
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    else:
        raise DifferentiationError(f"finite differences support k <= 2, got k={k}")
    return out


def _sampled_modified_diff(spec: FuncSpec, k: int, rho: float) -> np.ndarray:
    g = spec.grid
    if k > 2:
        raise DifferentiationError(f"sampled functions support k <= 2, got k={k}")
    if not math.isclose(rho, g.rho, rel_tol=1e-14):
        raise DifferentiationError(
            f"sampled function lives on a rho={g.rho:g} grid, cannot differentiate with rho={rho:g}"
        )
    return rho**k * fd_derivative(spec.values, g.h, k)


# }}}
