"""Scalar expression parsing, evaluation, and exact derivatives.

Expressions are built from real literals, the reserved variables
``x``, ``y``, ``lambda``, ``eps``, the binary operators ``+ - * / ^``
(``^`` takes a non-negative integer literal exponent), unary minus, and
the functions ``sin``, ``cos``, ``exp``, ``tanh``, ``sqrt``.

Derivatives come from truncated Taylor (jet) arithmetic in the two phase
variables, carried to total order 3, so they are exact to rounding rather
than finite-difference approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Expression",
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Pow",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvalDomainError",
    "parse_expression",
    "to_source",
    "evaluate",
    "evaluate_array",
    "evaluate_jet",
    "evaluate_jet_env",
    "jet_linear",
    "Jet3",
    "free_variables",
]

VARIABLES = ("x", "y", "lambda", "eps")
FUNCTIONS = ("sin", "cos", "exp", "tanh", "sqrt")


class ExprError(Exception):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    """Malformed source text. ``offset`` is a 0-based byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier that is neither a reserved variable nor a function."""


class EvalDomainError(ExprError):
    """Evaluation left the real domain (sqrt of a negative, division by zero)."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    lhs: "Expression"
    rhs: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int  # non-negative


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expression"


Expression = Union[Num, Var, Neg, Bin, Pow, Call]


def free_variables(expr: Expression) -> set:
    """Set of reserved variable names referenced by ``expr``."""
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Num):
        return set()
    if isinstance(expr, Neg):
        return free_variables(expr.arg)
    if isinstance(expr, Pow):
        return free_variables(expr.base)
    if isinstance(expr, Call):
        return free_variables(expr.arg)
    return free_variables(expr.lhs) | free_variables(expr.rhs)


# ---------------------------------------------------------------------------
# Tokenizer / parser


_OPS = "+-*/^()"
_DIGITS = "0123456789"


def _byte_offset(src: str, i: int) -> int:
    return len(src[:i].encode("utf-8"))


def _tokenize(src: str):
    tokens = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch in _DIGITS or ch == ".":
            j = i
            seen_dot = False
            while j < n and (src[j] in _DIGITS or (src[j] == "." and not seen_dot)):
                if src[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k] in _DIGITS:
                    while k < n and src[k] in _DIGITS:
                        k += 1
                    j = k
            text = src[i:j]
            if text == ".":
                raise ExprSyntaxError("malformed number", _byte_offset(src, i))
            tokens.append(("num", text, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("ident", src[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", _byte_offset(src, i))
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(message, _byte_offset(self.src, tok[2]))

    def expect_op(self, op: str):
        kind, text, _ = self.peek()
        if kind != "op" or text != op:
            self.error(f"expected {op!r}")
        return self.advance()

    def parse(self) -> Expression:
        expr = self.expr()
        kind, text, _ = self.peek()
        if kind != "end":
            self.error(f"unexpected trailing input {text!r}")
        return expr

    def expr(self) -> Expression:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = Bin(text, node, self.term())
            else:
                return node

    def term(self) -> Expression:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Bin(text, node, self.unary())
            else:
                return node

    def unary(self) -> Expression:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        node = self.atom()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "^":
                self.advance()
                node = Pow(node, self.exponent())
            else:
                return node

    def exponent(self) -> int:
        kind, text, _ = self.peek()
        if kind != "num" or not text.isdigit():
            self.error("'^' requires a non-negative integer literal exponent")
        self.advance()
        return int(text)

    def atom(self) -> Expression:
        kind, text, pos = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            self.advance()
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in VARIABLES:
                return Var(text)
            raise UnknownIdentifierError(
                f"unknown identifier {text!r}", _byte_offset(self.src, pos)
            )
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected token {text!r}")


def parse_expression(source: str) -> Expression:
    """Parse ``source`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with a 0-based byte offset) on
    malformed input and :class:`UnknownIdentifierError` for identifiers
    outside the reserved set.
    """
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Serialization (round-trip stable: parse(to_source(e)) == e for parser output)

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 9


def _prec(expr: Expression) -> int:
    if isinstance(expr, Bin):
        return _PREC_ADD if expr.op in "+-" else _PREC_MUL
    if isinstance(expr, Neg):
        return _PREC_NEG
    if isinstance(expr, Pow):
        return _PREC_POW
    return _PREC_ATOM


def to_source(expr: Expression) -> str:
    """Serialize to the concrete syntax accepted by :func:`parse_expression`."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = to_source(expr.arg)
        if _prec(expr.arg) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, Pow):
        base = to_source(expr.base)
        if _prec(expr.base) < _PREC_POW:
            base = f"({base})"
        return f"{base}^{expr.exponent}"
    if isinstance(expr, Call):
        return f"{expr.fn}({to_source(expr.arg)})"
    if isinstance(expr, Bin):
        p = _prec(expr)
        lhs = to_source(expr.lhs)
        if _prec(expr.lhs) < p:
            lhs = f"({lhs})"
        rhs = to_source(expr.rhs)
        # parse is left-associative, so an equal-precedence right child
        # needs parentheses to survive a round trip
        if _prec(expr.rhs) <= p:
            rhs = f"({rhs})"
        return f"{lhs} {expr.op} {rhs}"
    raise TypeError(f"not an expression node: {expr!r}")


# ---------------------------------------------------------------------------
# Plain evaluation


def _apply_fn(fn: str, v: float) -> float:
    if fn == "sin":
        return math.sin(v)
    if fn == "cos":
        return math.cos(v)
    if fn == "exp":
        try:
            return math.exp(v)
        except OverflowError:
            return math.inf
    if fn == "tanh":
        return math.tanh(v)
    if fn == "sqrt":
        if v < 0.0:
            raise EvalDomainError(f"sqrt of negative value {v}")
        return math.sqrt(v)
    raise ValueError(fn)


def evaluate(
    expr: Expression, x: float = 0.0, y: float = 0.0, lam: float = 0.0, eps: float = 0.0
) -> float:
    """Evaluate ``expr`` at the given bindings in IEEE double precision."""
    env = {"x": x, "y": y, "lambda": lam, "eps": eps}

    def ev(e):
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Neg):
            return -ev(e.arg)
        if isinstance(e, Pow):
            b = ev(e.base)
            r = 1.0
            for _ in range(e.exponent):
                r *= b
            return r
        if isinstance(e, Call):
            return _apply_fn(e.fn, ev(e.arg))
        a, b = ev(e.lhs), ev(e.rhs)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise EvalDomainError("division by zero")
        return a / b

    return ev(expr)


# ---------------------------------------------------------------------------
# Jet arithmetic: truncated Taylor series in (x, y) to total order 3.
#
# Coefficients are stored in the fixed multi-index order below; c[k] is the
# Taylor coefficient of u^i v^j, i.e. (d^{i+j} f / dx^i dy^j) / (i! j!).

_MULTI = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3))
_POS = {m: k for k, m in enumerate(_MULTI)}

# precomputed (ka, kb, kout) triples for truncated multiplication
_MUL_TRIPLES = tuple(
    (_POS[(ia, ja)], _POS[(ib, jb)], _POS[(ia + ib, ja + jb)])
    for (ia, ja) in _MULTI
    for (ib, jb) in _MULTI
    if ia + ib + ja + jb <= 3
)

_ZERO = (0.0,) * 10


def _jconst(v: float):
    return (v,) + (0.0,) * 9


def _jadd(a, b):
    return tuple(ai + bi for ai, bi in zip(a, b))


def _jsub(a, b):
    return tuple(ai - bi for ai, bi in zip(a, b))


def _jneg(a):
    return tuple(-ai for ai in a)


def _jscale(a, s: float):
    return tuple(ai * s for ai in a)


def _jmul(a, b):
    out = [0.0] * 10
    for ka, kb, ko in _MUL_TRIPLES:
        out[ko] += a[ka] * b[kb]
    return tuple(out)


def _jcompose(u, f0: float, f1: float, f2: float, f3: float):
    """Taylor composition f(u) given f and derivatives at u's value."""
    du = (0.0,) + u[1:]
    du2 = _jmul(du, du)
    du3 = _jmul(du2, du)
    out = _jconst(f0)
    out = _jadd(out, _jscale(du, f1))
    out = _jadd(out, _jscale(du2, f2 / 2.0))
    out = _jadd(out, _jscale(du3, f3 / 6.0))
    return out


def _jinv(b):
    b0 = b[0]
    if b0 == 0.0:
        raise EvalDomainError("division by zero in jet evaluation")
    w = 1.0 / b0
    d = _jscale((0.0,) + b[1:], w)  # (b - b0)/b0, nilpotent
    d2 = _jmul(d, d)
    d3 = _jmul(d2, d)
    out = _jconst(1.0)
    out = _jsub(out, d)
    out = _jadd(out, d2)
    out = _jsub(out, d3)
    return _jscale(out, w)


def _jfn(fn: str, u):
    v = u[0]
    if fn == "sin":
        s, c = math.sin(v), math.cos(v)
        return _jcompose(u, s, c, -s, -c)
    if fn == "cos":
        s, c = math.sin(v), math.cos(v)
        return _jcompose(u, c, -s, -c, s)
    if fn == "exp":
        try:
            e = math.exp(v)
        except OverflowError:
            e = math.inf
        return _jcompose(u, e, e, e, e)
    if fn == "tanh":
        t = math.tanh(v)
        sech2 = 1.0 - t * t
        return _jcompose(u, t, sech2, -2.0 * t * sech2, -2.0 * sech2 * (1.0 - 3.0 * t * t))
    if fn == "sqrt":
        if v < 0.0:
            raise EvalDomainError(f"sqrt of negative value {v}")
        if v == 0.0:
            raise EvalDomainError("sqrt is not differentiable at 0 (jet evaluation)")
        s = math.sqrt(v)
        return _jcompose(u, s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v))
    raise ValueError(fn)


_FACT = (1.0, 1.0, 2.0, 6.0)


@dataclass(frozen=True)
class Jet3:
    """Value plus all (x, y) partial derivatives up to total order 3.

    ``coeffs`` are Taylor coefficients in the multi-index order
    ((0,0),(1,0),(0,1),(2,0),(1,1),(0,2),(3,0),(2,1),(1,2),(0,3));
    :meth:`partial` converts to derivative values. Supports enough
    arithmetic (+, -, scalar *) for linear changes of coordinates.
    """

    coeffs: tuple

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def partial(self, i: int, j: int = 0) -> float:
        """d^{i+j} f / dx^i dy^j at the expansion point."""
        return self.coeffs[_POS[(i, j)]] * _FACT[i] * _FACT[j]

    def __add__(self, other: "Jet3") -> "Jet3":
        return Jet3(_jadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "Jet3") -> "Jet3":
        return Jet3(_jsub(self.coeffs, other.coeffs))

    def __neg__(self) -> "Jet3":
        return Jet3(_jneg(self.coeffs))

    def __mul__(self, s: float) -> "Jet3":
        return Jet3(_jscale(self.coeffs, float(s)))

    __rmul__ = __mul__


def jet_linear(value: float, du: float, dv: float) -> Jet3:
    """Jet of an affine function value + du*u + dv*v of the jet variables."""
    return Jet3((value, du, dv) + (0.0,) * 7)


def evaluate_jet_env(expr: Expression, x_jet: Jet3, y_jet: Jet3, lam: float, eps: float) -> Jet3:
    """Evaluate ``expr`` with ``x`` and ``y`` bound to arbitrary jets.

    Used for composing with linear coordinate changes: the result's
    partials are taken with respect to the jet variables.
    """
    env = {"x": x_jet.coeffs, "y": y_jet.coeffs, "lambda": _jconst(lam), "eps": _jconst(eps)}
    return Jet3(_eval_jet(expr, env))


def evaluate_array(expr: Expression, x=0.0, y=0.0, lam=0.0, eps=0.0):
    """Vectorized evaluation over numpy arrays.

    Unlike :func:`evaluate` this does not raise on domain violations;
    out-of-domain points become nan/inf (measurement and display use).
    """
    import numpy as np

    env = {"x": x, "y": y, "lambda": lam, "eps": eps}

    def ev(e):
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Neg):
            return -ev(e.arg)
        if isinstance(e, Pow):
            b = ev(e.base)
            r = 1.0
            for _ in range(e.exponent):
                r = r * b
            return r
        if isinstance(e, Call):
            fn = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "tanh": np.tanh, "sqrt": np.sqrt}[e.fn]
            with np.errstate(all="ignore"):
                return fn(ev(e.arg))
        a, b = ev(e.lhs), ev(e.rhs)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        with np.errstate(all="ignore"):
            return a / b

    res = ev(expr)
    return np.broadcast_to(np.asarray(res, dtype=float), np.broadcast(
        np.asarray(x), np.asarray(y), np.asarray(lam), np.asarray(eps)
    ).shape).copy() if np.ndim(res) == 0 else res


def _eval_jet(e: Expression, env: dict):
    if isinstance(e, Num):
        return _jconst(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return _jneg(_eval_jet(e.arg, env))
    if isinstance(e, Pow):
        b = _eval_jet(e.base, env)
        r = _jconst(1.0)
        for _ in range(e.exponent):
            r = _jmul(r, b)
        return r
    if isinstance(e, Call):
        return _jfn(e.fn, _eval_jet(e.arg, env))
    a, b = _eval_jet(e.lhs, env), _eval_jet(e.rhs, env)
    if e.op == "+":
        return _jadd(a, b)
    if e.op == "-":
        return _jsub(a, b)
    if e.op == "*":
        return _jmul(a, b)
    return _jmul(a, _jinv(b))


def evaluate_jet(
    expr: Expression, x: float = 0.0, y: float = 0.0, lam: float = 0.0, eps: float = 0.0
) -> Jet3:
    """Evaluate ``expr`` together with exact (x, y) partials to order 3."""
    jx = (x, 1.0) + (0.0,) * 8
    jy = (y, 0.0, 1.0) + (0.0,) * 7
    env = {"x": jx, "y": jy, "lambda": _jconst(lam), "eps": _jconst(eps)}
    return Jet3(_eval_jet(expr, env))
