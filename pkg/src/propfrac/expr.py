"""A small arithmetic expression language in one variable ``x``.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | 'x' | 'e' | 'pi' | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Functions: ``exp ln sin cos sqrt abs`` (one argument) and ``pow(base, exp)``.

Expressions evaluate on floats, numpy arrays (elementwise) and
:class:`~propfrac.jet.Jet` objects (exact derivatives up to order 4).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .jet import MAX_ORDER, DomainError, Jet

__all__ = [
    "Const", "Var", "Neg", "BinOp", "Call", "ExprAst",
    "ExprError", "ExprSyntaxError", "UnknownIdentifier", "ArityError", "DomainError",
    "parse", "to_string", "evaluate", "eval_jet", "depends_on_x",
]


class ExprError(ValueError):
    """Base class for parse errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"syntax error at offset {offset}: {message}")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float
    name: str | None = None


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


ExprAst = Union[Const, Var, Neg, BinOp, Call]

FUNCTIONS = {"exp": 1, "ln": 1, "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "pow": 2}
CONSTANTS = {"e": math.e, "pi": math.pi}

# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos, tokens = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, val, off = self.take()
        if kind != "op" or val != op:
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {op!r}, found {found}", off)

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            value = float(val)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {val!r} overflows", off)
            return Const(value)
        if kind == "name":
            if self.peek()[0:2] == ("op", "("):
                if val not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {val!r}", off)
                self.take()
                args = [self.expr()]
                while self.peek()[0:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[val]:
                    raise ArityError(f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", off)
                return Call(val, tuple(args))
            if val == "x":
                return Var()
            if val in CONSTANTS:
                return Const(CONSTANTS[val], val)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} must be called", off)
            raise UnknownIdentifier(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off)


def parse(text: str) -> ExprAst:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    for i, ch in enumerate(text):
        if ord(ch) > 127:
            raise ExprSyntaxError(f"non-ASCII character {ch!r}", len(text[:i].encode()))
    p = _Parser(text)
    node = p.expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {val!r}", off)
    return node


# -- printing -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_const(node: Const) -> str:
    if node.name:
        return node.name
    v = node.value
    s = str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)
    return f"({s})" if v < 0 else s


def to_string(node: ExprAst) -> str:
    """Print with the minimum parentheses needed to re-parse to the same tree."""
    if isinstance(node, Const):
        return _fmt_const(node)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_string(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand)
        if isinstance(node.operand, BinOp) and node.operand.op in _PREC:
            inner = f"({inner})"
        return "-" + inner
    left, right = to_string(node.left), to_string(node.right)
    if node.op == "^":
        if isinstance(node.left, (BinOp, Neg)):
            left = f"({left})"
        if isinstance(node.right, BinOp) and node.right.op in _PREC:
            right = f"({right})"
        return f"{left}^{right}"
    prec = _PREC[node.op]
    if isinstance(node.left, BinOp) and node.left.op in _PREC and _PREC[node.left.op] < prec:
        left = f"({left})"
    if isinstance(node.right, BinOp) and node.right.op in _PREC and _PREC[node.right.op] <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def depends_on_x(node: ExprAst) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, Neg):
        return depends_on_x(node.operand)
    if isinstance(node, BinOp):
        return depends_on_x(node.left) or depends_on_x(node.right)
    return any(depends_on_x(a) for a in node.args)


# -- evaluation ---------------------------------------------------------------
# Values flowing through the evaluator are floats, numpy arrays or Jets.  The
# scalar branch uses ``math`` so that Jet value components match bit-for-bit.

def _bad(cond) -> bool:
    return bool(np.any(cond)) if isinstance(cond, np.ndarray) else bool(cond)


def _exp(u):
    if isinstance(u, Jet):
        return u.exp()
    if isinstance(u, np.ndarray):
        return np.exp(u)
    try:
        return math.exp(u)
    except OverflowError:
        return math.inf


def _ln(u):
    if isinstance(u, Jet):
        return u.log()
    if _bad(u <= 0):
        raise DomainError("ln of a non-positive value")
    return np.log(u) if isinstance(u, np.ndarray) else math.log(u)


def _sin(u):
    if isinstance(u, Jet):
        return u.sin()
    return np.sin(u) if isinstance(u, np.ndarray) else math.sin(u)


def _cos(u):
    if isinstance(u, Jet):
        return u.cos()
    return np.cos(u) if isinstance(u, np.ndarray) else math.cos(u)


def _sqrt(u):
    if isinstance(u, Jet):
        return u.sqrt()
    if _bad(u < 0):
        raise DomainError("sqrt of a negative value")
    return np.sqrt(u) if isinstance(u, np.ndarray) else math.sqrt(u)


def _abs(u):
    if isinstance(u, Jet):
        return u.abs()
    return np.abs(u) if isinstance(u, np.ndarray) else abs(u)


_UNARY = {"exp": _exp, "ln": _ln, "sin": _sin, "cos": _cos, "sqrt": _sqrt, "abs": _abs}


def _divide(u, v):
    if isinstance(v, Jet):
        return u / v  # Jet checks its own divisor
    if _bad(v == 0):
        raise DomainError("division by zero")
    return u / v


def _ipow(base, n: int):
    if n == 0:
        return 1.0
    if n < 0:
        return _divide(1.0, _ipow(base, -n))
    result = None
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _rpow(base, p: float):
    if isinstance(base, Jet):
        return base.rpow(p)
    if _bad(base <= 0):
        raise DomainError("non-integer power of a non-positive base")
    return np.power(base, p) if isinstance(base, np.ndarray) else math.pow(base, p)


def _power(base_node, exp_node, x):
    base = _eval(base_node, x)
    if depends_on_x(exp_node):
        if not isinstance(base, Jet) and _bad(base <= 0):
            raise DomainError("variable exponent needs a positive base")
        return _exp(_eval(exp_node, x) * _ln(base))
    p = _eval(exp_node, 0.0)
    if float(p).is_integer() and abs(p) <= 2**31:
        return _ipow(base, int(p))
    return _rpow(base, p)


def _eval(node, x):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        if node.name == "pow":
            return _power(node.args[0], node.args[1], x)
        return _UNARY[node.name](_eval(node.args[0], x))
    if node.op == "^":
        return _power(node.left, node.right, x)
    u, v = _eval(node.left, x), _eval(node.right, x)
    if node.op == "+":
        return u + v
    if node.op == "-":
        return u - v
    if node.op == "*":
        return u * v
    return _divide(u, v)


def evaluate(ast: ExprAst, x):
    """Evaluate at a float (returns float) or elementwise on a numpy array.

    Raises :class:`DomainError` rather than returning NaN.
    """
    if isinstance(x, np.ndarray):
        x = x.astype(float, copy=False)
        with np.errstate(all="ignore"):
            out = _eval(ast, x)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()
    return float(_eval(ast, float(x)))


def eval_jet(ast: ExprAst, x, order: int) -> Jet:
    """Value and exact derivatives ``1..order`` of ``ast`` at ``x``."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"jet order must be in [1, {MAX_ORDER}], got {order}")
    if isinstance(x, np.ndarray):
        x = x.astype(float, copy=False)
        with np.errstate(all="ignore"):
            out = _eval(ast, Jet.variable(x, order))
        if not isinstance(out, Jet):
            out = Jet.constant(np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy(), order)
        return Jet(tuple(np.broadcast_to(c, x.shape) for c in out.coeffs))
    out = _eval(ast, Jet.variable(float(x), order))
    if not isinstance(out, Jet):
        out = Jet.constant(float(out), order)
    return out
