"""Closed-form coefficient expressions in the variable ``t``.

Grammar (whitespace-insensitive)::

    expr   := term { ("+" | "-") term }
    term   := unary { ("*" | "/") unary }
    unary  := "-" unary | power
    power  := atom [ "^" unary ]
    atom   := NUMBER | "t" | "pi" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := sin | cos | tan | exp | ln | abs | arctan | sign

``^`` is right-associative and binds tighter than unary minus, so
``-2^2 == -4`` and ``2^-1 == 0.5``.  There is no implicit multiplication.

Parsed trees are immutable.  :func:`evaluate` walks the tree and reports
domain errors with the offending subexpression; :func:`compile_expr` turns a
tree into a fast Python callable (scalar or numpy) for use inside
integrators.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "Num", "T", "Pi", "Neg", "Func", "BinOp", "ExprAST",
    "ExprSyntaxError", "UnknownIdentifier", "ExprDomainError",
    "parse_coefficient", "evaluate", "unparse", "compile_expr",
    "substitute_t", "FUNCTIONS",
]


class ExprSyntaxError(ValueError):
    """Malformed expression text.  ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name: str, offset: int, text: str = ""):
        super().__init__(f"unknown identifier {name!r}", offset, text)
        self.name = name


class ExprDomainError(ArithmeticError):
    """Evaluation left the real domain (division by zero, ln of x <= 0, ...)."""

    def __init__(self, message: str, subexpr: "ExprAST | None" = None, t: float | None = None):
        where = f" in {unparse(subexpr)}" if subexpr is not None else ""
        at = f" at t={t!r}" if t is not None else ""
        super().__init__(f"{message}{where}{at}")
        self.subexpr = subexpr
        self.t = t


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class T:
    pass


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "ExprAST"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "ExprAST"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "ExprAST"
    right: "ExprAST"


ExprAST = Union[Num, T, Pi, Neg, Func, BinOp]

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "abs", "arctan", "sign")


# -- tokenizer / parser ----------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.advance()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off, self.text)

    def parse(self) -> ExprAST:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off, self.text)
        return node

    def expr(self) -> ExprAST:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAST:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> ExprAST:
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> ExprAST:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> ExprAST:
        kind, val, off = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "t":
                return T()
            if val == "pi":
                return Pi()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            raise UnknownIdentifier(val, off, self.text)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off, self.text)


def parse_coefficient(text: str) -> ExprAST:
    """Parse a coefficient expression such as ``"-sin(10*t)"``."""
    return _Parser(text).parse()


# -- evaluation ------------------------------------------------------------

def _sign(x: float) -> float:
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


_SCALAR_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "abs": abs,
    "arctan": math.atan,
    "sign": _sign,
}


def evaluate(ast: ExprAST, t: float) -> float:
    """Evaluate ``ast`` at ``t`` by direct recursion.

    Raises :class:`ExprDomainError` naming the offending subexpression when
    the value is not a finite real.
    """
    return _eval(ast, float(t))


def _eval(node: ExprAST, t: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, T):
        return t
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Neg):
        return -_eval(node.arg, t)
    if isinstance(node, Func):
        x = _eval(node.arg, t)
        if node.name == "ln" and x <= 0:
            raise ExprDomainError(f"ln of non-positive value {x!r}", node, t)
        try:
            y = _SCALAR_FUNCS[node.name](x)
        except (OverflowError, ValueError) as exc:
            raise ExprDomainError(str(exc), node, t) from None
        if not math.isfinite(y):
            raise ExprDomainError("non-finite result", node, t)
        return y
    if isinstance(node, BinOp):
        a = _eval(node.left, t)
        b = _eval(node.right, t)
        op = node.op
        if op == "+":
            y = a + b
        elif op == "-":
            y = a - b
        elif op == "*":
            y = a * b
        elif op == "/":
            if b == 0:
                raise ExprDomainError("division by zero", node, t)
            y = a / b
        else:
            if a == 0 and b < 0:
                raise ExprDomainError("zero raised to a negative power", node, t)
            if a < 0 and b != int(b):
                raise ExprDomainError("negative base with non-integer exponent", node, t)
            try:
                y = math.pow(a, b)
            except (OverflowError, ValueError) as exc:
                raise ExprDomainError(str(exc), node, t) from None
        if not math.isfinite(y):
            raise ExprDomainError("non-finite result", node, t)
        return y
    raise TypeError(f"not an expression node: {node!r}")


def unparse(ast: ExprAST) -> str:
    """Render a tree back to text that parses to an equivalent tree."""
    if isinstance(ast, Num):
        r = repr(float(ast.value))
        return f"({r})" if ast.value < 0 else r
    if isinstance(ast, T):
        return "t"
    if isinstance(ast, Pi):
        return "pi"
    if isinstance(ast, Neg):
        return f"(-{unparse(ast.arg)})"
    if isinstance(ast, Func):
        return f"{ast.name}({unparse(ast.arg)})"
    if isinstance(ast, BinOp):
        return f"({unparse(ast.left)} {ast.op} {unparse(ast.right)})"
    raise TypeError(f"not an expression node: {ast!r}")


def substitute_t(ast: ExprAST, replacement: ExprAST) -> ExprAST:
    """Return ``ast`` with every occurrence of ``t`` replaced."""
    if isinstance(ast, T):
        return replacement
    if isinstance(ast, Neg):
        return Neg(substitute_t(ast.arg, replacement))
    if isinstance(ast, Func):
        return Func(ast.name, substitute_t(ast.arg, replacement))
    if isinstance(ast, BinOp):
        return BinOp(ast.op, substitute_t(ast.left, replacement),
                     substitute_t(ast.right, replacement))
    return ast


# -- compilation -----------------------------------------------------------

_PY_NAMES = {"sin": "_m.sin", "cos": "_m.cos", "tan": "_m.tan", "exp": "_m.exp",
             "ln": "_m.log", "abs": "abs", "arctan": "_m.atan", "sign": "_sign"}
_NP_NAMES = {"sin": "_np.sin", "cos": "_np.cos", "tan": "_np.tan", "exp": "_np.exp",
             "ln": "_np.log", "abs": "_np.abs", "arctan": "_np.arctan", "sign": "_np.sign"}


def _source(node: ExprAST, names: dict[str, str], pow_name: str) -> str:
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, T):
        return "t"
    if isinstance(node, Pi):
        return repr(math.pi)
    if isinstance(node, Neg):
        return f"(-{_source(node.arg, names, pow_name)})"
    if isinstance(node, Func):
        return f"{names[node.name]}({_source(node.arg, names, pow_name)})"
    left = _source(node.left, names, pow_name)
    right = _source(node.right, names, pow_name)
    if node.op == "^":
        return f"{pow_name}({left}, {right})"
    return f"({left} {node.op} {right})"


def _is_constant(node: ExprAST) -> bool:
    if isinstance(node, T):
        return False
    if isinstance(node, (Neg, Func)):
        return _is_constant(node.arg)
    if isinstance(node, BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    return True


def compile_expr(ast: ExprAST, vectorized: bool = False) -> Callable:
    """Compile ``ast`` to a callable ``f(t)``.

    The scalar version uses :mod:`math`; a domain failure is re-raised as
    :class:`ExprDomainError` located by :func:`evaluate`.  The vectorized
    version maps numpy arrays and checks that every value is finite.
    """
    if vectorized:
        src = _source(ast, _NP_NAMES, "_np.power")
        raw = eval(f"lambda t: {src}", {"_np": np})  # noqa: S307 - generated from a parsed tree
        constant = _is_constant(ast)

        def vfunc(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(all="ignore"):
                out = raw(t)
            out = np.broadcast_to(np.asarray(out, dtype=float), t.shape).copy() if constant \
                else np.asarray(out, dtype=float)
            if not np.all(np.isfinite(out)):
                bad = float(np.ravel(t)[np.flatnonzero(~np.isfinite(np.ravel(out)))[0]])
                evaluate(ast, bad)
                raise ExprDomainError("non-finite result", ast, bad)
            return out

        return vfunc

    src = _source(ast, _PY_NAMES, "_m.pow")
    raw = eval(f"lambda t: {src}", {"_m": math, "_sign": _sign})  # noqa: S307

    def func(t: float) -> float:
        try:
            return raw(t)
        except (ArithmeticError, ValueError):
            evaluate(ast, t)
            raise ExprDomainError("evaluation failed", ast, t) from None

    return func
