"""Closed-form scalar expressions: parsing, printing and jet evaluation.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2`` is
``-(x^2)`` and ``a^b^c`` is ``a^(b^c)``.  There are no named constants; ``e``
and ``pi`` are ordinary variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import jet as _jet
from .jet import Jet, JetDomainError

FUNCTION_NAMES = frozenset(_jet.FUNCTIONS)


class ExpressionError(ValueError):
    pass


class ParseError(ExpressionError):
    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownFunctionError(ParseError):
    pass


class UnboundVariableError(ExpressionError, KeyError):
    def __str__(self):
        return self.args[0]


class DomainError(ExpressionError):
    """Evaluation left the domain of an elementary function."""

    def __init__(self, message: str, subtree: "Expression"):
        self.subtree = subtree
        super().__init__(f"{message} in {subtree}")


# --- syntax tree -------------------------------------------------------------------------

class Expression:
    """Base class of the immutable syntax tree; supports operator construction."""

    precedence = 5

    def __str__(self):
        return to_string(self)

    def variables(self) -> frozenset:
        return frozenset()

    # building trees programmatically
    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Sub(self, _wrap(other))

    def __rsub__(self, other):
        return Sub(_wrap(other), self)

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Div(self, _wrap(other))

    def __rtruediv__(self, other):
        return Div(_wrap(other), self)

    def __pow__(self, other):
        return Pow(self, _wrap(other))

    def __neg__(self):
        return Neg(self)


def _wrap(x) -> Expression:
    if isinstance(x, Expression):
        return x
    if isinstance(x, str):
        return parse(x)
    x = float(x)
    return Neg(Num(-x)) if x < 0 else Num(x)


@dataclass(frozen=True, eq=True)
class Num(Expression):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expression):
    name: str

    def variables(self):
        return frozenset([self.name])


@dataclass(frozen=True, eq=True)
class Apply(Expression):
    func: str
    arg: Expression

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression
    precedence = 3

    def variables(self):
        return self.operand.variables()


@dataclass(frozen=True, eq=True)
class BinOp(Expression):
    left: Expression
    right: Expression
    symbol = "?"

    def variables(self):
        return self.left.variables() | self.right.variables()


class Add(BinOp):
    symbol, precedence = "+", 1


class Sub(BinOp):
    symbol, precedence = "-", 1


class Mul(BinOp):
    symbol, precedence = "*", 2


class Div(BinOp):
    symbol, precedence = "/", 2


class Pow(BinOp):
    symbol, precedence = "^", 4


_BINOPS = {"+": Add, "-": Sub, "*": Mul, "/": Div}


def apply(func: str, arg) -> Apply:
    if func not in FUNCTION_NAMES:
        raise UnknownFunctionError(f"unknown function {func!r}", 0)
    return Apply(func, _wrap(arg))


# --- printing -----------------------------------------------------------------------------

def _format_number(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    text = repr(v)
    if text in ("inf", "nan"):
        raise ExpressionError(f"cannot print non-finite literal {text}")
    return text


def to_string(node: Expression) -> str:
    """Print with the fewest parentheses that still re-parse to the same tree."""
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Apply):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand)
        if node.operand.precedence < Neg.precedence:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = to_string(node.left)
        if node.left.precedence <= Pow.precedence:
            base = f"({base})"
        exponent = to_string(node.right)
        if node.right.precedence < Neg.precedence:
            exponent = f"({exponent})"
        return f"{base}^{exponent}"
    if isinstance(node, BinOp):
        left, right = to_string(node.left), to_string(node.right)
        if node.left.precedence < node.precedence:
            left = f"({left})"
        if node.right.precedence <= node.precedence:
            right = f"({right})"
        return f"{left} {node.symbol} {right}"
    raise TypeError(f"not an expression: {node!r}")


# --- parsing --------------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(text.encode())))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, value, offset = self.peek()
        what = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {what}", offset, expected)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = _BINOPS[op](node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = _BINOPS[op](node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return Pow(base, self.factor())
        return base

    def atom(self):
        kind, value, offset = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(value))
        if kind == "ident":
            self.advance()
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if value not in FUNCTION_NAMES:
                    raise UnknownFunctionError(f"unknown function {value!r}", offset, FUNCTION_NAMES)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Apply(value, arg)
            return Var(value)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail({"NUMBER", "IDENT", "(", "-"})

    def expect(self, symbol):
        kind, value, _ = self.peek()
        if kind == "op" and value == symbol:
            self.advance()
            return
        self.fail({symbol, "+", "-", "*", "/", "^"})


def parse(text: str) -> Expression:
    """Parse ``text`` into an :class:`Expression` tree."""
    if isinstance(text, Expression):
        return text
    parser = _Parser(text)
    node = parser.expr()
    if parser.peek()[0] != "end":
        parser.fail({"+", "-", "*", "/", "^", "end of input"})
    return node


# --- evaluation -------------------------------------------------------------------------------

Binding = Union[float, Jet]


def evaluate(node: Expression, env: Mapping[str, Binding], nvars: int, order: int) -> Jet:
    """Evaluate ``node`` as a jet; ``env`` maps names to jets or plain numbers."""
    if isinstance(node, Num):
        return Jet.constant(node.value, nvars, order)
    if isinstance(node, Var):
        try:
            bound = env[node.name]
        except KeyError:
            raise UnboundVariableError(f"variable {node.name!r} is not bound") from None
        if isinstance(bound, Jet):
            return bound
        return Jet.constant(float(bound), nvars, order)
    try:
        if isinstance(node, Neg):
            return -evaluate(node.operand, env, nvars, order)
        if isinstance(node, Apply):
            return _jet.FUNCTIONS[node.func](evaluate(node.arg, env, nvars, order))
        left = evaluate(node.left, env, nvars, order)
        right = evaluate(node.right, env, nvars, order)
        if isinstance(node, Add):
            return left + right
        if isinstance(node, Sub):
            return left - right
        if isinstance(node, Mul):
            return left * right
        if isinstance(node, Div):
            return left / right
        if isinstance(node, Pow):
            return _jet.power(left, right)
    except JetDomainError as exc:
        raise DomainError(str(exc), node) from None
    raise TypeError(f"not an expression: {node!r}")


def eval_jet(expr, point: Mapping[str, float], max_order: int = 0,
             params: Mapping[str, float] | None = None) -> Jet:
    """Value and all partials up to ``max_order`` with respect to ``point``'s variables.

    Variables are differentiated in the insertion order of ``point``; names in
    ``params`` are bound as constants.
    """
    if not 0 <= max_order <= _jet.MAX_ORDER:
        raise ValueError(f"max_order must be in 0..{_jet.MAX_ORDER}")
    node = parse(expr)
    names = list(point)
    seeds = Jet.variables([point[k] for k in names], max_order)
    env: dict[str, Binding] = dict(params or {})
    env.update(zip(names, seeds))
    return evaluate(node, env, len(names), max_order)


def eval_value(expr, bindings: Mapping[str, float]) -> float:
    return float(eval_jet(expr, dict(bindings), 0).value)


def derivative(jet: Jet, names, point_names) -> float:
    """Partial of ``jet`` with respect to the variable names in ``names``."""
    alpha = [0] * len(point_names)
    for n in names:
        alpha[list(point_names).index(n)] += 1
    return float(np.asarray(jet.derivative(alpha)))
