"""Arithmetic expressions for config-declared limit states.

Grammar, loosest to tightest::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | "+" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``0.5``. ``pi`` is a constant and
``sqrt``, ``exp``, ``ln`` are the only functions. Evaluation is vectorized:
variables may be bound to scalars or equal-length numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import EvalError, ExpressionSyntaxError, UnknownVariable

FUNCTIONS = ("sqrt", "exp", "ln")
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = set(names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def close(self, open_pos):
        kind, text, pos = self.peek()
        if kind != "op" or text != ")":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"unclosed parenthesis (reached {found} at {pos})", open_pos)
        self.take()

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                open_pos = self.peek()[2]
                self.expect("(")
                arg = self.expr()
                self.close(open_pos)
                return Call(text, arg)
            if text in CONSTANTS and text not in self.names:
                return Num(CONSTANTS[text])
            if text not in self.names:
                raise UnknownVariable(f"unknown variable {text!r} at position {pos}")
            return Var(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.close(pos)
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", pos)


def parse(text: str, names=()) -> Node:
    return _Parser(text, names).parse()


def to_string(node: Node) -> str:
    """Canonical, fully parenthesized rendering; ``parse(to_string(n)) == n``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    return f"({to_string(node.left)} {node.op} {to_string(node.right)})"


def variables(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return variables(node.operand if isinstance(node, Neg) else node.arg)
    return variables(node.left) | variables(node.right)


def _first_bad(mask):
    mask = np.atleast_1d(mask)
    return int(np.flatnonzero(mask)[0]) if mask.size > 1 else None


def evaluate(node: Node, env: Mapping[str, object]):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Call):
        a = np.asarray(evaluate(node.arg, env), dtype=float)
        if node.func == "sqrt":
            bad = a < 0
            if np.any(bad):
                raise EvalError("sqrt of a negative number", _first_bad(bad))
            return np.sqrt(a)
        if node.func == "ln":
            bad = a <= 0
            if np.any(bad):
                raise EvalError("ln of a non-positive number", _first_bad(bad))
            return np.log(a)
        with np.errstate(over="ignore"):
            return np.exp(a)
    left = np.asarray(evaluate(node.left, env), dtype=float)
    right = np.asarray(evaluate(node.right, env), dtype=float)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        bad = right == 0
        if np.any(bad):
            raise EvalError("division by zero", _first_bad(np.broadcast_to(bad, np.broadcast(left, right).shape)))
        return left / right
    # power: reject results that leave the reals
    shape = np.broadcast(left, right).shape
    neg_frac = (left < 0) & (right != np.round(right))
    zero_neg = (left == 0) & (right < 0)
    bad = np.broadcast_to(neg_frac | zero_neg, shape)
    if np.any(bad):
        raise EvalError("power outside the real domain", _first_bad(bad))
    with np.errstate(over="ignore"):
        return np.power(left, right)
