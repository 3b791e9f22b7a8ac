"""Tokenizer, parser and evaluator for the small scalar expression language.

The grammar is shared by the canonical text form of :class:`~qvoa.scalar.QScalar`
and by the ``.vop`` model language::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?
    exponent:= '-'? atom
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'

Names are resolved at evaluation time (``q``, ``k``, ``m`` in practice) and the
builtin functions are ``qint(n)`` and ``qpow(e)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Union


class ExprError(ValueError):
    """Parse or evaluation error, optionally carrying a source position."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),;{}=\[\]:<>|.\"])"
)


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if mt is None:
            raise ExprError(f"unexpected character {text[pos]!r}", line, col)
        kind = mt.lastgroup
        s = mt.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind == "num":
                out.append(Token("NUM", s, line, col))
            elif kind == "name":
                out.append(Token("NAME", s, line, col))
            elif kind == "op":
                out.append(Token("OP", s, line, col))
            col += len(s)
        pos = mt.end()
    out.append(Token("EOF", "", line, col))
    return out


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: "Node"
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    line: int = 0
    col: int = 0


Node = Union[Num, Var, Neg, BinOp, Pow, Call]

FUNCTIONS = ("qint", "qpow")


class Parser:
    """Recursive-descent parser over a token list; reusable by the DSL parser."""

    def __init__(self, tokens: list[Token], pos: int = 0):
        self.tokens = tokens
        self.pos = pos

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind == "OP" and self.tok.text == text:
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.kind == "OP" and t.text == text:
            return self.advance()
        found = t.text or "end of input"
        raise ExprError(f"expected {text!r}, found {found!r}", t.line, t.col)

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.tok.kind == "OP" and self.tok.text in "+-":
            t = self.advance()
            rhs = self.parse_term()
            node = BinOp(t.text, node, rhs, t.line, t.col)
        return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while self.tok.kind == "OP" and self.tok.text in "*/":
            t = self.advance()
            rhs = self.parse_unary()
            node = BinOp(t.text, node, rhs, t.line, t.col)
        return node

    def parse_unary(self) -> Node:
        if self.tok.kind == "OP" and self.tok.text == "-":
            t = self.advance()
            return Neg(self.parse_unary(), t.line, t.col)
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if self.tok.kind == "OP" and self.tok.text == "^":
            t = self.advance()
            if self.tok.kind == "OP" and self.tok.text == "-":
                s = self.advance()
                exp: Node = Neg(self.parse_atom(), s.line, s.col)
            else:
                exp = self.parse_atom()
            return Pow(base, exp, t.line, t.col)
        return base

    def parse_atom(self) -> Node:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return Num(int(t.text), t.line, t.col)
        if t.kind == "NAME":
            self.advance()
            if self.tok.kind == "OP" and self.tok.text == "(":
                self.advance()
                args = [self.parse_expr()]
                while self.accept(","):
                    args.append(self.parse_expr())
                self.expect(")")
                if t.text not in FUNCTIONS:
                    raise ExprError(f"unknown function {t.text!r}", t.line, t.col)
                return Call(t.text, tuple(args), t.line, t.col)
            return Var(t.text, t.line, t.col)
        if t.kind == "OP" and t.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        found = t.text or "end of input"
        raise ExprError(f"unexpected {found!r} in expression", t.line, t.col)


def parse(text: str) -> Node:
    p = Parser(tokenize(text))
    node = p.parse_expr()
    if p.tok.kind != "EOF":
        raise ExprError(f"trailing input {p.tok.text!r}", p.tok.line, p.tok.col)
    return node


def free_names(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return free_names(node.arg)
    if isinstance(node, BinOp):
        return free_names(node.left) | free_names(node.right)
    if isinstance(node, Pow):
        return free_names(node.base) | free_names(node.exp)
    return set().union(*(free_names(a) for a in node.args))


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(node: Node, prec: int = 0) -> str:
    """Pretty-print an AST so that ``parse(to_source(n)) == n`` up to positions."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        s = "-" + to_source(node.arg, 3)
        return f"({s})" if prec > 2 else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        # left-associative: right operand needs strictly higher precedence
        s = f"{to_source(node.left, p)} {node.op} {to_source(node.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(node, Pow):
        base = to_source(node.base, 4)
        if isinstance(node.exp, Neg):
            exp = "-" + to_source(node.exp.arg, 4)
        else:
            exp = to_source(node.exp, 4)
        return f"{base}^{exp}"
    return f"{node.func}({', '.join(to_source(a) for a in node.args)})"


def strip_positions(node: Node) -> Node:
    if isinstance(node, Num):
        return Num(node.value)
    if isinstance(node, Var):
        return Var(node.name)
    if isinstance(node, Neg):
        return Neg(strip_positions(node.arg))
    if isinstance(node, BinOp):
        return BinOp(node.op, strip_positions(node.left), strip_positions(node.right))
    if isinstance(node, Pow):
        return Pow(strip_positions(node.base), strip_positions(node.exp))
    return Call(node.func, tuple(strip_positions(a) for a in node.args))


def evaluate(node: Node, env: Mapping[str, object]):
    """Evaluate to a :class:`QScalar`. ``env`` maps names to ints, Fractions or QScalars."""
    from .scalar import QScalar, q_int, q_pow

    def ev(n: Node) -> QScalar:
        if isinstance(n, Num):
            return QScalar(n.value)
        if isinstance(n, Var):
            if n.name not in env:
                if n.name == "q":
                    return q_pow(1)
                raise ExprError(f"undefined name {n.name!r}", n.line, n.col)
            return QScalar.coerce(env[n.name])
        if isinstance(n, Neg):
            return -ev(n.arg)
        if isinstance(n, BinOp):
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if b.is_zero():
                raise ExprError("division by zero", n.line, n.col)
            return a / b
        if isinstance(n, Pow):
            base = ev(n.base)
            e = _constant(ev(n.exp), n)
            if e.denominator == 1:
                if base.is_zero() and e < 0:
                    raise ExprError("division by zero", n.line, n.col)
                return base ** int(e)
            mono = base.as_monomial()
            if mono is None or mono[0] != 1:
                raise ExprError("fractional power of a non-monomial", n.line, n.col)
            return q_pow(mono[1] * e)
        args = [ev(a) for a in n.args]
        if len(args) != 1:
            raise ExprError(f"{n.func} takes one argument", n.line, n.col)
        e = _constant(args[0], n)
        if n.func == "qpow":
            return q_pow(e)
        if e.denominator != 1:
            raise ExprError("qint of a non-integer", n.line, n.col)
        return q_int(int(e))

    return ev(node)


def _constant(value, node) -> Fraction:
    c = value.constant_value()
    if c is None:
        raise ExprError("exponent must be a rational constant", node.line, node.col)
    return c


def compile_rule(node: Node, env: Mapping[str, object]) -> Callable[[int], object]:
    """Close an expression over ``env`` as a function of the mode index ``m``."""

    def rule(m: int):
        return evaluate(node, {**env, "m": m})

    return rule
