"""Recursive-descent parser for the expression grammar.

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := '-' factor | base ('^' exponent)?
    base     := number | ident | '(' expr ')' | func '(' expr ')'
    exponent := ['-'|'+'] number | '(' expr ')'

``-x^2`` is ``-(x^2)`` and ``w^3/2`` is ``(w^3)/2``; a rational exponent needs parentheses, ``w^(3/2)``.
Constant folding turns ``(3/2)`` into the exact rational.
"""

from __future__ import annotations

import re
from fractions import Fraction

from . import core
from .core import Expr

__all__ = ["ParseError", "parse_expr"]


class ParseError(ValueError):
    """Syntax error, unknown identifier or arity mismatch, with a position."""

    def __init__(self, message: str, source: str, position: int):
        super().__init__(f"{message} at position {position}: {source!r}")
        self.source = source
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ParseError(f"unexpected character {source[bad]!r}", source, bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def _number(text: str):
    if any(c in text for c in ".eE"):
        return float(text)
    return Fraction(int(text))


class _Parser:
    def __init__(self, source, variables, params):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = variables
        self.params = params

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] == "end":
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", self.source, tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", self.source, tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = core.add(e, rhs) if op == "+" else core.add(e, core.neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            e = core.mul(e, rhs) if op == "*" else core.div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return core.neg(self.factor())
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            return core.power(base, self.exponent())
        return base

    def exponent(self) -> Expr:
        tok = self.peek()
        if tok[1] == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        negative = False
        if tok[1] in ("-", "+"):
            negative = self.take()[1] == "-"
            tok = self.peek()
        if tok[0] != "number":
            raise ParseError("exponent must be a signed number or a parenthesised expression", self.source, tok[2])
        self.take()
        value = _number(tok[1])
        return core.const(-value if negative else value)

    def base(self) -> Expr:
        tok = self.take()
        kind, text, pos = tok
        if kind == "number":
            return core.const(_number(text))
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "ident":
            if text in core.FUNCTIONS:
                open_tok = self.peek()
                if open_tok[1] != "(":
                    raise ParseError(f"function {text!r} needs an argument list", self.source, open_tok[2])
                self.take()
                if self.peek()[1] == ")":
                    raise ParseError(f"function {text!r} takes exactly 1 argument, got 0", self.source, self.peek()[2])
                arg = self.expr()
                nargs = 1
                while self.peek()[1] == ",":
                    self.take()
                    self.expr()
                    nargs += 1
                if nargs != 1:
                    raise ParseError(f"function {text!r} takes exactly 1 argument, got {nargs}", self.source, pos)
                self.expect(")")
                return core.apply_function(text, arg)
            if text in self.variables:
                return core.var(text)
            if text in self.params:
                return core.const(self.params[text])
            raise ParseError(f"unknown identifier {text!r}", self.source, pos)
        if kind == "end":
            raise ParseError("unexpected end of input", self.source, pos)
        raise ParseError(f"unexpected {text!r}", self.source, pos)


def parse_expr(source: str, chart, params=None) -> Expr:
    """Parse ``source`` over the variables of ``chart``.

    ``chart`` is a :class:`~trivsys.geometry.Chart` or a sequence of names.
    ``params`` binds extra identifiers to numeric constants before parsing.
    """
    names = getattr(chart, "names", chart)
    variables = set(names)
    params = dict(params or {})
    clash = variables & params.keys()
    if clash:
        raise ValueError(f"parameters shadow chart variables: {sorted(clash)}")
    for name in list(variables) + list(params):
        if name in core.FUNCTIONS:
            raise ValueError(f"{name!r} is a reserved function name")
    return _Parser(source, variables, params).parse()
