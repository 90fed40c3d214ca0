"""Recursive-descent parser for observable expressions.

Grammar (whitespace is insignificant)::

    expr     = term { ("+" | "-") term } ;
    term     = power { ("*" | "/") power } ;
    power    = unary [ "^" power ] ;              (* right associative *)
    unary    = ("-" | "+") unary | primary ;
    primary  = number | "pi" | variable | function "(" expr ")" | "(" expr ")" ;
    variable = ("q" | "p") digits ;
    function = "sin" | "cos" | "exp" | "sqrt" | "ln" ;
    number   = digits [ "." [digits] ] [ exponent ] | "." digits [ exponent ] ;

Unary minus binds tighter than ``^``, so ``-q1^2`` is ``(-q1)^2``.  The
right operand of ``^`` must reduce to an integer constant.
"""

import re

from . import expr as E
from .errors import ExpressionSyntaxError, NonIntegerExponent, UnknownFunction, UnknownVariable

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)
_VAR = re.compile(r"([qp])(\d+)\Z")


def tokenize(text):
    tokens = []
    pos = 0
    end = len(text)
    while True:
        while pos < end and text[pos].isspace():
            pos += 1
        if pos >= end:
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", end))
    return tokens


class _Parser:
    def __init__(self, text, n):
        self.tokens = tokenize(text)
        self.i = 0
        self.n = n

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.tok
        if text != value or kind != "op":
            what = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"unexpected {what}", pos, repr(value))
        self.advance()

    def parse(self):
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos, "operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            rhs = self.term()
            node = E.Add(node, rhs) if op == "+" else E.Sub(node, rhs)
        return node

    def term(self):
        node = self.power()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            rhs = self.power()
            node = E.Mul(node, rhs) if op == "*" else E.Div(node, rhs)
        return node

    def power(self):
        base = self.unary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            pos = self.tok[2]
            exponent = E.simplify(self.power())
            if not isinstance(exponent, E.Const) or not exponent.value.is_integer():
                raise NonIntegerExponent(
                    f"exponent {E.to_text(exponent)} is not an integer constant", pos
                )
            return E.Pow(base, int(exponent.value))
        return base

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            arg = self.unary()
            return E.Neg(arg) if op == "-" else arg
        return self.primary()

    def primary(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return E.Const(float(text))
        if kind == "ident":
            self.advance()
            if self.tok[0] == "op" and self.tok[1] == "(":
                if text not in E.FUNCTIONS:
                    raise UnknownFunction(text, pos)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return E.Func(text, arg)
            if text == "pi":
                return E.PI
            if text in E.FUNCTIONS:
                raise ExpressionSyntaxError(f"function {text!r} needs an argument", self.tok[2], "'('")
            m = _VAR.match(text)
            if m is None or not 1 <= int(m.group(2)) <= self.n:
                raise UnknownVariable(text, self.n, pos)
            return E.Var(m.group(1), int(m.group(2)))
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {what}", pos, "number, variable, function or '('")


def parse_expr(text, n):
    """Parse ``text`` into a raw (unsimplified) expression tree."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0, "an expression")
    if int(n) < 1:
        raise ValueError("dimension n must be a positive integer")
    return _Parser(text, int(n)).parse()
