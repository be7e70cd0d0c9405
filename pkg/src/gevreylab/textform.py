"""Canonical text grammar for series.

    expression := ['-'] term (('+'|'-') term)*
    term       := rational? varpow* ['/' '(' expression ')']
    varpow     := var ['^' nat]
    rational   := nat ['/' nat]          -- '/' followed by digits, not '('

Variables are x1..xd (custom names may be mapped when parsing problem
files).  Juxtaposition multiplies; '*' is accepted as an optional separator.
The ``1/(poly)`` shorthand expands a reciprocal to the requested truncation
order and requires poly(0) != 0.

The printer emits terms in graded-lexicographic order, producing a canonical
form that parses back to the identical series.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .series import TruncatedSeries


class SeriesSyntaxError(ValueError):
    """Malformed series text, with a 1-based column position."""

    def __init__(self, message: str, column: int, line: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.column = column
        self.line = line


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+/^()*])
""",
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SeriesSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int, trunc: int, var_names=None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.dim = dim
        self.trunc = trunc
        if var_names is None:
            var_names = [f"x{j + 1}" for j in range(dim)]
        if len(var_names) != dim:
            raise ValueError("need one variable name per dimension")
        self.axes = {name: j for j, name in enumerate(var_names)}

    def peek(self, ahead=0):
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def take(self):
        tok = self.tokens[self.pos]
        if tok[0] != "end":
            self.pos += 1
        return tok

    def fail(self, message):
        raise SeriesSyntaxError(message, self.peek()[2])

    def parse(self) -> TruncatedSeries:
        result = self.expression()
        if self.peek()[0] != "end":
            self.fail(f"unexpected trailing input {self.peek()[1]!r}")
        return result

    def expression(self) -> TruncatedSeries:
        sign = 1
        kind, text, _ = self.peek()
        if kind == "op" and text in "+-":
            self.take()
            sign = -1 if text == "-" else 1
        acc = self.term().scale(sign)
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                nxt = self.term()
                acc = acc - nxt if text == "-" else acc + nxt
            else:
                return acc

    def term(self) -> TruncatedSeries:
        coeff = Fraction(1)
        saw_anything = False
        kind, text, _ = self.peek()
        if kind == "num":
            self.take()
            numerator = int(text)
            if (
                self.peek()[0] == "op"
                and self.peek()[1] == "/"
                and self.peek(1)[0] == "num"
            ):
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    self.fail("zero denominator")
                coeff = Fraction(numerator, den)
            else:
                coeff = Fraction(numerator)
            saw_anything = True
        series = TruncatedSeries.constant(self.dim, self.trunc, coeff)
        while True:
            kind, text, _ = self.peek()
            if kind == "name":
                series = series * self.varpow()
                saw_anything = True
            elif kind == "op" and text == "*":
                self.take()
            elif kind == "op" and text == "(":
                self.take()
                inner = self.expression()
                if not (self.peek()[0] == "op" and self.peek()[1] == ")"):
                    self.fail("expected ')'")
                self.take()
                series = series * inner
                saw_anything = True
            elif kind == "op" and text == "/" and self.peek(1)[1] == "(":
                self.take()
                self.take()
                inner = self.expression()
                if not (self.peek()[0] == "op" and self.peek()[1] == ")"):
                    self.fail("expected ')' closing the reciprocal")
                self.take()
                series = series * _reciprocal(inner, self)
                saw_anything = True
            else:
                break
        if not saw_anything:
            self.fail(f"expected a term, found {self.peek()[1] or 'end of input'!r}")
        return series

    def varpow(self) -> TruncatedSeries:
        kind, name, col = self.take()
        if name not in self.axes:
            raise SeriesSyntaxError(f"unknown variable {name!r}", col)
        axis = self.axes[name]
        exponent = 1
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, text, col2 = self.take()
            if kind != "num":
                raise SeriesSyntaxError("expected an integer exponent", col2)
            exponent = int(text)
        exps = tuple(exponent if j == axis else 0 for j in range(self.dim))
        if exponent > self.trunc:
            return TruncatedSeries.zero(self.dim, self.trunc)
        return TruncatedSeries.monomial(self.dim, self.trunc, exps)


def _reciprocal(u: TruncatedSeries, parser: _Parser) -> TruncatedSeries:
    c0 = u.constant_term()
    if not c0:
        parser.fail("denominator vanishes at the origin")
    # 1/u = (1/c0) * sum_k (1 - u/c0)^k; the bracket has positive order
    v = TruncatedSeries.one(u.dim, u.trunc) - u.scale(Fraction(1) / c0)
    acc = TruncatedSeries.one(u.dim, u.trunc)
    p = TruncatedSeries.one(u.dim, u.trunc)
    for _ in range(u.trunc):
        p = p * v
        if p.is_zero:
            break
        acc = acc + p
    return acc.scale(Fraction(1) / c0)


def parse_series(
    text: str, dim: int, trunc: int, var_names=None
) -> TruncatedSeries:
    """Parse an expression into an exact series truncated at ``trunc``."""
    return _Parser(text, dim, trunc, var_names).parse()


def _coeff_text(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    raise TypeError(
        "canonical text form is defined for rational coefficients only"
    )


def series_to_text(f: TruncatedSeries, var_names=None) -> str:
    """Canonical rendering: graded-lex term order, `p/q x1^a1 ... xd^ad`."""
    if var_names is None:
        var_names = [f"x{j + 1}" for j in range(f.dim)]
    if f.is_zero:
        return "0"
    chunks = []
    # degree first, earlier variables first within a degree
    for exps in sorted(f.terms, key=lambda e: (sum(e), tuple(-x for x in e))):
        c = f.terms[exps]
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        factors = []
        if mag != 1 or sum(exps) == 0:
            factors.append(_coeff_text(mag))
        for name, e in zip(var_names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        body = " ".join(factors)
        if not chunks:
            chunks.append(body if sign == "+" else f"-{body}")
        else:
            chunks.append(f"{sign} {body}")
    return " ".join(chunks)
