"""Arithmetic expression grammar for config-defined coefficients.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``^`` is right associative and binds tighter than a leading minus, so
``-x^2`` is ``-(x^2)``.  Names resolve to variables supplied at compile time
or to the constants ``pi`` and ``e``.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source):
    tokens = []
    pos = 0
    source = source.rstrip()
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = source[pos:].lstrip()[:1]
            col = len(source) - len(source[pos:].lstrip()) + 1
            raise ExpressionError("unexpected character", token=bad, position=col)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(source) + 1))
    return tokens


# AST nodes are plain tuples: ("num", v) ("var", name) ("neg", a)
# ("bin", op, a, b) ("call", fname, a)


class _Parser:
    def __init__(self, source, variables):
        self.tokens = tokenize(source)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.tokens[self.i]

    def _advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text):
        if self.tok.text != text:
            self._fail(f"expected {text!r}")
        return self._advance()

    def _fail(self, message):
        t = self.tok
        raise ExpressionError(message, token=t.text or "<end>", position=t.pos)

    def parse(self):
        if self.tok.kind == "end":
            self._fail("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            self._fail("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self._advance().text
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self._advance().text
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self._advance()
            return ("neg", self.unary())
        if self.tok.text == "+":
            self._advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            self._advance()
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self._advance()
            return ("num", float(t.text))
        if t.kind == "name":
            self._advance()
            if self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise ExpressionError("unknown function", token=t.text, position=t.pos)
                self._advance()
                arg = self.expr()
                self._expect(")")
                return ("call", t.text, arg)
            if t.text in self.variables:
                return ("var", t.text)
            if t.text in CONSTANTS:
                return ("num", CONSTANTS[t.text])
            raise ExpressionError("unknown name", token=t.text, position=t.pos)
        if t.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        self._fail("expected a number, name or '('")


def parse(source, variables):
    """Parse ``source`` into an AST, allowing only the given variable names."""
    return _Parser(source, set(variables)).parse()


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": lambda a, b: a ** b,
}


def _build(node, index):
    kind = node[0]
    if kind == "num":
        v = node[1]
        return lambda p: v
    if kind == "var":
        k = index[node[1]]
        return lambda p: p[k]
    if kind == "neg":
        f = _build(node[1], index)
        return lambda p: -f(p)
    if kind == "call":
        fn = FUNCTIONS[node[1]]
        f = _build(node[2], index)
        return lambda p: fn(f(p))
    op = _BINOPS[node[1]]
    a, b = _build(node[2], index), _build(node[3], index)
    return lambda p: op(a(p), b(p))


class Expression:
    """A compiled scalar expression of a point.

    ``variables`` maps each admissible name to a coordinate index, e.g.
    ``{"x1": 0, "x": 0, "x2": 1, "y": 1}``.
    """

    def __init__(self, source, variables):
        self.source = source
        self.variables = dict(variables)
        self.ast = parse(source, self.variables)
        self._fn = _build(self.ast, self.variables)

    def __call__(self, p):
        return self._fn(p)

    def __repr__(self):
        return f"Expression({self.source!r})"

    # picklable: rebuild the closure from the source
    def __getstate__(self):
        return {"source": self.source, "variables": self.variables}

    def __setstate__(self, state):
        self.__init__(state["source"], state["variables"])


def coordinate_names(dim, prefix="x"):
    """Variable table ``x1..x{dim}`` plus the aliases x, y, z for ``prefix='x'``."""
    names = {f"{prefix}{i + 1}": i for i in range(dim)}
    if prefix == "x":
        for alias, i in zip("xyz", range(min(dim, 3))):
            names[alias] = i
    elif dim == 1:
        names[prefix] = 0
    return names


def compile_expression(source, dim, prefix="x"):
    return Expression(source, coordinate_names(dim, prefix))
