"""Expression syntax: rational literals, x, unary minus, + - *, min, max."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class ParseError(Exception):
    def __init__(self, message, position):
        super().__init__("%s at offset %d" % (message, position))
        self.position = position


@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Min:
    left: object
    right: object


@dataclass(frozen=True)
class Max:
    left: object
    right: object


def tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == "/":
                k = j + 1
                while k < len(text) and text[k].isdigit():
                    k += 1
                if k == j + 1:
                    raise ParseError("bad rational literal", i)
                tokens.append(("lit", Fraction(int(text[i:j]), int(text[j + 1:k])), i))
                i = k
                continue
            tokens.append(("lit", Fraction(int(text[i:j])), i))
            i = j
            continue
        if text.startswith("min", i) or text.startswith("max", i):
            tokens.append((text[i:i + 3], None, i))
            i += 3
            continue
        if ch == "x":
            tokens.append(("var", None, i))
            i += 1
            continue
        if ch in "+-*(),":
            tokens.append((ch, None, i))
            i += 1
            continue
        raise ParseError("unexpected character %r" % ch, i)
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError("expected %r, got %r" % (kind, tok[0]), tok[2])
        return tok

    def parse(self):
        e = self.sum()
        tok = self.next()
        if tok[0] != "end":
            raise ParseError("trailing input", tok[2])
        return e

    def sum(self):
        e = self.product()
        while self.peek() in ("+", "-"):
            op = self.next()[0]
            rhs = self.product()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def product(self):
        e = self.atom()
        while self.peek() == "*":
            self.next()
            e = Mul(e, self.atom())
        return e

    def atom(self):
        kind, value, pos = self.next()
        if kind == "lit":
            return Lit(value)
        if kind == "var":
            return Var()
        if kind == "-":
            return Neg(self.atom())
        if kind == "(":
            e = self.sum()
            self.expect(")")
            return e
        if kind in ("min", "max"):
            self.expect("(")
            left = self.sum()
            self.expect(",")
            right = self.sum()
            self.expect(")")
            return Min(left, right) if kind == "min" else Max(left, right)
        raise ParseError("unexpected token %r" % kind, pos)


def parse_expr(text: str):
    """Parse an expression; * binds tighter than + and -, unary minus tightest."""
    return _Parser(text).parse()


def print_expr(e) -> str:
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return "-%s" % _atomic(e.arg)
    if isinstance(e, Add):
        return "%s + %s" % (print_expr(e.left), _summand(e.right))
    if isinstance(e, Sub):
        return "%s - %s" % (print_expr(e.left), _summand(e.right))
    if isinstance(e, Mul):
        return "%s*%s" % (_atomic(e.left), _atomic(e.right))
    if isinstance(e, Min):
        return "min(%s, %s)" % (print_expr(e.left), print_expr(e.right))
    if isinstance(e, Max):
        return "max(%s, %s)" % (print_expr(e.left), print_expr(e.right))
    raise TypeError("not an expression: %r" % (e,))


def _atomic(e):
    if isinstance(e, (Add, Sub, Mul)):
        return "(%s)" % print_expr(e)
    return print_expr(e)


def _summand(e):
    if isinstance(e, (Add, Sub)):
        return "(%s)" % print_expr(e)
    return print_expr(e)


def eval_rational(e, x) -> Fraction:
    """Direct exact evaluation; the independent oracle for the matrix pipeline."""
    x = Fraction(x)
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -eval_rational(e.arg, x)
    if isinstance(e, Add):
        return eval_rational(e.left, x) + eval_rational(e.right, x)
    if isinstance(e, Sub):
        return eval_rational(e.left, x) - eval_rational(e.right, x)
    if isinstance(e, Mul):
        return eval_rational(e.left, x) * eval_rational(e.right, x)
    if isinstance(e, Min):
        return min(eval_rational(e.left, x), eval_rational(e.right, x))
    if isinstance(e, Max):
        return max(eval_rational(e.left, x), eval_rational(e.right, x))
    raise TypeError("not an expression: %r" % (e,))
