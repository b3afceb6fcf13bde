"""Compile expressions to matrix pipelines and evaluate to requested precision.

Evaluation shrinks the input interval until the exact image is narrower
than the requested width, then verifies a single output code against the
compiled relation.  The returned interval always contains the true value;
running out of depth is an error, never a wrong answer.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

from . import intervals as iv
from .expr import Add, Lit, Max, Min, Mul, Neg, Sub, Var, eval_rational
from .matrices import Matrix, builtin_real_matrix, compose, pair_matrix


class DepthExhausted(Exception):
    pass


class RationalInterval(NamedTuple):
    lower: Fraction
    upper: Fraction

    def __contains__(self, x):
        return self.lower <= Fraction(x) <= self.upper

    @property
    def width(self):
        return self.upper - self.lower

    def __str__(self):
        return "[%s, %s]" % (self.lower, self.upper)


def compile_expr(e) -> Matrix:
    """Structural compilation: literals become constants, nodes compose builtins."""
    if isinstance(e, Lit):
        return builtin_real_matrix("const", e.value)
    if isinstance(e, Var):
        return builtin_real_matrix("identity")
    if isinstance(e, Neg):
        return compose(builtin_real_matrix("negate"), compile_expr(e.arg))
    if isinstance(e, Sub):
        return compile_expr(Add(e.left, Neg(e.right)))
    kinds = {Add: "add", Mul: "mul", Min: "min", Max: "max"}
    for node, kind in kinds.items():
        if isinstance(e, node):
            left = compile_expr(e.left)
            right = compile_expr(e.right)
            return compose(builtin_real_matrix(kind), pair_matrix(left, right))
    raise TypeError("not an expression: %r" % (e,))


def _grid_candidates(lo, hi, eps):
    """Centers y on the pitch eps/2 grid with [lo, hi] inside (y - eps, y + eps)."""
    pitch = eps / 2
    first = (hi - eps) / pitch
    last = (lo + eps) / pitch
    start = math.floor(first) + 1
    stop = math.ceil(last) - 1
    ys = [pitch * k for k in range(start, stop + 1)]
    ys.sort(key=lambda y: (abs(y), y))
    return ys


def evaluate(e, x, eps, max_depth: int = 60) -> RationalInterval:
    """An interval of width exactly 2*eps around the value of e at x."""
    x, eps = Fraction(x), Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    rho = compile_expr(e)
    delta = Fraction(1)
    for _ in range(max_depth):
        n = iv.make_interval(x, delta)
        pieces = rho.image_pieces(n)
        if pieces is not None:
            pieces = iv.merge_pieces(pieces)
            if len(pieces) == 1 and pieces[0][1] - pieces[0][0] < 2 * eps:
                lo, hi = pieces[0]
                for y in _grid_candidates(lo, hi, eps):
                    if rho.rel(n, iv.make_interval(y, eps)) is True:
                        return RationalInterval(y - eps, y + eps)
        delta = delta / 2
    raise DepthExhausted("no verified interval for %r at %s within depth %d" % (e, x, max_depth))
