"""Code algebras: the imposed 0/1/+/* structure, the derived order, and formal DNFs.

Codes name basic open/compact pairs of some space.  The binary operations
act on the codes themselves, not on what they denote, so no lattice
equations are assumed to hold on the nose; everything downstream is stable
under the congruence generated by the derived order.
"""

from __future__ import annotations

from fractions import Fraction


class AlgebraError(Exception):
    pass


class _Distinguished:
    """Symbolic code for the empty (0) or whole (1) subspace."""

    __slots__ = ("_label",)

    def __init__(self, label):
        self._label = label

    def __repr__(self):
        return self._label

    def canon_key(self):
        return (0,) if self._label == "0" else (1,)


ZERO = _Distinguished("0")
ONE = _Distinguished("1")


def canon_key(code):
    """Deterministic total order on codes, independent of hash seeds."""
    ck = getattr(code, "canon_key", None)
    if ck is not None:
        return ck()
    if isinstance(code, bool):
        return (2, int(code), 1)
    if isinstance(code, int):
        return (2, code, 1)
    if isinstance(code, Fraction):
        return (2, code.numerator, code.denominator)
    if isinstance(code, str):
        return (3, code)
    if isinstance(code, frozenset):
        return (5, tuple(sorted(canon_key(e) for e in code)))
    if isinstance(code, tuple):
        return (6, tuple(canon_key(e) for e in code))
    return (9, type(code).__name__, repr(code))


def finset(codes) -> frozenset:
    """Canonical finite set of codes."""
    return frozenset(codes)


def formal_dnf(products) -> frozenset:
    """Canonical formal sum of products: a finite set of finite sets."""
    return frozenset(frozenset(p) for p in products)


class CodeAlgebra:
    """A carrier of codes with distinguished 0, 1 and binary +, *.

    ``plus`` may be None for meet-only carriers (e.g. rectangle bases);
    operations must be closed on the carrier when one is given.  ``leq``
    optionally supplies a decidable semantic order, which must extend the
    order generated by the inference rules.
    """

    def __init__(self, zero, one, star, plus=None, carrier=None, leq=None, name=""):
        self.zero = zero
        self.one = one
        self.star = star
        self.plus = plus
        self.carrier = tuple(carrier) if carrier is not None else None
        self.leq = leq
        self.name = name
        self._closure = None

    @property
    def is_finite(self):
        return self.carrier is not None

    def sorted_carrier(self):
        if self.carrier is None:
            raise AlgebraError("algebra %r has no finite carrier" % self.name)
        return sorted(self.carrier, key=canon_key)

    def __repr__(self):
        return "CodeAlgebra(%s)" % (self.name or "anonymous")


def table_algebra(name, carrier, zero, one, plus_table, star_table, leq=None):
    """Build a finitely presented algebra from total operation tables (dicts)."""
    carrier = tuple(carrier)
    cset = set(carrier)
    if len(cset) != len(carrier):
        raise AlgebraError("carrier has duplicate codes")
    if zero not in cset or one not in cset:
        raise AlgebraError("zero/one not in carrier")
    for label, table in (("plus", plus_table), ("star", star_table)):
        for a in carrier:
            for b in carrier:
                if (a, b) not in table:
                    raise AlgebraError("%s table is partial: missing (%r, %r)" % (label, a, b))
                if table[(a, b)] not in cset:
                    raise AlgebraError("%s table leaves the carrier at (%r, %r)" % (label, a, b))

    def plus(a, b):
        return plus_table[(a, b)]

    def star(a, b):
        return star_table[(a, b)]

    return CodeAlgebra(zero, one, star, plus, carrier, leq=leq, name=name)


_CLOSURE_CAP = 64


def _rule_closure(alg: CodeAlgebra):
    """Least relation closed under the order rules, as an index matrix."""
    carrier = alg.sorted_carrier()
    n = len(carrier)
    if n > _CLOSURE_CAP:
        raise AlgebraError(
            "carrier too large (%d > %d) for rule closure; supply a semantic leq" % (n, _CLOSURE_CAP)
        )
    idx = {c: i for i, c in enumerate(carrier)}

    def at(code, what):
        try:
            return idx[code]
        except KeyError:
            raise AlgebraError("%s is not closed on the carrier (got %r)" % (what, code))

    rel = [[False] * n for _ in range(n)]
    i0, i1 = idx[alg.zero], idx[alg.one]
    for i in range(n):
        rel[i0][i] = True
        rel[i][i] = True
        rel[i][i1] = True
    if alg.plus is not None:
        # (k*a)+(k*b) below k*(a+b), instantiated over the whole carrier
        for k in carrier:
            for a in carrier:
                for b in carrier:
                    lhs = at(alg.plus(alg.star(k, a), alg.star(k, b)), "plus/star")
                    rhs = at(alg.star(k, alg.plus(a, b)), "star/plus")
                    rel[lhs][rhs] = True

    star_at = [[at(alg.star(a, b), "star") for b in carrier] for a in carrier]
    plus_at = None
    if alg.plus is not None:
        plus_at = [[at(alg.plus(a, b), "plus") for b in carrier] for a in carrier]

    changed = True
    while changed:
        changed = False
        # transitivity
        for k in range(n):
            rk = rel[k]
            for i in range(n):
                if rel[i][k]:
                    ri = rel[i]
                    for j in range(n):
                        if rk[j] and not ri[j]:
                            ri[j] = True
                            changed = True
        for a in range(n):
            for b in range(n):
                m = star_at[a][b]
                j = plus_at[a][b] if plus_at is not None else None
                for k in range(n):
                    # k below both factors iff k below the meet
                    both = rel[k][a] and rel[k][b]
                    if both and not rel[k][m]:
                        rel[k][m] = True
                        changed = True
                    if rel[k][m] and not both:
                        if not rel[k][a]:
                            rel[k][a] = True
                            changed = True
                        if not rel[k][b]:
                            rel[k][b] = True
                            changed = True
                    if j is None:
                        continue
                    # both summands below k iff the join is
                    both = rel[a][k] and rel[b][k]
                    if both and not rel[j][k]:
                        rel[j][k] = True
                        changed = True
                    if rel[j][k] and not both:
                        if not rel[a][k]:
                            rel[a][k] = True
                            changed = True
                        if not rel[b][k]:
                            rel[b][k] = True
                            changed = True
    return idx, rel


def imposed_leq(alg: CodeAlgebra, n, m) -> bool:
    """Derived order on codes: semantic if the algebra supplies one, else rule closure."""
    if alg.leq is not None:
        return bool(alg.leq(n, m))
    if not alg.is_finite:
        raise AlgebraError("imposed_leq needs a finite carrier or a semantic order")
    if alg._closure is None:
        alg._closure = _rule_closure(alg)
    idx, rel = alg._closure
    if n not in idx or m not in idx:
        raise AlgebraError("code outside the carrier")
    return rel[idx[n]][idx[m]]


def code_congruent(alg: CodeAlgebra, n, m) -> bool:
    """Mutual imposed order: the congruence identifying codes with one denotation."""
    return imposed_leq(alg, n, m) and imposed_leq(alg, m, n)


def ev(alg: CodeAlgebra, dnf):
    """Evaluate a formal sum of products back to a single code.

    Folds in canonical order; the empty product is 1 and the empty sum 0.
    The result is only meaningful up to the congruence.
    """
    terms = []
    for prod in sorted(dnf, key=canon_key):
        xs = sorted(prod, key=canon_key)
        if not xs:
            terms.append(alg.one)
            continue
        acc = xs[0]
        for x in xs[1:]:
            acc = alg.star(acc, x)
        terms.append(acc)
    if not terms:
        return alg.zero
    acc = terms[0]
    if len(terms) > 1:
        if alg.plus is None:
            raise AlgebraError("algebra %r has no + for a multi-term sum" % alg.name)
        for t in terms[1:]:
            acc = alg.plus(acc, t)
    return acc


def dnf_meet(r, s) -> frozenset:
    """Formal meet: all pairwise unions of products."""
    return frozenset(a | b for a in r for b in s)


def dnf_plus(r, s) -> frozenset:
    """Formal join: union of the two sums."""
    return frozenset(r) | frozenset(s)


def upper_order(r, l) -> bool:
    """Every product in l refines some product in r."""
    return all(any(lp <= p for lp in r) for p in l)


def dnf_congruent(l, r) -> bool:
    """Symmetrized upper order: the free-distributive-lattice congruence."""
    return upper_order(r, l) and upper_order(l, r)
