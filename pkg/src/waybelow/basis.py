"""Abstract bases: codes plus a way-below relation, with axiom verification.

The six rules (bottom, joins, monotonicity, interpolation, the meet slip
rule and the Wilker shrink rule) are checked rather than assumed.  Finite
carriers are verified exhaustively with boolean matrix algebra; infinite
carriers are sampled, with existential witnesses searched through
instance-supplied hints first and a bounded generic enumeration second.
An existential that is neither witnessed nor refuted within the bound is
reported as "unwitnessed", which is a distinct verdict from a refutation:
the relation is only semi-decidable in general.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .algebra import CodeAlgebra, canon_key, imposed_leq


class BasisError(Exception):
    pass


class SearchExhausted(Exception):
    """A bounded witness search ran out before deciding."""


DEFAULT_SEARCH_BOUND = 1000
DEFAULT_DYADIC_LEVELS = 3


class AbstractBasis:
    """A code algebra together with a decidable way-below relation.

    ``enumerate`` must be restartable (each call returns a fresh stream).
    ``cover_test(n, codes)`` decides whether the compact of n is covered by
    the opens of the finite set of codes; ``inhabited`` decides whether the
    open part of a code is nonempty.  The witness hints are optional
    shortcuts used by searches; every hint result is re-checked against the
    relation before being trusted.
    """

    def __init__(
        self,
        algebra: CodeAlgebra,
        waybelow: Callable,
        enumerate: Callable,
        cover_test: Optional[Callable] = None,
        inhabited: Optional[Callable] = None,
        name: str = "",
        algebraic: bool = False,
        sample_code: Optional[Callable] = None,
        interpolant_hint: Optional[Callable] = None,
        wilker_hint: Optional[Callable] = None,
        star_slip_hint: Optional[Callable] = None,
        meet_enlarge_hint: Optional[Callable] = None,
        point_membership: Optional[Callable] = None,
        point_certificates: Optional[Callable] = None,
        widen_hint: Optional[Callable] = None,
        join_all: Optional[Callable] = None,
    ):
        self.algebra = algebra
        self.waybelow = waybelow
        self.enumerate = enumerate
        self.cover_test = cover_test
        self.inhabited = inhabited
        self.name = name or algebra.name
        self.algebraic = algebraic
        self.sample_code = sample_code
        self.interpolant_hint = interpolant_hint
        self.wilker_hint = wilker_hint
        self.star_slip_hint = star_slip_hint
        self.meet_enlarge_hint = meet_enlarge_hint
        self.point_membership = point_membership
        self.point_certificates = point_certificates
        self.widen_hint = widen_hint
        self.join_all = join_all

    @property
    def is_finite(self):
        return self.algebra.is_finite

    def carrier(self):
        return self.algebra.sorted_carrier()

    def leq(self, n, m) -> bool:
        return imposed_leq(self.algebra, n, m)

    def __repr__(self):
        return "AbstractBasis(%s)" % self.name


class Exhaustive:
    """Check every instance over a finite carrier."""

    def __repr__(self):
        return "Exhaustive()"


@dataclass
class RandomUniverse:
    """Seeded random sampling policy."""

    count: int
    seed: int = 0

    def rng(self):
        return random.Random(self.seed)


@dataclass
class AxiomReport:
    """Per-rule verdicts with counterexamples and unwitnessed existentials."""

    verdicts: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    unwitnessed: list = field(default_factory=list)
    checked: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    MAX_RECORDED = 10

    def record_pass(self, rule, count):
        self.verdicts.setdefault(rule, "pass")
        self.checked[rule] = self.checked.get(rule, 0) + count

    def record_failure(self, rule, instance):
        self.verdicts[rule] = "fail"
        if len(self.counterexamples) < self.MAX_RECORDED:
            self.counterexamples.append((rule, instance))

    def record_unwitnessed(self, rule, instance):
        if self.verdicts.get(rule) != "fail":
            self.verdicts[rule] = "unwitnessed"
        if len(self.unwitnessed) < self.MAX_RECORDED:
            self.unwitnessed.append((rule, instance))

    @property
    def refuted(self):
        return any(v == "fail" for v in self.verdicts.values())

    @property
    def exhausted(self):
        return any(v == "unwitnessed" for v in self.verdicts.values())

    @property
    def ok(self):
        return not self.refuted and not self.exhausted

    def summary(self):
        lines = []
        for rule in sorted(self.verdicts):
            lines.append("%-14s %-12s (%d checked)" % (rule, self.verdicts[rule], self.checked.get(rule, 0)))
        for rule, inst in self.counterexamples:
            lines.append("  counterexample %s: %s" % (rule, _show(inst)))
        for rule, inst in self.unwitnessed:
            lines.append("  unwitnessed %s: %s" % (rule, _show(inst)))
        lines.extend("  note: %s" % n for n in self.notes)
        return "\n".join(lines)


def _show(instance):
    return "(" + ", ".join(repr(x) for x in instance) + ")"


# -- exhaustive engine (finite carriers) -------------------------------------

_EXHAUSTIVE_CAP = 300


def _tables(b: AbstractBasis):
    carrier = b.carrier()
    c = len(carrier)
    if c > _EXHAUSTIVE_CAP:
        raise BasisError("carrier of %d codes is too large for exhaustive checking" % c)
    idx = {code: i for i, code in enumerate(carrier)}
    wb = np.zeros((c, c), dtype=bool)
    leq = np.zeros((c, c), dtype=bool)
    for i, x in enumerate(carrier):
        for j, y in enumerate(carrier):
            wb[i, j] = bool(b.waybelow(x, y))
            leq[i, j] = bool(b.leq(x, y))
    star = np.zeros((c, c), dtype=np.int32)
    plus = None if b.algebra.plus is None else np.zeros((c, c), dtype=np.int32)
    for i, x in enumerate(carrier):
        for j, y in enumerate(carrier):
            star[i, j] = idx[b.algebra.star(x, y)]
            if plus is not None:
                plus[i, j] = idx[b.algebra.plus(x, y)]
    return carrier, idx, wb, leq, star, plus


def _first_indices(mask, limit=AxiomReport.MAX_RECORDED):
    hits = np.argwhere(mask)
    return [tuple(int(v) for v in row) for row in hits[:limit]]


def _check_exhaustive(b: AbstractBasis, report: AxiomReport):
    carrier, idx, wb, leq, star, plus = _tables(b)
    c = len(carrier)
    i0, i1 = idx[b.algebra.zero], idx[b.algebra.one]
    wbf = wb.astype(np.float32)

    if wb[i0, i0]:
        report.record_pass("zero", 1)
    else:
        report.record_failure("zero", (b.algebra.zero,))

    if plus is not None:
        lhs = wb[plus, :]  # [n, m, p] = plus(n,m) << p
        rhs = wb[:, None, :] & wb[None, :, :]
        for n, m, p in _first_indices(lhs != rhs):
            report.record_failure("plus", (carrier[n], carrier[m], carrier[p]))
        if (lhs == rhs).all():
            report.record_pass("plus", c ** 3)
    else:
        report.notes.append("plus rule skipped: algebra has no +")

    trans = (leq.astype(np.float32) @ wbf @ leq.astype(np.float32)) > 0
    bad = trans & ~wb
    for mp, np_ in _first_indices(bad):
        report.record_failure("monotone", (carrier[mp], carrier[np_]))
    if not bad.any():
        report.record_pass("monotone", c ** 2)

    comp = (wbf @ wbf) > 0
    bad_fwd = wb & ~comp
    bad_bwd = comp & ~wb
    for n, m in _first_indices(bad_fwd):
        report.record_failure("interpolate", (carrier[n], carrier[m]))
    for n, m in _first_indices(bad_bwd):
        report.record_failure("interpolate", (carrier[n], carrier[m]))
    if not bad_fwd.any() and not bad_bwd.any():
        report.record_pass("interpolate", c ** 2)

    # star slip: n << p*q iff some m has n << m << p and m << q
    t = (wb[:, :, None] & wb[:, None, :]).reshape(c, c * c).astype(np.float32)
    rhs_star = (wbf @ t).reshape(c, c, c) > 0
    lhs_star = wb[:, star.reshape(-1)].reshape(c, c, c)
    bad = lhs_star != rhs_star
    for n, p, q in _first_indices(bad):
        report.record_failure("star", (carrier[n], carrier[p], carrier[q]))
    if not bad.any():
        report.record_pass("star", c ** 3)

    if plus is not None:
        lhs_w = wb[:, plus.reshape(-1)].reshape(c, c, c)
        m3 = np.empty((c, c, c), dtype=np.float32)  # [p', n, q] = exists q': n << p'+q' and q' << q
        for pp in range(c):
            m3[pp] = wb[:, plus[pp, :]].astype(np.float32) @ wbf
        np.minimum(m3, 1.0, out=m3)
        rhs_w = np.tensordot(wbf.T, m3, axes=([1], [0])) > 0  # [p, n, q]
        rhs_w = np.swapaxes(rhs_w, 0, 1)
        bad = lhs_w & ~rhs_w
        for n, p, q in _first_indices(bad):
            report.record_failure("wilker", (carrier[n], carrier[p], carrier[q]))
        if not bad.any():
            report.record_pass("wilker", c ** 3)
    else:
        report.notes.append("wilker rule skipped: algebra has no +")
    return report


# -- sampled engine -----------------------------------------------------------


def _sampler(b: AbstractBasis, rng):
    if b.sample_code is not None:
        return lambda: b.sample_code(rng)
    if b.is_finite:
        carrier = b.carrier()
        return lambda: rng.choice(carrier)
    raise BasisError("basis %r has no code sampler for random universes" % b.name)


def _bounded_stream(b: AbstractBasis, bound=DEFAULT_SEARCH_BOUND):
    return itertools.islice(b.enumerate(), bound)


def _search_interpolant(b: AbstractBasis, n, m, bound=DEFAULT_SEARCH_BOUND):
    """Tri-state: (found, code) with found in {True, False-as-exhausted}."""
    if b.interpolant_hint is not None:
        k = b.interpolant_hint(n, m)
        if k is not None and b.waybelow(n, k) and b.waybelow(k, m):
            return True, k
    if b.algebraic:
        for k in (n, m):
            if b.waybelow(n, k) and b.waybelow(k, m):
                return True, k
    for k in _bounded_stream(b, bound):
        if b.waybelow(n, k) and b.waybelow(k, m):
            return True, k
    if b.is_finite and len(b.algebra.carrier) <= bound:
        return False, None  # genuinely refuted: the search was exhaustive
    return None, None


def _search_wilker(b: AbstractBasis, n, p, q, bound=DEFAULT_SEARCH_BOUND):
    if b.wilker_hint is not None:
        w = b.wilker_hint(n, p, q)
        if w is not None:
            pp, qq = w
            if b.waybelow(pp, p) and b.waybelow(qq, q) and b.waybelow(n, b.algebra.plus(pp, qq)):
                return True, w
    if b.algebraic:
        if b.waybelow(p, p) and b.waybelow(q, q):
            return True, (p, q)
    zero = b.algebra.zero
    candidates = list(_bounded_stream(b, max(2, int(bound ** 0.5))))
    for pp in candidates:
        if not b.waybelow(pp, p):
            continue
        for qq in candidates:
            if b.waybelow(qq, q) and b.waybelow(n, b.algebra.plus(pp, qq)):
                return True, (pp, qq)
    if b.is_finite and len(b.algebra.carrier) <= max(2, int(bound ** 0.5)):
        return False, None
    return None, None


def _search_star_slip(b: AbstractBasis, n, p, q, bound=DEFAULT_SEARCH_BOUND):
    if b.star_slip_hint is not None:
        m = b.star_slip_hint(n, p, q)
        if m is not None and b.waybelow(n, m) and b.waybelow(m, p) and b.waybelow(m, q):
            return True, m
    meet = b.algebra.star(p, q)
    if b.waybelow(n, meet) and b.waybelow(meet, p) and b.waybelow(meet, q):
        return True, meet
    for m in _bounded_stream(b, bound):
        if b.waybelow(n, m) and b.waybelow(m, p) and b.waybelow(m, q):
            return True, m
    if b.is_finite and len(b.algebra.carrier) <= bound:
        return False, None
    return None, None


def _check_sampled(b: AbstractBasis, universe: RandomUniverse, report: AxiomReport):
    rng = universe.rng()
    draw = _sampler(b, rng)
    alg = b.algebra
    zero, one = alg.zero, alg.one

    if b.waybelow(zero, zero):
        report.record_pass("zero", 1)
    else:
        report.record_failure("zero", (zero,))

    for _ in range(universe.count):
        n, m, p = draw(), draw(), draw()

        if alg.plus is not None:
            lhs = b.waybelow(alg.plus(n, m), p)
            rhs = b.waybelow(n, p) and b.waybelow(m, p)
            if lhs != rhs:
                report.record_failure("plus", (n, m, p))
            else:
                report.record_pass("plus", 1)

        if b.leq(m, n):
            # m' := m below n := p widened by monotonicity samples
            if b.waybelow(n, p) and not b.waybelow(m, p):
                report.record_failure("monotone", (m, n, p))
            else:
                report.record_pass("monotone", 1)
        if b.leq(m, p) and b.waybelow(n, m) and not b.waybelow(n, p):
            report.record_failure("monotone", (n, m, p))

        if b.waybelow(n, m):
            found, k = _search_interpolant(b, n, m)
            if found:
                if not (b.waybelow(n, k) and b.waybelow(k, m)):
                    report.record_failure("interpolate", (n, m, k))
                else:
                    report.record_pass("interpolate", 1)
            elif found is False:
                report.record_failure("interpolate", (n, m))
            else:
                report.record_unwitnessed("interpolate", (n, m))
        # transitivity side of the interpolation law
        if b.waybelow(n, m) and b.waybelow(m, p) and not b.waybelow(n, p):
            report.record_failure("interpolate", (n, m, p))

        meet = alg.star(m, p)
        if b.waybelow(n, meet):
            found, k = _search_star_slip(b, n, m, p)
            if found is True:
                report.record_pass("star", 1)
            elif found is False:
                report.record_failure("star", (n, m, p))
            else:
                report.record_unwitnessed("star", (n, m, p))
        else:
            # converse direction: a slip witness would refute the rule
            probes = [meet, draw()]
            if b.star_slip_hint is not None:
                w = b.star_slip_hint(n, m, p)
                if w is not None:
                    probes.append(w)
            bad = None
            for k in probes:
                if b.waybelow(n, k) and b.waybelow(k, m) and b.waybelow(k, p):
                    bad = k
                    break
            if bad is not None:
                report.record_failure("star", (n, m, p, bad))
            else:
                report.record_pass("star", 1)

        if alg.plus is not None and b.waybelow(n, alg.plus(m, p)):
            found, w = _search_wilker(b, n, m, p)
            if found is True:
                report.record_pass("wilker", 1)
            elif found is False:
                report.record_failure("wilker", (n, m, p))
            else:
                report.record_unwitnessed("wilker", (n, m, p))
    return report


def check_axioms(b: AbstractBasis, universe) -> AxiomReport:
    """Verify the abstract-basis rules over the given sampling policy."""
    report = AxiomReport()
    if isinstance(universe, Exhaustive):
        if not b.is_finite:
            raise BasisError("exhaustive checking needs a finite carrier")
        return _check_exhaustive(b, report)
    if isinstance(universe, RandomUniverse):
        return _check_sampled(b, universe, report)
    raise BasisError("unknown universe policy %r" % (universe,))


def interpolant(b: AbstractBasis, n, m, bound=DEFAULT_SEARCH_BOUND):
    """Some k with n << k << m, or None when n << m fails."""
    if not b.waybelow(n, m):
        return None
    found, k = _search_interpolant(b, n, m, bound)
    if found is True:
        return k
    if found is False:
        raise BasisError("interpolation refuted for (%r, %r): not an abstract basis" % (n, m))
    raise SearchExhausted("no interpolant for (%r, %r) within bound %d" % (n, m, bound))


def wilker_witness(b: AbstractBasis, n, p, q, bound=DEFAULT_SEARCH_BOUND):
    """A pair (p', q') with n << p'+q', p' << p, q' << q; None if n << p+q fails."""
    if b.algebra.plus is None:
        raise BasisError("wilker witnesses need +")
    if not b.waybelow(n, b.algebra.plus(p, q)):
        return None
    found, w = _search_wilker(b, n, p, q, bound)
    if found is True:
        return w
    if found is False:
        raise BasisError("wilker rule refuted for (%r, %r, %r)" % (n, p, q))
    raise SearchExhausted("no wilker witness for (%r, %r, %r) within bound" % (n, p, q))


@dataclass
class Classification:
    compact: bool
    filter: bool


def classify(b: AbstractBasis, universe=None) -> Classification:
    """Compactness is 1 << 1; the filter property additionally needs the meet rule."""
    compact = bool(b.waybelow(b.algebra.one, b.algebra.one))
    if not compact:
        return Classification(False, False)
    if universe is None:
        universe = Exhaustive() if b.is_finite else RandomUniverse(500, 0)
    star = b.algebra.star
    if isinstance(universe, Exhaustive):
        carrier, idx, wb, leq, star_t, plus_t = _tables(b)
        c = len(carrier)
        lhs = wb[:, star_t.reshape(-1)].reshape(c, c, c)
        rhs = wb[:, :, None] & wb[:, None, :]
        return Classification(compact, bool((lhs == rhs).all()))
    rng = universe.rng()
    draw = _sampler(b, rng)
    for _ in range(universe.count):
        m, p, q = draw(), draw(), draw()
        if b.waybelow(m, star(p, q)) != (b.waybelow(m, p) and b.waybelow(m, q)):
            return Classification(compact, False)
    return Classification(compact, True)


def or_closure(b: AbstractBasis, enum_bound=40) -> AbstractBasis:
    """Directed closure: codes become finite sets, with union as the new +."""
    alg = b.algebra
    fold = b.join_all
    if fold is None and alg.plus is not None:

        def fold(codes):
            acc = alg.zero
            for c in sorted(codes, key=canon_key):
                acc = alg.plus(acc, c)
            return acc

    cover = b.cover_test
    if cover is None:
        if fold is None:
            raise BasisError("or_closure needs a cover test or a + on the base")
        cover = lambda n, codes: b.waybelow(n, fold(codes))

    def wb(l, r):
        return all(cover(n, r) for n in l)

    def star(l, r):
        return frozenset(alg.star(x, y) for x in l for y in r)

    def plus(l, r):
        return frozenset(l) | frozenset(r)

    zero = frozenset()
    one = frozenset([alg.one])
    carrier = None
    if b.is_finite and len(alg.carrier) <= 12:
        base = list(alg.carrier)
        carrier = [frozenset(s) for r in range(len(base) + 1) for s in itertools.combinations(base, r)]

    def leq(l, r):
        # the imposed order on finite sets of codes is inclusion
        return frozenset(l) <= frozenset(r)

    def enum():
        yield zero
        seen = []
        for code in itertools.islice(b.enumerate(), enum_bound):
            seen.append(code)
            yield frozenset([code])
        for x, y in itertools.combinations(seen, 2):
            yield frozenset([x, y])

    def sample(rng):
        if b.sample_code is None and b.is_finite:
            pool = lambda: rng.choice(alg.carrier)
        else:
            pool = lambda: b.sample_code(rng)
        k = rng.choice([0, 1, 1, 1, 2])
        return frozenset(pool() for _ in range(k))

    def cover_family(l, fam):
        joined = frozenset().union(*[frozenset(c) for c in fam]) if fam else frozenset()
        return all(cover(n, joined) for n in l)

    inhabited = None
    if b.inhabited is not None:
        inhabited = lambda l: any(b.inhabited(n) for n in l)

    closure_alg = CodeAlgebra(zero, one, star, plus, carrier, leq=leq, name=b.name + "+or")
    return AbstractBasis(
        closure_alg,
        wb,
        enum,
        cover_test=cover_family,
        inhabited=inhabited,
        name=b.name + "+or",
        algebraic=b.algebraic,
        sample_code=sample,
    )


def dual_wilker_star(b: AbstractBasis, bound=DEFAULT_SEARCH_BOUND):
    """The meet transform of a filter basis: ((p,q),n) holds when both factors
    can be enlarged so that the enlarged meet is still way below n."""
    cls = classify(b)
    if not cls.filter:
        raise BasisError("dual wilker transform needs a filter basis (got %r)" % b.name)

    def relation(pq, n):
        p, q = pq
        if b.meet_enlarge_hint is not None:
            w = b.meet_enlarge_hint(p, q, n)
            if w is not None:
                pp, qq = w
                if b.waybelow(p, pp) and b.waybelow(q, qq) and b.waybelow(b.algebra.star(pp, qq), n):
                    return True
            return False
        for pp in _bounded_stream(b, int(bound ** 0.5)):
            if not b.waybelow(p, pp):
                continue
            for qq in _bounded_stream(b, int(bound ** 0.5)):
                if b.waybelow(q, qq) and b.waybelow(b.algebra.star(pp, qq), n):
                    return True
        if b.is_finite and len(b.algebra.carrier) <= int(bound ** 0.5):
            return False
        raise SearchExhausted("dual wilker search exhausted at (%r, %r, %r)" % (p, q, n))

    return relation
