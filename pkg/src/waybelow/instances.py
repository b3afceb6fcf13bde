"""Concrete bases and point representations.

Spatial bases for the real line and the closed unit interval (rational
interval codes), finite powerset and formal-DNF bases, finitely presented
bases loaded from documents, rounded ideals and the interval consistency
predicate.
"""

from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction
from typing import Callable, Iterable, Optional

from . import intervals as iv
from .algebra import (
    ONE,
    ZERO,
    AlgebraError,
    CodeAlgebra,
    canon_key,
    dnf_meet,
    dnf_plus,
    formal_dnf,
    imposed_leq,
    table_algebra,
    upper_order,
)
from .basis import AbstractBasis, AxiomReport, BasisError, Exhaustive, _sampler


class LoadError(Exception):
    pass


# -- spatial interval bases ---------------------------------------------------


def _interval_sampler(clip, compact):
    lo, hi = (Fraction(-8), Fraction(8)) if clip is None else clip

    def single(rng):
        e = rng.randint(0, 5)
        den = 2 ** e
        q = Fraction(rng.randint(int(lo * den), int(hi * den)), den)
        d = Fraction(rng.randint(1, 4 * den), den)
        return iv.make_union([(q, d)], clip)

    def sample(rng):
        roll = rng.random()
        if roll < 0.04:
            return ZERO
        if roll < 0.08:
            return ONE
        if roll < 0.85:
            return single(rng)
        parts = [single(rng) for _ in range(rng.randint(2, 3))]
        acc = parts[0]
        for p in parts[1:]:
            acc = iv.plus_codes(acc, p, clip)
        return acc

    return sample


def _make_interval_basis(name, clip, compact, meet_only=False):
    plus = None if meet_only else (lambda a, b: iv.plus_codes(a, b, clip))
    algebra = CodeAlgebra(
        ZERO,
        ONE,
        lambda a, b: iv.star_codes(a, b, clip),
        plus,
        carrier=None,
        leq=lambda a, b: iv.leq_codes(a, b, clip),
        name=name,
    )

    def wb(n, m):
        return iv.waybelow_codes(n, m, clip, compact)

    def cover(n, codes):
        acc = ZERO
        for c in sorted(codes, key=canon_key):
            acc = iv.plus_codes(acc, c, clip)
        return wb(n, acc)

    sampler = _interval_sampler(clip, compact)
    if meet_only:
        base_sampler = sampler

        def sampler(rng):  # noqa: F811 - deliberate override for the meet basis
            code = base_sampler(rng)
            while not (code is ZERO or code is ONE or code.is_single):
                code = base_sampler(rng)
            return code

    basis = AbstractBasis(
        algebra,
        wb,
        lambda: iv.enumerate_codes(clip),
        cover_test=cover,
        inhabited=iv.inhabited_code,
        name=name,
        algebraic=False,
        sample_code=sampler,
        interpolant_hint=lambda n, m: iv.interpolant_codes(n, m, clip, compact),
        wilker_hint=None if meet_only else (lambda n, p, q: iv.wilker_split(n, p, q, clip, compact)),
        star_slip_hint=lambda n, p, q: iv.star_slip_witness(n, p, q, clip, compact),
        meet_enlarge_hint=(lambda p, q, n: iv.meet_enlarge(p, q, n, clip, compact)) if compact else None,
        point_membership=lambda x, code: iv.contains_point(code, x, clip),
        point_certificates=lambda x: _dyadic_certificates(x, clip),
        widen_hint=lambda code, t: iv.widen(code, t, clip),
    )
    basis.clip = clip
    basis.compact_space = compact
    return basis


def _dyadic_certificates(x, clip):
    x = Fraction(x)
    i = 0
    while True:
        code = iv.make_union([(x, Fraction(1, 2 ** i))], clip)
        if code is not ZERO:
            yield code
        i += 1


def real_line_basis() -> AbstractBasis:
    """Lattice basis on the line: open rational intervals and finite unions."""
    return _make_interval_basis("real-line", None, compact=False)


def unit_interval_basis() -> AbstractBasis:
    """Lattice basis on [0,1]: interval codes clipped to the unit interval."""
    return _make_interval_basis("unit-interval", iv.UNIT_CLIP, compact=True)


def real_line_meet_basis() -> AbstractBasis:
    """Meet-only view of the line basis (single intervals, no +)."""
    return _make_interval_basis("real-line-meet", None, compact=False, meet_only=True)


def unit_interval_meet_basis() -> AbstractBasis:
    return _make_interval_basis("unit-interval-meet", iv.UNIT_CLIP, compact=True, meet_only=True)


# -- finite bases -------------------------------------------------------------


def discrete_basis(k: int) -> AbstractBasis:
    """Powerset basis of a k-point discrete space; way-below is inclusion."""
    if not 1 <= k <= 4:
        raise BasisError("discrete_basis wants 1 <= k <= 4")
    points = range(k)
    carrier = [frozenset(s) for r in range(k + 1) for s in itertools.combinations(points, r)]
    algebra = CodeAlgebra(
        frozenset(),
        frozenset(points),
        lambda a, b: a & b,
        lambda a, b: a | b,
        carrier,
        leq=lambda a, b: a <= b,
        name="discrete-%d" % k,
    )
    return AbstractBasis(
        algebra,
        lambda a, b: a <= b,
        lambda: iter(algebra.sorted_carrier()),
        inhabited=lambda a: bool(a),
        name=algebra.name,
        algebraic=True,
    )


def sigma_basis(k: int) -> AbstractBasis:
    """Formal-DNF basis over k generators; way-below is the upper order."""
    if not 1 <= k <= 3:
        raise BasisError("sigma_basis wants 1 <= k <= 3 (the carrier is doubly exponential)")
    points = range(k)
    subsets = [frozenset(s) for r in range(k + 1) for s in itertools.combinations(points, r)]
    carrier = [
        frozenset(fam)
        for r in range(len(subsets) + 1)
        for fam in itertools.combinations(subsets, r)
    ]
    algebra = CodeAlgebra(
        frozenset(),
        formal_dnf([[]]),
        dnf_meet,
        dnf_plus,
        carrier,
        leq=lambda l, r: upper_order(r, l),
        name="sigma-%d" % k,
    )
    return AbstractBasis(
        algebra,
        lambda l, r: upper_order(r, l),
        lambda: iter(algebra.sorted_carrier()),
        inhabited=lambda l: bool(l),
        name=algebra.name,
        algebraic=True,
    )


def _chain_algebra(name, chain):
    pos = {c: i for i, c in enumerate(chain)}
    plus = {(a, b): (a if pos[a] >= pos[b] else b) for a in chain for b in chain}
    star = {(a, b): (a if pos[a] <= pos[b] else b) for a in chain for b in chain}
    return table_algebra(name, chain, chain[0], chain[-1], plus, star)


def _basis_from_algebra(algebra, waybelow=None) -> AbstractBasis:
    wb = waybelow if waybelow is not None else (lambda a, b: imposed_leq(algebra, a, b))
    return AbstractBasis(
        algebra,
        wb,
        lambda: iter(algebra.sorted_carrier()),
        inhabited=lambda a: a != algebra.zero,
        name=algebra.name,
        algebraic=all(wb(c, c) for c in algebra.carrier),
    )


def two_chain_basis() -> AbstractBasis:
    """The two-element carrier {0, 1} with its order as way-below."""
    return _basis_from_algebra(_chain_algebra("two-chain", ("0", "1")))


def free_dl_basis(generators: int) -> AbstractBasis:
    """Free distributive lattice presentation on 1 or 2 generators, with <<= the order."""
    if generators == 1:
        return _basis_from_algebra(_chain_algebra("free-dl-1", ("0", "g", "1")))
    if generators != 2:
        raise BasisError("free_dl_basis supports 1 or 2 generators")
    # elements as antichains downward: 0 < ab < a,b < a+b < 1
    names = ("0", "ab", "a", "b", "a+b", "1")
    up = {"0": 0, "ab": 1, "a": 2, "b": 3, "a+b": 4, "1": 5}
    below = {
        ("0", x) for x in names
    } | {
        (x, "1") for x in names
    } | {(x, x) for x in names} | {
        ("ab", "a"), ("ab", "b"), ("ab", "a+b"),
        ("a", "a+b"), ("b", "a+b"),
    }

    def le(x, y):
        return (x, y) in below

    def join(x, y):
        cands = [z for z in names if le(x, z) and le(y, z)]
        return min(cands, key=lambda z: sum(le(w, z) for w in names))

    def meet(x, y):
        cands = [z for z in names if le(z, x) and le(z, y)]
        return max(cands, key=lambda z: sum(le(w, z) for w in names))

    plus = {(x, y): join(x, y) for x in names for y in names}
    star = {(x, y): meet(x, y) for x in names for y in names}
    return _basis_from_algebra(table_algebra("free-dl-2", names, "0", "1", plus, star))


def diamond_basis() -> AbstractBasis:
    """Four codes 0 < a, b < 1 with meet 0 and join 1 (the Boolean square)."""
    names = ("0", "a", "b", "1")
    le = {("0", x) for x in names} | {(x, "1") for x in names} | {(x, x) for x in names}

    def join(x, y):
        if (x, y) in le:
            return y
        if (y, x) in le:
            return x
        return "1"

    def meet(x, y):
        if (x, y) in le:
            return x
        if (y, x) in le:
            return y
        return "0"

    plus = {(x, y): join(x, y) for x in names for y in names}
    star = {(x, y): meet(x, y) for x in names for y in names}
    return _basis_from_algebra(table_algebra("diamond", names, "0", "1", plus, star))


BUILTIN_BASES = {
    "real-line": real_line_basis,
    "unit-interval": unit_interval_basis,
    "two-chain": two_chain_basis,
    "free-dl-1": lambda: free_dl_basis(1),
    "free-dl-2": lambda: free_dl_basis(2),
    "diamond": diamond_basis,
    "discrete-2": lambda: discrete_basis(2),
    "discrete-3": lambda: discrete_basis(3),
    "sigma-2": lambda: sigma_basis(2),
    "sigma-3": lambda: sigma_basis(3),
}


def builtin_basis(name: str) -> AbstractBasis:
    try:
        return BUILTIN_BASES[name]()
    except KeyError:
        raise LoadError("unknown builtin basis %r (have: %s)" % (name, ", ".join(sorted(BUILTIN_BASES))))


# -- document loader ----------------------------------------------------------


def _parse_set_name(text):
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise LoadError("carrier name %r is not a set literal" % text)
    inner = body[1:-1].strip()
    if not inner:
        return frozenset()
    return frozenset(part.strip() for part in inner.split(","))


def _parse_dnf_name(text):
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise LoadError("carrier name %r is not a set-of-sets literal" % text)
    inner = body[1:-1].strip()
    if not inner:
        return frozenset()
    parts = []
    depth = 0
    token = ""
    for ch in inner:
        if ch == "{":
            depth += 1
        if ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(token)
            token = ""
        else:
            token += ch
    parts.append(token)
    return frozenset(_parse_set_name(p) for p in parts)


_WAYBELOW_RULES = {
    "equality": lambda n: (lambda a, b: a == b),
    "subset": lambda n: (lambda a, b: n[a] <= n[b]),
    "superset": lambda n: (lambda a, b: n[a] >= n[b]),
    "upper_order": lambda n: (lambda a, b: upper_order(n[b], n[a])),
    "interval": lambda n: (lambda a, b: iv.waybelow_codes(n[a], n[b], None, False)),
}


def load_finite_basis(doc) -> AbstractBasis:
    """Build a basis from a JSON document (dict or JSON text).

    Keys: carrier, zero, one, plus, star (total [left, right, result]
    tables) and waybelow (an explicit pair list or a named rule).
    check_axioms is not run implicitly.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise LoadError("document is not valid JSON: %s" % exc)
    if not isinstance(doc, dict):
        raise LoadError("document must be a JSON object")
    try:
        carrier = list(doc["carrier"])
        zero, one = doc["zero"], doc["one"]
        plus_rows = doc["plus"]
        star_rows = doc["star"]
        wb_spec = doc["waybelow"]
    except KeyError as exc:
        raise LoadError("missing key %s" % exc)
    if len(set(carrier)) != len(carrier):
        raise LoadError("carrier has duplicate names")

    def table(rows, label):
        out = {}
        for row in rows:
            if len(row) != 3:
                raise LoadError("%s row %r is not [left, right, result]" % (label, row))
            l, r, res = row
            if (l, r) in out:
                raise LoadError("%s table repeats (%r, %r)" % (label, l, r))
            out[(l, r)] = res
        return out

    try:
        algebra = table_algebra(
            doc.get("name", "loaded"), carrier, zero, one, table(plus_rows, "plus"), table(star_rows, "star")
        )
    except AlgebraError as exc:
        raise LoadError(str(exc))

    if isinstance(wb_spec, list):
        pairs = set()
        for row in wb_spec:
            if len(row) != 2 or row[0] not in set(carrier) or row[1] not in set(carrier):
                raise LoadError("bad waybelow pair %r" % (row,))
            pairs.add((row[0], row[1]))
        wb = lambda a, b: (a, b) in pairs
    elif isinstance(wb_spec, str):
        if wb_spec not in _WAYBELOW_RULES:
            raise LoadError("unknown waybelow rule %r" % wb_spec)
        parser = {
            "subset": _parse_set_name,
            "superset": _parse_set_name,
            "upper_order": _parse_dnf_name,
            "interval": lambda t: _parse_interval_name(t),
            "equality": lambda t: t,
        }[wb_spec]
        try:
            denote = {name: parser(name) for name in carrier}
        except (LoadError, iv.IntervalError) as exc:
            raise LoadError("waybelow rule %r does not fit the carrier: %s" % (wb_spec, exc))
        wb = _WAYBELOW_RULES[wb_spec](denote)
    else:
        raise LoadError("waybelow must be a pair list or a rule name")
    return _basis_from_algebra(algebra, waybelow=wb)


def _parse_interval_name(text):
    return iv.parse_code(text)


# -- rounded ideals -----------------------------------------------------------


class RoundedIdeal:
    """A predicate on codes representing a point, with a certificate stream."""

    def __init__(self, membership, certificates, name="", round_witness=None, ideal_witness=None):
        self.membership = membership
        self._certificates = certificates
        self.name = name
        self.round_witness = round_witness
        self.ideal_witness = ideal_witness

    def certificates(self):
        return self._certificates()

    def __call__(self, code):
        return self.membership(code)

    def __repr__(self):
        return "RoundedIdeal(%s)" % self.name


def point_ideal(b: AbstractBasis, x) -> RoundedIdeal:
    """The codes whose open part contains the rational point x."""
    if b.point_membership is None:
        raise BasisError("basis %r is not spatial: no point membership" % b.name)
    x = Fraction(x)

    def member(code):
        return b.point_membership(x, code)

    def certs():
        return b.point_certificates(x)

    def round_witness(n):
        if b.widen_hint is not None:
            return b.widen_hint(n, Fraction(1))
        return None

    return RoundedIdeal(member, certs, name="point(%s)" % x, round_witness=round_witness)


def principal_ideal(b: AbstractBasis, n) -> RoundedIdeal:
    """All codes way below a fixed code."""

    def member(k):
        return b.waybelow(k, n)

    def certs():
        yield b.algebra.zero
        for k in b.enumerate():
            if b.waybelow(k, n):
                yield k

    return RoundedIdeal(member, certs, name="principal(%r)" % (n,))


_CERT_BOUND = 64


def is_rounded_ideal(b: AbstractBasis, xi, universe) -> AxiomReport:
    """Check roundedness, inhabitation and directedness of a code predicate.

    Roundedness asks every member to contain a member way below it (the
    point reading); on algebraic bases the ideal is directed upward instead,
    so the bound for two members is searched above rather than below.
    """
    report = AxiomReport()
    member = xi.membership if isinstance(xi, RoundedIdeal) else xi
    certs = (lambda: xi.certificates()) if isinstance(xi, RoundedIdeal) else (lambda: iter(()))

    inhabited = False
    for k in itertools.islice(certs(), _CERT_BOUND):
        if member(k):
            inhabited = True
            break
    if not inhabited:
        for k in itertools.islice(b.enumerate(), _CERT_BOUND):
            if member(k):
                inhabited = True
                break
    if inhabited:
        report.record_pass("inhabited", 1)
    else:
        report.record_failure("inhabited", ())

    if isinstance(universe, Exhaustive):
        if not b.is_finite:
            raise BasisError("exhaustive ideal checking needs a finite carrier")
        codes = list(b.carrier())
        rng = random.Random(0)
    else:
        rng = universe.rng()
        draw = _sampler(b, rng)
        codes = [draw() for _ in range(universe.count)]

    up = b.algebraic

    def below_candidates(n):
        if isinstance(xi, RoundedIdeal) and xi.round_witness is not None:
            w = xi.round_witness(n)
            if w is not None:
                yield w
        yield from itertools.islice(certs(), _CERT_BOUND)
        if b.is_finite:
            yield from b.carrier()

    for n in codes:
        if member(n):
            ok = False
            for m in below_candidates(n):
                if member(m) and (b.waybelow(n, m) if up else b.waybelow(m, n)):
                    ok = True
                    break
            if ok:
                report.record_pass("rounded", 1)
            elif b.is_finite:
                report.record_failure("rounded", (n,))
            else:
                report.record_unwitnessed("rounded", (n,))
        else:
            # converse direction: a member bounding n would force membership
            bad = None
            for m in itertools.islice(certs(), 8):
                cond = b.waybelow(n, m) if up else b.waybelow(m, n)
                if member(m) and cond:
                    bad = m
                    break
            if bad is not None:
                report.record_failure("rounded", (bad, n))
            else:
                report.record_pass("rounded", 1)

    members = [n for n in codes if member(n)]
    if len(members) >= 2:
        pairs = list(zip(members[::2], members[1::2]))
    else:
        pairs = []
    for r, s in pairs:
        found = False
        cands = []
        if isinstance(xi, RoundedIdeal) and xi.ideal_witness is not None:
            w = xi.ideal_witness(r, s)
            if w is not None:
                cands.append(w)
        if up and b.algebra.plus is not None:
            cands.append(b.algebra.plus(r, s))
        cands.extend(itertools.islice(certs(), _CERT_BOUND))
        if b.is_finite:
            cands.extend(b.carrier())
        for k in cands:
            if not member(k):
                continue
            if up and b.waybelow(r, k) and b.waybelow(s, k):
                found = True
                break
            if not up and b.waybelow(k, r) and b.waybelow(k, s):
                found = True
                break
        if found:
            report.record_pass("ideal", 1)
        elif b.is_finite:
            report.record_failure("ideal", (r, s))
        else:
            report.record_unwitnessed("ideal", (r, s))
    if not pairs:
        report.record_pass("ideal", 0)
    return report


# -- consistency of finite interval sets --------------------------------------


def con_check(codes) -> bool:
    """Whether finitely many open intervals share a rational point.

    Accepts plain single-interval codes only; density of the rationals makes
    the test a pure endpoint comparison.
    """
    los, his = [], []
    for code in codes:
        if code is ZERO or code is ONE or not isinstance(code, iv.IntervalCode) or not code.is_single:
            raise iv.IntervalError("con_check wants plain single-interval codes, got %r" % (code,))
        lo, hi, _, _ = code.components[0]
        los.append(lo)
        his.append(hi)
    if not los:
        return True
    return max(los) < min(his)
