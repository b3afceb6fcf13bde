"""Exact rational interval unions.

A non-symbolic code is a finite union of open rational intervals, stored as
sorted components (lo, hi, closed_lo, closed_hi).  The closed flags only
arise on the unit interval, where clipping to [0, 1] makes a component
relatively open while containing its boundary endpoint.  Each code names an
open/compact pair: the open part is the union of the components, the
compact part the union of their closures.

All arithmetic is exact (fractions.Fraction); there is no floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .algebra import ONE, ZERO

Rat = Fraction
Component = Tuple[Fraction, Fraction, bool, bool]

UNIT_CLIP = (Fraction(0), Fraction(1))


class IntervalError(Exception):
    pass


class IntervalCode:
    """A finite union of open rational intervals (with their closures)."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Component]):
        self.components = tuple(components)
        if not self.components:
            raise IntervalError("empty unions are the distinguished code 0")

    def __eq__(self, other):
        return isinstance(other, IntervalCode) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def canon_key(self):
        return (4, tuple((c[0].numerator, c[0].denominator, c[1].numerator, c[1].denominator, c[2], c[3]) for c in self.components))

    @property
    def is_single(self) -> bool:
        if len(self.components) != 1:
            return False
        lo, hi, clo, chi = self.components[0]
        return not clo and not chi

    @property
    def center(self) -> Fraction:
        lo, hi, _, _ = self.components[0]
        return (lo + hi) / 2

    @property
    def radius(self) -> Fraction:
        lo, hi, _, _ = self.components[0]
        return (hi - lo) / 2

    def __repr__(self):
        return format_code(self)


def format_rat(x: Fraction) -> str:
    return str(Fraction(x))


def format_code(code) -> str:
    if code is ZERO:
        return "0"
    if code is ONE:
        return "1"
    parts = []
    for lo, hi, _, _ in code.components:
        q = (lo + hi) / 2
        d = (hi - lo) / 2
        parts.append("<%s±%s>" % (format_rat(q), format_rat(d)))
    return "+".join(parts)


def parse_rat(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise IntervalError("bad rational literal %r" % text) from exc


def parse_code(text: str, clip=None):
    """Parse "0", "1", or a union of interval literals "<q±d>+<q±d>"."""
    body = text.strip()
    if body == "0":
        return ZERO
    if body == "1":
        return ONE
    pairs = []
    for chunk in body.split("+"):
        chunk = chunk.strip()
        if not (chunk.startswith("<") and chunk.endswith(">")):
            raise IntervalError("bad interval literal %r" % chunk)
        inner = chunk[1:-1]
        if "±" in inner:
            left, right = inner.split("±", 1)
        elif "~" in inner:
            left, right = inner.split("~", 1)
        else:
            raise IntervalError("bad interval literal %r (missing ±)" % chunk)
        q, d = parse_rat(left), parse_rat(right)
        if d <= 0:
            raise IntervalError("radius must be positive in %r" % chunk)
        pairs.append((q, d))
    return make_union(pairs, clip)


def _clip_component(lo: Fraction, hi: Fraction, clip) -> Optional[Component]:
    if clip is None:
        return (lo, hi, False, False)
    a, b = clip
    if hi <= a or lo >= b:
        return None
    clo = lo < a
    chi = hi > b
    return (max(lo, a), min(hi, b), clo, chi)


def normalize(raw: Iterable[Component], clip=None) -> Tuple[Component, ...]:
    """Sort components and merge the ones whose open parts overlap."""
    comps = sorted(raw, key=lambda c: (c[0], not c[2]))
    out: List[Component] = []
    for c in comps:
        if not out:
            out.append(c)
            continue
        lo1, hi1, cl1, ch1 = out[-1]
        lo2, hi2, cl2, ch2 = c
        overlap = lo2 < hi1 or (lo2 == hi1 and (ch1 or cl2))
        if overlap:
            if hi2 > hi1:
                hi1, ch1 = hi2, ch2
            elif hi2 == hi1:
                ch1 = ch1 or ch2
            if lo2 == lo1:
                cl1 = cl1 or cl2
            out[-1] = (lo1, hi1, cl1, ch1)
        else:
            out.append(c)
    return tuple(out)


def make_interval(q, d, clip=None):
    """Code for the open interval (q-d, q+d), clipped into the space."""
    q, d = Fraction(q), Fraction(d)
    if d <= 0:
        raise IntervalError("radius must be positive")
    return make_union([(q, d)], clip)


def make_union(pairs, clip=None):
    comps = []
    for q, d in pairs:
        c = _clip_component(Fraction(q) - Fraction(d), Fraction(q) + Fraction(d), clip)
        if c is not None:
            comps.append(c)
    if not comps:
        return ZERO
    return IntervalCode(normalize(comps, clip))


def _from_components(comps, clip=None):
    comps = [c for c in comps if c is not None]
    if not comps:
        return ZERO
    return IntervalCode(normalize(comps, clip))


def plus_codes(a, b, clip=None):
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    if a is ONE or b is ONE:
        return ONE
    return _from_components(list(a.components) + list(b.components), clip)


def _intersect(c1: Component, c2: Component) -> Optional[Component]:
    lo1, hi1, cl1, ch1 = c1
    lo2, hi2, cl2, ch2 = c2
    if lo1 > lo2:
        lo, cl = lo1, cl1
    elif lo2 > lo1:
        lo, cl = lo2, cl2
    else:
        lo, cl = lo1, cl1 and cl2
    if hi1 < hi2:
        hi, ch = hi1, ch1
    elif hi2 < hi1:
        hi, ch = hi2, ch2
    else:
        hi, ch = hi1, ch1 and ch2
    if lo < hi:
        return (lo, hi, cl, ch)
    return None


def star_codes(a, b, clip=None):
    if a is ZERO or b is ZERO:
        return ZERO
    if a is ONE:
        return b
    if b is ONE:
        return a
    comps = []
    for c1 in a.components:
        for c2 in b.components:
            c = _intersect(c1, c2)
            if c is not None:
                comps.append(c)
    return _from_components(comps, clip)


def closed_pieces(code, clip=None) -> List[Tuple[Fraction, Fraction]]:
    """Maximal closed intervals of the compact part (touching closures merge)."""
    if code is ZERO:
        return []
    if code is ONE:
        if clip is None:
            raise IntervalError("the whole line has no finite compact part")
        return [clip]
    pieces: List[Tuple[Fraction, Fraction]] = []
    for lo, hi, _, _ in code.components:
        if pieces and lo <= pieces[-1][1]:
            pieces[-1] = (pieces[-1][0], max(hi, pieces[-1][1]))
        else:
            pieces.append((lo, hi))
    return pieces


def _piece_in_component(a, b, comp: Component) -> bool:
    lo, hi, clo, chi = comp
    left = lo < a or (lo == a and clo)
    right = b < hi or (b == hi and chi)
    return left and right


def covers_pieces(m, pieces, clip=None) -> bool:
    """Whether the open part of m contains every closed piece."""
    if not pieces:
        return True
    if m is ZERO:
        return False
    if m is ONE:
        return True
    return all(any(_piece_in_component(a, b, c) for c in m.components) for a, b in pieces)


def waybelow_codes(n, m, clip=None, compact=False):
    """Compact part of n inside the open part of m, by endpoint comparison.

    On the line the whole-space code is the one exception: its "compact"
    part is not compact, so nothing of the form 1 << m holds.
    """
    if n is ZERO:
        return True
    if n is ONE and not compact:
        return False
    if m is ZERO:
        return False
    return covers_pieces(m, closed_pieces(n, clip), clip)


def leq_codes(n, m, clip=None) -> bool:
    """Containment of the open parts (the semantic order on codes)."""
    if n is ZERO or m is ONE:
        return True
    if n is ONE:
        if clip is None:
            return False
        return m is not ZERO and covers_pieces(m, [clip], clip)
    if m is ZERO:
        return False
    for lo, hi, clo, chi in n.components:
        ok = False
        for lo2, hi2, cl2, ch2 in m.components:
            left = lo2 < lo or (lo2 == lo and (cl2 or not clo))
            right = hi < hi2 or (hi == hi2 and (ch2 or not chi))
            if left and right:
                ok = True
                break
        if not ok:
            return False
    return True


def contains_point(code, x, clip=None) -> bool:
    if code is ZERO:
        return False
    if code is ONE:
        return True if clip is None else clip[0] <= x <= clip[1]
    x = Fraction(x)
    for lo, hi, clo, chi in code.components:
        if (lo < x or (lo == x and clo)) and (x < hi or (x == hi and chi)):
            return True
    return False


def inhabited_code(code) -> bool:
    return code is not ZERO


def widen(code, t, clip=None):
    """Grow every component by t on each open end."""
    t = Fraction(t)
    if code is ZERO or code is ONE:
        return code
    comps = []
    for lo, hi, _, _ in code.components:
        c = _clip_component(lo - t, hi + t, clip)
        if c is not None:
            comps.append(c)
    return _from_components(comps, clip)


def shrink(code, s):
    """Shrink every component by s on each end that is not pinned by clipping."""
    s = Fraction(s)
    if code is ZERO or code is ONE:
        return code
    comps = []
    for lo, hi, clo, chi in code.components:
        nlo = lo if clo else lo + s
        nhi = hi if chi else hi - s
        if nlo < nhi or (nlo == nhi and clo and chi):
            comps.append((nlo, nhi, clo, chi))
    if not comps:
        return ZERO
    return IntervalCode(tuple(comps))


def hull_code(code, pad=Fraction(1), clip=None):
    """A single interval strictly containing the compact part of code."""
    pieces = closed_pieces(code, clip)
    if not pieces:
        return ZERO
    lo = min(p[0] for p in pieces) - pad
    hi = max(p[1] for p in pieces) + pad
    return _from_components([(lo, hi, False, False)], clip)


def interpolate_pieces(pieces, m, clip=None, compact=False):
    """A code k with every piece inside open(k) and compact(k) inside open(m).

    Assumes the pieces are covered by the open part of m; the midpoint rule
    picks k halfway between each piece and its covering component.
    """
    if not pieces:
        return ZERO
    if m is ONE:
        if compact:
            return ONE
        lo = min(p[0] for p in pieces) - 1
        hi = max(p[1] for p in pieces) + 1
        return _from_components([(lo, hi, False, False)], clip)
    comps = []
    for a, b in pieces:
        comp = next(c for c in m.components if _piece_in_component(a, b, c))
        lo, hi, clo, chi = comp
        nlo = a - 1 if (clo and lo == a) else (lo + a) / 2
        nhi = b + 1 if (chi and hi == b) else (hi + b) / 2
        comps.append(_clip_component(nlo, nhi, clip))
    return _from_components(comps, clip)


def interpolant_codes(n, m, clip=None, compact=False):
    """Some k with n << k << m, computed directly; None when n << m fails."""
    if not waybelow_codes(n, m, clip, compact):
        return None
    if n is ZERO:
        return ZERO
    if compact and m is ONE:
        return ONE
    if n is ONE and compact:
        pieces = [clip]
    else:
        pieces = closed_pieces(n, clip)
    return interpolate_pieces(pieces, m, clip, compact)


def _positive_min(vals):
    pos = [v for v in vals if v > 0]
    return min(pos) if pos else None


def wilker_split(n, p, q, clip=None, compact=False):
    """Shrink p and q to (p', q') with p' << p, q' << q and n << p' + q'.

    Returns None when the premise n << p + q fails.  The shrink amount is
    half the smallest positive critical value of the endpoint arrangement,
    so a valid witness is always produced in one step.
    """
    if not waybelow_codes(n, plus_codes(p, q, clip), clip, compact):
        return None
    if n is ZERO:
        return (ZERO, ZERO)
    if p is ZERO:
        return (ZERO, interpolant_codes(n, q, clip, compact))
    if q is ZERO:
        return (interpolant_codes(n, p, clip, compact), ZERO)
    if p is ONE:
        return (interpolant_codes(n, ONE, clip, compact), ZERO)
    if q is ONE:
        return (ZERO, interpolant_codes(n, ONE, clip, compact))
    pieces = [clip] if (n is ONE and compact) else closed_pieces(n, clip)
    comps = list(p.components) + list(q.components)
    crits = []
    for lo, hi, clo, chi in comps:
        moves = (0 if clo else 1) + (0 if chi else 1)
        if moves:
            crits.append((hi - lo) / moves)
        for a, b in pieces:
            if not clo and lo < a:
                crits.append(a - lo)
            if not chi and b < hi:
                crits.append(hi - b)
    for i, (lo1, hi1, cl1, ch1) in enumerate(comps):
        for lo2, hi2, cl2, ch2 in comps[i + 1:]:
            lo_hi = [(lo1, cl1, hi2, ch2), (lo2, cl2, hi1, ch1)]
            for lo, cl, hi, ch in lo_hi:
                if lo < hi:
                    moves = (0 if cl else 1) + (0 if ch else 1)
                    if moves:
                        crits.append((hi - lo) / moves)
    base = _positive_min(crits)
    s = base / 2 if base is not None else Fraction(1)
    ps, qs = shrink(p, s), shrink(q, s)
    assert waybelow_codes(ps, p, clip, compact) and waybelow_codes(qs, q, clip, compact)
    assert waybelow_codes(n, plus_codes(ps, qs, clip), clip, compact)
    return (ps, qs)


def star_slip_witness(n, p, q, clip=None, compact=False):
    """Some m with n << m, m << p and m << q; None when n << p*q fails."""
    meet = star_codes(p, q, clip)
    k = interpolant_codes(n, meet, clip, compact)
    if k is None:
        return None
    # compact(k) sits in open(p*q), which is contained in both open parts
    return k


def closed_meet_pieces(p, q, clip=None):
    """Intersection of the two compact parts; pieces may be single points."""
    if p is ZERO or q is ZERO:
        return []
    pp = closed_pieces(p, clip)
    qq = closed_pieces(q, clip)
    out = []
    for a1, b1 in pp:
        for a2, b2 in qq:
            a, b = max(a1, a2), min(b1, b2)
            if a <= b:
                out.append((a, b))
    out.sort()
    merged = []
    for a, b in out:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(b, merged[-1][1]))
        else:
            merged.append((a, b))
    return merged


def point_in_open(code, x, clip=None) -> bool:
    return contains_point(code, x, clip)


def meet_enlarge(p, q, n, clip=None, compact=False):
    """Enlarge p, q to (p', q') with p << p', q << q' and p'*q' << n.

    Decides satisfiability exactly: a witness exists iff the intersection of
    the two compact parts lies in the open part of n.  Returns None if not.
    """
    if n is ONE and compact:
        w = widen if clip is None else (lambda c, t: widen(c, t, clip))
        return (ONE if p is ONE else w(p, Fraction(1)), ONE if q is ONE else w(q, Fraction(1)))
    pieces = closed_meet_pieces(p, q, clip) if not (p is ONE or q is ONE) else None
    if p is ONE:
        pieces = closed_pieces(q, clip) if q is not ONE else ([clip] if clip else None)
    elif q is ONE:
        pieces = closed_pieces(p, clip)
    if pieces is None:
        return None
    ok = all(
        (a == b and point_in_open(n, a, clip)) or (a < b and covers_pieces(n, [(a, b)], clip))
        for a, b in pieces
    )
    if not ok:
        return None
    endpoints = []
    for code in (p, q, n):
        if code not in (ZERO, ONE):
            for lo, hi, _, _ in code.components:
                endpoints.extend((lo, hi))
    gaps = [abs(x - y) for i, x in enumerate(endpoints) for y in enumerate_rest(endpoints, i)]
    base = _positive_min(gaps)
    t = (base / 4) if base is not None else Fraction(1, 4)
    for _ in range(4):
        pw = p if p is ONE else widen(p, t, clip)
        qw = q if q is ONE else widen(q, t, clip)
        if (
            waybelow_codes(p, pw, clip, compact)
            and waybelow_codes(q, qw, clip, compact)
            and waybelow_codes(star_codes(pw, qw, clip), n, clip, compact)
        ):
            return (pw, qw)
        t = t / 4
    return None


def enumerate_rest(xs, i):
    for j, x in enumerate(xs):
        if j > i:
            yield x


def enumerate_codes(clip=None):
    """Deterministic stream of codes by increasing dyadic complexity."""
    yield ZERO
    yield ONE
    level = 0
    while True:
        step = Fraction(1, 2 ** level)
        lo, hi = (clip if clip else (Fraction(-8), Fraction(8)))
        k = lo
        while k < hi:
            yield make_union([(k + step / 2, step / 2)], clip)
            yield make_union([(k + step, step)], clip)
            k += step
        level += 1


# exact arithmetic on lists of closed pieces, for matrix images


def merge_pieces(pieces):
    out = []
    for a, b in sorted(pieces):
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(b, out[-1][1]))
        else:
            out.append((a, b))
    return out


def pieces_neg(pieces):
    return merge_pieces([(-b, -a) for a, b in pieces])


def pieces_add_const(pieces, c):
    c = Fraction(c)
    return [(a + c, b + c) for a, b in pieces]


def pieces_scale(pieces, c):
    c = Fraction(c)
    if c == 0:
        return [(Fraction(0), Fraction(0))] if pieces else []
    if c > 0:
        return [(a * c, b * c) for a, b in pieces]
    return merge_pieces([(b * c, a * c) for a, b in pieces])


def _binary(pieces1, pieces2, op):
    return merge_pieces([op(p1, p2) for p1 in pieces1 for p2 in pieces2])


def pieces_add(p1, p2):
    return _binary(p1, p2, lambda x, y: (x[0] + y[0], x[1] + y[1]))


def pieces_mul(p1, p2):
    def mul(x, y):
        prods = [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]]
        return (min(prods), max(prods))

    return _binary(p1, p2, mul)


def pieces_min(p1, p2):
    return _binary(p1, p2, lambda x, y: (min(x[0], y[0]), min(x[1], y[1])))


def pieces_max(p1, p2):
    return _binary(p1, p2, lambda x, y: (max(x[0], y[0]), max(x[1], y[1])))


def code_from_pieces(pieces, clip=None):
    """A code whose compact part is exactly the given pieces (opens are their interiors)."""
    comps = []
    for a, b in merge_pieces(pieces):
        if a == b:
            continue
        comps.append(_clip_component(a, b, clip))
    return _from_components(comps, clip)


def pieces_covered_slack(pieces, m, clip=None):
    """Smallest margin by which open(m) covers the pieces; None if it does not."""
    if not pieces:
        return Fraction(1)
    if m is ZERO:
        return None
    if m is ONE:
        return Fraction(1)
    slack = None
    for a, b in pieces:
        best = None
        for comp in m.components:
            if _piece_in_component(a, b, comp):
                lo, hi, clo, chi = comp
                here = min(
                    a - lo if not clo else Fraction(10**9),
                    hi - b if not chi else Fraction(10**9),
                )
                if best is None or here > best:
                    best = here
        if best is None:
            return None
        slack = best if slack is None else min(slack, best)
    return slack
