"""Morphisms between abstract bases as binary relations on codes.

A matrix relates a source code n to a target code m when the compact named
by n maps into the open named by m.  Queries are tri-state: True, False, or
None for a bounded search that neither found a witness nor refuted the
relation (relational composition of semi-decidable relations is only
semi-decidable).

Function-backed matrices carry a ``push`` operation computing the exact
image of a source box under the function; all witness searches for such
matrices are then direct exact-arithmetic constructions rather than blind
enumeration, so validation never exhausts on them.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Optional

from . import intervals as iv
from .algebra import ONE, ZERO, CodeAlgebra, canon_key
from .basis import (
    AbstractBasis,
    AxiomReport,
    BasisError,
    Exhaustive,
    RandomUniverse,
    _sampler,
)
from .instances import RoundedIdeal

SEARCH_BOUND = 200


class MatrixError(Exception):
    pass


def tri_and(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def tri_or(a, b):
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


# -- boxes: exact images ------------------------------------------------------


def source_box(basis, code):
    """The compact part of a code as exact data, or None when unbounded."""
    clip = getattr(basis, "clip", "missing")
    if clip != "missing":
        if code is ZERO:
            return []
        if code is ONE:
            return [clip] if basis.compact_space else None
        return iv.closed_pieces(code, clip)
    parts = getattr(basis, "component_bases", None)
    if parts is not None:
        if code is ZERO:
            return ("pair", [], [])
        b1, b2 = parts
        x, y = code
        return ("pair", source_box(b1, x), source_box(b2, y))
    return None


class Matrix:
    """A tri-state relation between the codes of two bases."""

    def __init__(
        self,
        source: AbstractBasis,
        target: AbstractBasis,
        rel: Callable,
        name: str = "",
        push: Optional[Callable] = None,
        growth: Optional[Callable] = None,
        pullback: Optional[Callable] = None,
        suggest_targets: Optional[Callable] = None,
    ):
        self.source = source
        self.target = target
        self.rel = rel
        self.name = name
        self.push = push
        self.growth = growth
        self.pullback = pullback
        self.suggest_targets = suggest_targets

    def image(self, n):
        """Exact image code of the compact of n, when the matrix is function-backed."""
        if self.push is None:
            return None
        box = source_box(self.source, n)
        if box is None:
            return None
        out = self.push(box)
        if out is None or isinstance(out, tuple):
            return out if out is None else _pair_image_code(self.target, out)
        clip = getattr(self.target, "clip", None)
        return iv.code_from_pieces(out, clip) if out else ZERO

    def image_pieces(self, n):
        if self.push is None:
            return None
        box = source_box(self.source, n)
        if box is None:
            return None
        return self.push(box)

    def __repr__(self):
        return "Matrix(%s: %s -> %s)" % (self.name, self.source.name, self.target.name)


def _pair_image_code(target, pair_box):
    _, box1, box2 = pair_box
    if box1 is None or box2 is None:
        return None
    b1, b2 = target.component_bases
    c1 = iv.code_from_pieces(box1, getattr(b1, "clip", None)) if box1 else ZERO
    c2 = iv.code_from_pieces(box2, getattr(b2, "clip", None)) if box2 else ZERO
    return target.make_pair(c1, c2)


def _box_rel(target, box, m):
    """Image box inside the open part of m."""
    if box is None:
        return False
    if isinstance(box, tuple):  # product target
        b1, b2 = target.component_bases
        _, box1, box2 = box
        if not box1 and not box2:
            return True
        if m is ZERO:
            return not box1 or not box2
        return _box_rel(b1, box1, m[0]) and _box_rel(b2, box2, m[1])
    clip = getattr(target, "clip", None)
    return iv.covers_pieces(m, iv.merge_pieces(box), clip)


def _pushed_rel(mat: Matrix):
    def rel(n, m):
        box = mat.image_pieces(n)
        if box is None and source_box(mat.source, n) is None:
            return False  # a source code with non-compact "compact" part
        return _box_rel(mat.target, box, m)

    return rel


# -- identity and composition -------------------------------------------------


def identity(b: AbstractBasis) -> Matrix:
    """The way-below relation as the identity morphism."""
    return Matrix(
        b,
        b,
        lambda n, m: bool(b.waybelow(n, m)),
        name="id",
        push=lambda box: box,
        growth=lambda n: Fraction(1),
        pullback=lambda code: code,
    )


def compatible_bases(a: AbstractBasis, b: AbstractBasis) -> bool:
    """Same code universe: equal names, same-space interval bases, or products thereof."""
    if a is b or a.name == b.name:
        return True
    clip_a = getattr(a, "clip", "missing")
    clip_b = getattr(b, "clip", "missing")
    if clip_a != "missing" and clip_b != "missing":
        return clip_a == clip_b and a.compact_space == b.compact_space
    parts_a = getattr(a, "component_bases", None)
    parts_b = getattr(b, "component_bases", None)
    if parts_a is not None and parts_b is not None:
        return compatible_bases(parts_a[0], parts_b[0]) and compatible_bases(parts_a[1], parts_b[1])
    return False


def compose(sigma: Matrix, rho: Matrix, bound=SEARCH_BOUND) -> Matrix:
    """Relational composition: some middle code joins the two relations.

    When both factors are function-backed the middle existential is decided
    exactly through the composed image; otherwise the middle basis is
    enumerated up to the bound and the answer may be unknown (None).
    """
    if not compatible_bases(rho.target, sigma.source):
        raise MatrixError(
            "composition mismatch: %s does not feed %s" % (rho.target.name, sigma.source.name)
        )
    pushed = rho.push is not None and sigma.push is not None

    def push(box):
        mid = rho.push(box)
        return None if mid is None else sigma.push(mid)

    def rel(n, k):
        if pushed:
            box = push(source_box(rho.source, n))
            if box is None and source_box(rho.source, n) is None:
                return False
            return _box_rel(sigma.target, box, k)
        middle = rho.target
        if middle.is_finite:
            verdict = False
            for m in middle.carrier():
                got = tri_and(rho.rel(n, m), sigma.rel(m, k))
                if got is True:
                    return True
                if got is None:
                    verdict = None
            return verdict
        for m in itertools.islice(middle.enumerate(), bound):
            if tri_and(rho.rel(n, m), sigma.rel(m, k)) is True:
                return True
        return None

    def growth(n):
        if rho.growth is None or sigma.growth is None:
            return None
        mid = rho.image(n)
        g2 = sigma.growth(mid) if mid is not None else None
        g1 = rho.growth(n)
        if g1 is None or g2 is None:
            return None
        return g1 * g2

    return Matrix(
        rho.source,
        sigma.target,
        rel,
        name="(%s . %s)" % (sigma.name, rho.name),
        push=push if pushed else None,
        growth=growth if pushed else None,
    )


# -- product bases and pairing ------------------------------------------------


def product_basis(b1: AbstractBasis, b2: AbstractBasis) -> AbstractBasis:
    """Rectangle codes (n, m) with componentwise meet and way-below.

    The product of two filter meet bases; a distinguished empty code stands
    in for every rectangle with an empty side, and there is no + (apply
    or_closure for the directed structure).
    """
    z1, z2 = b1.algebra.zero, b2.algebra.zero

    def make_pair(x, y):
        if x == z1 or y == z2:
            return ZERO
        return (x, y)

    def star(a, b):
        if a is ZERO or b is ZERO:
            return ZERO
        return make_pair(b1.algebra.star(a[0], b[0]), b2.algebra.star(a[1], b[1]))

    def wb(a, b):
        if a is ZERO:
            return True
        if b is ZERO:
            return False
        return b1.waybelow(a[0], b[0]) and b2.waybelow(a[1], b[1])

    def leq(a, b):
        if a is ZERO:
            return True
        if b is ZERO:
            return False
        return b1.leq(a[0], b[0]) and b2.leq(a[1], b[1])

    carrier = None
    if b1.is_finite and b2.is_finite:
        carrier = [ZERO] + [
            make_pair(x, y)
            for x in b1.algebra.carrier
            for y in b2.algebra.carrier
            if make_pair(x, y) is not ZERO
        ]
        carrier = list(dict.fromkeys(carrier))

    algebra = CodeAlgebra(
        ZERO,
        (b1.algebra.one, b2.algebra.one),
        star,
        None,
        carrier,
        leq=leq,
        name="prod(%s,%s)" % (b1.name, b2.name),
    )

    def enum():
        yield ZERO
        for x, y in zip(b1.enumerate(), b2.enumerate()):
            pair = make_pair(x, y)
            if pair is not ZERO:
                yield pair

    def sample(rng):
        if b1.sample_code is None or b2.sample_code is None:
            return rng.choice(carrier)
        return make_pair(b1.sample_code(rng), b2.sample_code(rng))

    def interp(n, m):
        if n is ZERO:
            return ZERO
        if m is ZERO or b1.interpolant_hint is None or b2.interpolant_hint is None:
            return None
        k1 = b1.interpolant_hint(n[0], m[0])
        k2 = b2.interpolant_hint(n[1], m[1])
        if k1 is None or k2 is None:
            return None
        return make_pair(k1, k2)

    def widen(code, t):
        if code is ZERO or b1.widen_hint is None:
            return code
        return make_pair(b1.widen_hint(code[0], t), b2.widen_hint(code[1], t))

    inhabited = None
    if b1.inhabited is not None and b2.inhabited is not None:
        inhabited = lambda a: a is not ZERO and b1.inhabited(a[0]) and b2.inhabited(a[1])

    membership = None
    certificates = None
    if b1.point_membership is not None and b2.point_membership is not None:
        membership = lambda x, code: code is not ZERO and (
            code == (b1.algebra.one, b2.algebra.one)
            or (b1.point_membership(x[0], code[0]) and b2.point_membership(x[1], code[1]))
        )
        certificates = lambda x: (
            make_pair(c1, c2)
            for c1, c2 in zip(b1.point_certificates(x[0]), b2.point_certificates(x[1]))
        )

    basis = AbstractBasis(
        algebra,
        wb,
        enum,
        inhabited=inhabited,
        name=algebra.name,
        algebraic=b1.algebraic and b2.algebraic,
        sample_code=sample,
        interpolant_hint=interp,
        point_membership=membership,
        point_certificates=certificates,
        widen_hint=widen,
    )
    basis.component_bases = (b1, b2)
    basis.make_pair = make_pair
    return basis


def pair_matrix(rho: Matrix, sigma: Matrix) -> Matrix:
    """Target both components at once: rel(n, (p, q)) = rho(n, p) and sigma(n, q)."""
    if not compatible_bases(rho.source, sigma.source):
        raise MatrixError("pairing needs a common source")
    target = product_basis(rho.target, sigma.target)

    def rel(n, m):
        if m is ZERO:
            return tri_and(rho.rel(n, rho.target.algebra.zero), sigma.rel(n, sigma.target.algebra.zero))
        p, q = m
        return tri_and(rho.rel(n, p), sigma.rel(n, q))

    pushed = rho.push is not None and sigma.push is not None

    def push(box):
        return ("pair", rho.push(box), sigma.push(box))

    def growth(n):
        if rho.growth is None or sigma.growth is None:
            return None
        g1, g2 = rho.growth(n), sigma.growth(n)
        if g1 is None or g2 is None:
            return None
        return max(g1, g2)

    return Matrix(
        rho.source,
        target,
        rel,
        name="<%s,%s>" % (rho.name, sigma.name),
        push=push if pushed else None,
        growth=growth if pushed else None,
    )


# -- builtin real matrices ----------------------------------------------------


def _real_bases():
    from .instances import real_line_basis, real_line_meet_basis

    return real_line_basis(), real_line_meet_basis()


_UNARY_PUSH = {
    "const": lambda box, c: [(c, c)] if box else [],
    "identity": lambda box, c: box,
    "negate": lambda box, c: iv.pieces_neg(box),
    "add_const": lambda box, c: iv.pieces_add_const(box, c),
    "scale": lambda box, c: iv.pieces_scale(box, c),
}

_BINARY_PUSH = {
    "add": iv.pieces_add,
    "mul": iv.pieces_mul,
    "min": iv.pieces_min,
    "max": iv.pieces_max,
}


def builtin_real_matrix(kind: str, *params) -> Matrix:
    """Matrices for the basic continuous maps, by exact interval arithmetic."""
    params = tuple(Fraction(p) for p in params)
    line, meet_line = _real_bases()
    if kind in _UNARY_PUSH:
        if kind in ("const", "add_const", "scale"):
            if len(params) != 1:
                raise MatrixError("%s wants one rational parameter" % kind)
            c = params[0]
        elif params:
            raise MatrixError("%s takes no parameters" % kind)
        else:
            c = None
        if kind == "identity":
            return identity(line)
        op = _UNARY_PUSH[kind]

        def push(box, op=op, c=c):
            return None if box is None else op(box, c)

        def growth(n, kind=kind, c=c):
            return {"const": Fraction(1), "negate": Fraction(1), "add_const": Fraction(1)}.get(
                kind, abs(c) + 1 if kind == "scale" else Fraction(1)
            )

        pullback = None
        if kind == "negate":
            pullback = lambda code: _affine_preimage(code, Fraction(-1), Fraction(0))
        elif kind == "add_const":
            pullback = lambda code: _affine_preimage(code, Fraction(1), -c)
        elif kind == "scale" and c != 0:
            pullback = lambda code: _affine_preimage(code, 1 / c, Fraction(0))
        mat = Matrix(line, line, None, name=_name(kind, params), push=push, growth=growth, pullback=pullback)
        mat.rel = _pushed_rel(mat)
        mat.kind = kind
        mat.params = params
        return mat
    if kind in _BINARY_PUSH:
        if params:
            raise MatrixError("%s takes no parameters" % kind)
        source = product_basis(meet_line, meet_line)
        op = _BINARY_PUSH[kind]

        def push(box, op=op):
            if box is None:
                return None
            _, b1, b2 = box
            if b1 is None or b2 is None:
                return None
            if not b1 or not b2:
                return []
            return op(b1, b2)

        def growth(n, kind=kind):
            if kind in ("add", "min", "max"):
                return Fraction(2)
            if n is ZERO or n is None:
                return Fraction(4)
            box = source_box(source, n)
            if box is None or box[1] is None or box[2] is None:
                return None
            mags = [abs(e) for side in (box[1], box[2]) for piece in side for e in piece]
            return (max(mags) if mags else Fraction(0)) * 2 + 2

        mat = Matrix(source, line, None, name=_name(kind, params), push=push, growth=growth)
        mat.rel = _pushed_rel(mat)
        mat.kind = kind
        mat.params = params
        return mat
    raise MatrixError("unknown builtin kind %r" % kind)


def _name(kind, params):
    return kind if not params else "%s(%s)" % (kind, ",".join(str(p) for p in params))


def _affine_preimage(code, a, b):
    """Preimage of an interval code under x -> a x + b (a nonzero)."""
    if code is ZERO or code is ONE:
        return code
    comps = []
    for lo, hi, _, _ in code.components:
        x, y = (lo - b) / a, (hi - b) / a
        comps.append((min(x, y), max(x, y), False, False))
    return iv.IntervalCode(iv.normalize(comps))


# -- application to ideals ----------------------------------------------------

_CERT_LIMIT = 48


def apply_ideal(rho: Matrix, xi: RoundedIdeal) -> RoundedIdeal:
    """Push a point forward: member(m) iff some certificate maps inside m."""

    def member(m):
        if rho.source.is_finite:
            verdict = False
            for n in rho.source.carrier():
                if not xi.membership(n):
                    continue
                got = rho.rel(n, m)
                if got is True:
                    return True
                if got is None:
                    verdict = None
            return verdict
        for n in itertools.islice(xi.certificates(), _CERT_LIMIT):
            if rho.rel(n, m) is True:
                return True
        return None

    def certs():
        widen = rho.target.widen_hint
        for n in itertools.islice(xi.certificates(), _CERT_LIMIT):
            img = rho.image(n)
            if img is None or widen is None:
                continue
            for t in (Fraction(1, 4), Fraction(1, 64)):
                cand = widen(img, t)
                if rho.rel(n, cand) is True:
                    yield cand
                    break

    def round_witness(m):
        for n in itertools.islice(xi.certificates(), _CERT_LIMIT):
            if rho.rel(n, m) is True:
                return _right_witness(rho, n, m)
        return None

    return RoundedIdeal(member, certs, name="%s@%s" % (rho.name, xi.name), round_witness=round_witness)


# -- witness construction -----------------------------------------------------


def _below_sample(b: AbstractBasis, n):
    """Some code way below n, if one is easy to produce."""
    if n is ZERO or n == b.algebra.zero:
        return b.algebra.zero
    clip = getattr(b, "clip", "missing")
    if clip != "missing":
        if n is ONE:
            return iv.make_interval(0, 1, clip)
        s = min((hi - lo) / 4 for lo, hi, _, _ in n.components)
        return iv.shrink(n, s)
    parts = getattr(b, "component_bases", None)
    if parts is not None:
        k1 = _below_sample(parts[0], n[0])
        k2 = _below_sample(parts[1], n[1])
        if k1 is None or k2 is None:
            return None
        return b.make_pair(k1, k2)
    if b.is_finite:
        for k in b.carrier():
            if k != n and b.waybelow(k, n):
                return k
        return n if b.waybelow(n, n) else None
    return None


def _right_witness(mat: Matrix, n, m):
    """Some m' way below m with rel(n, m') still true."""
    if mat.push is not None and getattr(mat.target, "clip", "missing") != "missing":
        box = mat.image_pieces(n)
        if box is not None:
            clip = mat.target.clip
            return iv.interpolate_pieces(iv.merge_pieces(box), m, clip, mat.target.compact_space)
    if mat.target.is_finite:
        for mp in mat.target.carrier():
            if mat.target.waybelow(mp, m) and mat.rel(n, mp) is True:
                return mp
    return None


def _left_witness(mat: Matrix, n, m):
    """Some n' with n << n' and rel(n', m) still true."""
    if mat.source.is_finite:
        for np_ in mat.source.carrier():
            if mat.source.waybelow(n, np_) and mat.rel(np_, m) is True:
                return np_
        return None
    if mat.push is None or mat.source.widen_hint is None:
        return None
    box = mat.image_pieces(n)
    if box is None:
        return None
    flat = box if not isinstance(box, tuple) else None
    if flat is not None:
        slack = iv.pieces_covered_slack(iv.merge_pieces(flat), m, getattr(mat.target, "clip", None))
        if slack is None:
            return None
    else:
        slack = Fraction(1, 4)
    rate = mat.growth(n) if mat.growth is not None else None
    t = min(Fraction(1), slack / (2 * rate)) if rate else Fraction(1, 16)
    for _ in range(8):
        cand = mat.source.widen_hint(n, t)
        if mat.source.waybelow(n, cand) and mat.rel(cand, m) is True:
            return cand
        t = t / 4
    return None


def _meet_factor(mat: Matrix, n, s, t):
    """(m, p) with rel(m, s), rel(p, t) and n << m * p."""
    star = mat.target.algebra.star
    if mat.source.is_finite:
        for m_ in mat.source.carrier():
            if mat.rel(m_, s) is not True:
                continue
            for p_ in mat.source.carrier():
                if (
                    mat.rel(p_, t) is True
                    and mat.source.waybelow(n, mat.source.algebra.star(m_, p_))
                ):
                    return (m_, p_)
        return None
    cand = _left_witness(mat, n, star(s, t))
    if cand is not None and mat.rel(cand, s) is True and mat.rel(cand, t) is True:
        return (cand, cand)
    return None


def _join_factor(mat: Matrix, n, s, t, budget=240):
    """(m, p) with rel(m, s), rel(p, t) and n << m + p."""
    src_plus = mat.source.algebra.plus
    tgt = mat.target
    if src_plus is None:
        return None
    if mat.source.is_finite:
        for m_ in mat.source.carrier():
            if mat.rel(m_, s) is not True:
                continue
            for p_ in mat.source.carrier():
                if mat.rel(p_, t) is True and mat.source.waybelow(n, src_plus(m_, p_)):
                    return (m_, p_)
        return None
    zero = mat.source.algebra.zero
    if s == tgt.algebra.zero or mat.rel(n, t) is True:
        w = _left_witness(mat, n, t)
        if w is not None:
            return (zero, w)
    if t == tgt.algebra.zero or mat.rel(n, s) is True:
        w = _left_witness(mat, n, s)
        if w is not None:
            return (w, zero)
    if mat.pullback is not None:
        # invertible case: split on the target and pull the pieces back
        clip = getattr(tgt, "clip", None)
        image = mat.image(n)
        if image is not None:
            split = iv.wilker_split(image, s, t, clip, tgt.compact_space)
            if split is not None:
                sp, tp = split
                m_ = mat.pullback(iv.widen(sp, _tiny_margin(sp, s, clip), clip)) if sp is not ZERO else ZERO
                p_ = mat.pullback(iv.widen(tp, _tiny_margin(tp, t, clip), clip)) if tp is not ZERO else ZERO
                if (
                    (m_ is ZERO or mat.rel(m_, s) is True)
                    and (p_ is ZERO or mat.rel(p_, t) is True)
                    and mat.source.waybelow(n, src_plus(m_, p_))
                ):
                    return (m_, p_)
    if mat.push is None or getattr(tgt, "clip", "missing") == "missing":
        return None
    return _bisection_join_factor(mat, n, s, t, budget)


def _tiny_margin(code, outer, clip):
    slack = iv.pieces_covered_slack(iv.closed_pieces(code, clip) if code not in (ZERO, ONE) else [], outer, clip)
    if slack is None or slack >= Fraction(10**9):
        return Fraction(1, 64)
    return slack / 4


def _bisection_join_factor(mat: Matrix, n, s, t, budget):
    clip = mat.target.clip
    compact = mat.target.compact_space
    box = mat.image_pieces(n)
    if box is None or isinstance(box, tuple):
        return None
    work = list(source_box(mat.source, n) or [])
    if not work:
        return (mat.source.algebra.zero, mat.source.algebra.zero)
    assigned_s, assigned_t = [], []
    while work:
        if budget <= 0:
            return None
        budget -= 1
        a, b_ = work.pop()
        img = iv.merge_pieces(mat.push([(a, b_)]) or [])
        if iv.covers_pieces(s, img, clip):
            assigned_s.append((a, b_))
        elif iv.covers_pieces(t, img, clip):
            assigned_t.append((a, b_))
        else:
            mid = (a + b_) / 2
            if a == b_:
                return None
            work.append((a, mid))
            work.append((mid, b_))

    def margin(pieces, tgt_code):
        vals = []
        for piece in pieces:
            img = iv.merge_pieces(mat.push([piece]) or [])
            slack = iv.pieces_covered_slack(img, tgt_code, clip)
            if slack is None:
                return None
            vals.append(slack)
        return min(vals) if vals else Fraction(1)

    m_s = margin(assigned_s, s)
    m_t = margin(assigned_t, t)
    if m_s is None or m_t is None:
        return None
    rate = mat.growth(n) if mat.growth is not None else Fraction(4)
    if rate is None or rate == 0:
        rate = Fraction(4)
    eta = min(m_s, m_t, Fraction(10)) / (2 * rate)
    for _ in range(6):
        m_code = iv.code_from_pieces([(a - eta, b_ + eta) for a, b_ in assigned_s], clip) if assigned_s else ZERO
        p_code = iv.code_from_pieces([(a - eta, b_ + eta) for a, b_ in assigned_t], clip) if assigned_t else ZERO
        ok_s = m_code is ZERO or mat.rel(m_code, s) is True
        ok_t = p_code is ZERO or mat.rel(p_code, t) is True
        if ok_s and ok_t and mat.source.waybelow(n, mat.source.algebra.plus(m_code, p_code)):
            return (m_code, p_code)
        eta = eta / 4
    return None


# -- validation ---------------------------------------------------------------


def _instance_stream(mat: Matrix, universe):
    """Quadruples (n, n2, s, t): two source codes and two target codes."""
    if isinstance(universe, Exhaustive):
        if not (mat.source.is_finite and mat.target.is_finite):
            raise MatrixError("exhaustive validation needs finite bases")
        src, tgt = mat.source.carrier(), mat.target.carrier()
        return [(n, n2, s, t) for n in src for n2 in src for s in tgt for t in tgt]
    rng = universe.rng()
    draw_s = _sampler(mat.source, rng)
    draw_t = _sampler(mat.target, rng)
    return [(draw_s(), draw_s(), draw_t(), draw_t()) for _ in range(universe.count)]


def validate_matrix(mat: Matrix, universe) -> AxiomReport:
    """Check the abstract-matrix rules on the given universe of instances."""
    report = AxiomReport()
    src, tgt = mat.source, mat.target
    s_alg, t_alg = src.algebra, tgt.algebra

    if mat.rel(s_alg.zero, t_alg.zero) is not True:
        report.record_failure("zero-source", (s_alg.zero, t_alg.zero))
    else:
        report.record_pass("zero-source", 1)

    for n, n2, s, t in _instance_stream(mat, universe):
        m = s
        if mat.rel(s_alg.zero, m) is not True:
            report.record_failure("zero-source", (s_alg.zero, m))
        else:
            report.record_pass("zero-source", 1)

        got = mat.rel(n, m)
        if got is True:
            below = _below_sample(src, n)
            if below is not None and mat.rel(below, m) is False:
                report.record_failure("rounded-left", (below, n, m))
            w = _left_witness(mat, n, m)
            if w is not None:
                report.record_pass("rounded-left", 1)
            elif src.is_finite:
                report.record_failure("rounded-left", (n, m))
            else:
                report.record_unwitnessed("rounded-left", (n, m))
            w = _right_witness(mat, n, m)
            if w is not None and tgt.waybelow(w, m) and mat.rel(n, w) is True:
                report.record_pass("rounded-right", 1)
            elif tgt.is_finite:
                report.record_failure("rounded-right", (n, m))
            else:
                report.record_unwitnessed("rounded-right", (n, m))
            if tgt.widen_hint is not None:
                above = tgt.widen_hint(m, Fraction(1))
                if tgt.waybelow(m, above) and mat.rel(n, above) is False:
                    report.record_failure("rounded-right", (n, m, above))

        for name, const in (("target-zero", t_alg.zero), ("target-one", t_alg.one)):
            lhs = mat.rel(n, const)
            rhs = bool(src.waybelow(n, _source_const(mat, const)))
            if lhs is not None and bool(lhs) != rhs:
                report.record_failure(name, (n,))
            else:
                report.record_pass(name, 1)

        if s_alg.plus is not None:
            lhs = mat.rel(s_alg.plus(n, n2), s)
            rhs = tri_and(mat.rel(n, s), mat.rel(n2, s))
            if lhs is not None and rhs is not None and lhs != rhs:
                report.record_failure("plus-source", (n, n2, s))
            else:
                report.record_pass("plus-source", 1)

        if mat.rel(n, s) is True and tgt.leq(s, t) and mat.rel(n, t) is False:
            report.record_failure("monotone", (n, s, t))
        else:
            report.record_pass("monotone", 1)

        meet = t_alg.star(s, t)
        if mat.rel(n, meet) is True:
            w = _meet_factor(mat, n, s, t)
            if w is not None:
                report.record_pass("meet-rule", 1)
            elif src.is_finite:
                report.record_failure("meet-rule", (n, s, t))
            else:
                report.record_unwitnessed("meet-rule", (n, s, t))
        back = _meet_backward_instance(mat, n, s, t)
        if back is not None:
            report.record_failure("meet-rule", back)
        else:
            report.record_pass("meet-rule", 1)

        if s_alg.plus is not None and t_alg.plus is not None:
            join = t_alg.plus(s, t)
            if mat.rel(n, join) is True:
                w = _join_factor(mat, n, s, t)
                if w is not None:
                    report.record_pass("join-rule", 1)
                elif src.is_finite:
                    report.record_failure("join-rule", (n, s, t))
                else:
                    report.record_unwitnessed("join-rule", (n, s, t))
            else:
                report.record_pass("join-rule", 1)
    if s_alg.plus is None:
        report.notes.append("source has no +: directedness and join factorization are vacuous")
    return report


def _source_const(mat: Matrix, const):
    alg = mat.source.algebra
    return alg.zero if const == mat.target.algebra.zero else alg.one


def _meet_backward_instance(mat: Matrix, m, s, t):
    """A violation of: rel(m,s), rel(p,t), n << m*p implies rel(n, s*t)."""
    candidates = [(s, t)]
    if mat.suggest_targets is not None:
        sugg = list(mat.suggest_targets(m))
        candidates.extend((a, b) for a in sugg for b in sugg)
    for s_, t_ in candidates:
        if mat.rel(m, s_) is not True or mat.rel(m, t_) is not True:
            continue
        n = _below_sample(mat.source, m)
        if n is None:
            continue
        meet = mat.target.algebra.star(s_, t_)
        if mat.source.waybelow(n, m) and mat.rel(n, meet) is False:
            return (n, m, s_, t_)
    return None


def preserves(mat: Matrix, connective: str, universe) -> bool:
    """Whether the matrix satisfies the preservation rule for one connective."""
    src, tgt = mat.source, mat.target
    if connective in ("top", "bot"):
        const = tgt.algebra.one if connective == "top" else tgt.algebra.zero
        for n, _, _, _ in _instance_stream(mat, universe):
            lhs = mat.rel(n, const)
            rhs = bool(src.waybelow(n, _source_const(mat, const)))
            if lhs is not None and bool(lhs) != rhs:
                return False
        return True
    if connective == "meet":
        for n, _, s, t in _instance_stream(mat, universe):
            if mat.rel(n, tgt.algebra.star(s, t)) is True and _meet_factor(mat, n, s, t) is None:
                return False
            if _meet_backward_instance(mat, n, s, t) is not None:
                return False
        return True
    if connective == "join":
        if src.algebra.plus is None or tgt.algebra.plus is None:
            raise MatrixError("join preservation needs + on both sides")
        for n, _, s, t in _instance_stream(mat, universe):
            if mat.rel(n, tgt.algebra.plus(s, t)) is True and _join_factor(mat, n, s, t) is None:
                return False
        return True
    raise MatrixError("unknown connective %r" % connective)


# -- extraction from finite-model homomorphisms --------------------------------


def matrix_of_hom(b1: AbstractBasis, b2: AbstractBasis, table) -> Matrix:
    """Extract the relation of a predicate transformer given as a subset table.

    ``table`` maps every subset of b2's carrier (as a frozenset) to a subset
    of b1's carrier; rel(n, m) holds when some code above n lies in the
    image of the principal predicate of m.
    """
    if not (b1.is_finite and b2.is_finite):
        raise MatrixError("matrix extraction needs finite carriers")
    t2 = list(b2.carrier())
    for r in range(len(t2) + 1):
        for sub in itertools.combinations(t2, r):
            if frozenset(sub) not in table:
                raise MatrixError("hom table is partial: missing %r" % (frozenset(sub),))

    def rel(n, m):
        image = table[frozenset([m])]
        return any(b1.waybelow(n, np_) for np_ in image)

    return Matrix(b1, b2, rel, name="hom")


def matrix_hom_roundtrip(mat: Matrix) -> bool:
    """rel -> table -> rel returns the original relation."""
    src = list(mat.source.carrier())
    tgt = list(mat.target.carrier())
    table = {}
    for r in range(len(tgt) + 1):
        for sub in itertools.combinations(tgt, r):
            psi = frozenset(sub)
            out = set()
            for k in src:
                hit = False
                for m in tgt:
                    if not any(mat.target.waybelow(m, mp) for mp in psi):
                        continue
                    for n in src:
                        if mat.rel(n, m) is True and mat.source.waybelow(k, n):
                            hit = True
                            break
                    if hit:
                        break
                if hit:
                    out.add(k)
            table[psi] = frozenset(out)
    rebuilt = matrix_of_hom(mat.source, mat.target, table)
    return all(
        bool(rebuilt.rel(n, m)) == bool(mat.rel(n, m)) for n in src for m in tgt
    )
