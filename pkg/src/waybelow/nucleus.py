"""Finite-model verification of the closure operator defined from way-below.

For a finite carrier N the operator sends a predicate P on subsets of N and
a subset xi to: some n in xi is way below the evaluation of some formal sum
of products drawn entirely from P.  Quantifying the sum over all canonical
DNFs collapses exactly (monotonicity of way-below under the derived order)
to a single evaluation over the whole of P, which is what makes carriers of
a few dozen subsets tractable; a literal enumeration of the DNF quantifier
is kept alongside for cross-checking on tiny carriers.

Second-order predicates range over upward-closed families of subsets.  The
operator only ever reads a predicate on principal subsets, and on families
that are not upward closed the closure laws demonstrably fail (take the
family of all subsets except one lattice point), so arbitrary families
would misstate the theorems being verified.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .algebra import canon_key, ev, formal_dnf
from .basis import AbstractBasis, AxiomReport, BasisError, Exhaustive, RandomUniverse, check_axioms


class CarrierTooLarge(BasisError):
    pass


_MODEL_CAP = 16
_EXHAUSTIVE_PREDICATE_CAP = 4

_models = {}


class FiniteModel:
    """Tables for one finite basis: operation indices, masks and subset folds."""

    def __init__(self, b: AbstractBasis):
        if not b.is_finite:
            raise BasisError("the finite-model engine needs a finite carrier")
        if b.algebra.plus is None:
            raise BasisError("the finite-model engine needs +")
        self.basis = b
        self.carrier = b.carrier()
        c = len(self.carrier)
        if c > _MODEL_CAP:
            raise CarrierTooLarge(
                "carrier of %d codes exceeds the finite-model cap of %d" % (c, _MODEL_CAP)
            )
        self.c = c
        self.index = {code: i for i, code in enumerate(self.carrier)}
        self.i0 = self.index[b.algebra.zero]
        self.i1 = self.index[b.algebra.one]
        self.star = np.zeros((c, c), dtype=np.int16)
        self.plus = np.zeros((c, c), dtype=np.int16)
        for i, x in enumerate(self.carrier):
            for j, y in enumerate(self.carrier):
                self.star[i, j] = self.index[b.algebra.star(x, y)]
                self.plus[i, j] = self.index[b.algebra.plus(x, y)]
        self.wbto = np.zeros(c, dtype=np.int64)  # wbto[j]: bitmask of {i : i << j}
        for j, y in enumerate(self.carrier):
            mask = 0
            for i, x in enumerate(self.carrier):
                if b.waybelow(x, y):
                    mask |= 1 << i
            self.wbto[j] = mask

        size = 1 << c
        self.size = size
        mu = np.zeros(size, dtype=np.int16)
        mu[0] = self.i1
        for mask in range(1, size):
            high = mask.bit_length() - 1
            rest = mask ^ (1 << high)
            if rest == 0:
                mu[mask] = high
            else:
                mu[mask] = self.star[mu[rest], high]
        self.mu = mu

        # cnt[v, mask]: how many subsets of mask have product v
        base = np.zeros((c, size), dtype=np.int32)
        base[mu, np.arange(size)] = 1
        for bit in range(c):
            step = 1 << bit
            masks = np.arange(size)
            sel = (masks & step) != 0
            base[:, masks[sel]] += base[:, masks[sel] ^ step]
        self.cnt = base
        self.total = base[:, size - 1].copy()
        self._fold_memo = {}
        self._r_table = None

    def mask_of(self, codes) -> int:
        mask = 0
        for code in codes:
            try:
                mask |= 1 << self.index[code]
            except KeyError:
                raise BasisError("code %r is outside the carrier" % (code,))
        return mask

    def subset_of(self, mask) -> frozenset:
        return frozenset(self.carrier[i] for i in range(self.c) if mask >> i & 1)

    def fold_values(self, values) -> int:
        """Sum of a set of code indices, folded in carrier order."""
        key = tuple(sorted(int(v) for v in set(values)))
        got = self._fold_memo.get(key)
        if got is not None:
            return got
        if not key:
            acc = self.i0
        else:
            acc = key[0]
            for v in key[1:]:
                acc = int(self.plus[acc, v])
        self._fold_memo[key] = acc
        return acc

    def ev_of_family(self, member_masks) -> int:
        return self.fold_values(int(self.mu[m]) for m in member_masks)

    def reach_of_selection(self, sel) -> int:
        """reach_mask for a family given as a boolean array over subset masks."""
        vals = np.unique(self.mu[sel]) if sel.any() else np.empty(0, dtype=np.int16)
        return int(self.wbto[self.fold_values(int(v) for v in vals)])

    def ev_nonsubsets(self, xi_mask: int) -> int:
        vals = [v for v in range(self.c) if self.total[v] > self.cnt[v, xi_mask]]
        return self.fold_values(vals)

    def ev_family_containing(self, code_index: int) -> int:
        comp = (self.size - 1) ^ (1 << code_index)
        vals = [v for v in range(self.c) if self.total[v] > self.cnt[v, comp]]
        return self.fold_values(vals)

    def reach_mask(self, family_masks) -> int:
        """Bitmask of codes way below the evaluation of the family."""
        return int(self.wbto[self.ev_of_family(family_masks)])

    # predicates on subsets, as bitmasks over the 2^c subset indices

    def upclosed_predicates(self):
        if self._r_table is not None:
            return self._r_table
        if self.c > _EXHAUSTIVE_PREDICATE_CAP:
            raise CarrierTooLarge(
                "exhaustive predicate enumeration needs at most %d codes" % _EXHAUSTIVE_PREDICATE_CAP
            )
        size = self.size
        sup = [0] * size
        for s in range(size):
            sup[s] = sum(1 << t for t in range(size) if t & s == s)
        preds = []
        for m in range(1 << size):
            ok = True
            probe = m
            while probe:
                s = (probe & -probe).bit_length() - 1
                if sup[s] & ~m:
                    ok = False
                    break
                probe &= probe - 1
            if ok:
                preds.append(m)
        table = {}
        for m in preds:
            members = [s for s in range(size) if m >> s & 1]
            table[m] = self.reach_mask(members)
        self._r_table = (preds, table)
        return self._r_table


def finite_model(b: AbstractBasis) -> FiniteModel:
    model = _models.get(id(b))
    if model is None or model.basis is not b:
        model = FiniteModel(b)
        _models[id(b)] = model
    return model


def apply_E(b: AbstractBasis, phi, xi) -> bool:
    """Whether xi lands in the closure of the predicate phi.

    phi is a collection of subsets of the carrier, xi a subset.  The DNF
    quantifier in the definition is evaluated at its largest instance, the
    whole of phi, which is equivalent by monotonicity.
    """
    model = finite_model(b)
    xi_mask = model.mask_of(xi)
    phi_masks = [model.mask_of(s) for s in phi]
    return bool(xi_mask & model.reach_mask(phi_masks))


def apply_E_enumerated(b: AbstractBasis, phi, xi) -> bool:
    """Literal DNF enumeration of the closure; for cross-checks on tiny carriers."""
    model = finite_model(b)
    if model.c > 3:
        raise CarrierTooLarge("literal enumeration is exponential in 2^carrier")
    phi_sets = {frozenset(s) for s in phi}
    subsets = [frozenset(s) for r in range(model.c + 1) for s in itertools.combinations(model.carrier, r)]
    usable = [s for s in subsets if s in phi_sets]
    for n in xi:
        for r in range(len(usable) + 1):
            for fam in itertools.combinations(usable, r):
                dnf = formal_dnf(fam)
                if b.waybelow(n, ev(b.algebra, dnf)):
                    return True
    return False


def _mask_desc(model, pred_mask):
    members = [model.subset_of(s) for s in range(model.size) if pred_mask >> s & 1]
    return "{" + ", ".join(sorted("{%s}" % ",".join(sorted(map(repr, s))) for s in members)) + "}"


def check_nucleus_laws(b: AbstractBasis, universe=None) -> AxiomReport:
    """Verify the meet, join and idempotence laws of the closure operator.

    Exhaustive over all upward-closed predicate pairs for carriers of at
    most four codes; sampled (seeded) beyond that, since the predicate space
    is doubly exponential in the carrier.
    """
    model = finite_model(b)
    report = AxiomReport()
    if universe is None:
        universe = Exhaustive() if model.c <= _EXHAUSTIVE_PREDICATE_CAP else RandomUniverse(400, 0)

    def record(rule, lhs, rhs, describe):
        if lhs == rhs:
            report.record_pass(rule, 1)
        else:
            diff = lhs ^ rhs
            n = (diff & -diff).bit_length() - 1
            d1, d2 = describe()
            report.record_failure(rule, (d1, d2, {model.carrier[n]}))

    if isinstance(universe, Exhaustive):
        preds, table = model.upclosed_predicates()

        def composite(r1, r2, op):
            if op == "meet":
                members = [s for s in range(model.size) if (s & r1) and (s & r2)]
            else:
                members = [s for s in range(model.size) if (s & r1) or (s & r2)]
            return model.reach_mask(members)

        comp_memo = {}
        for m1 in preds:
            r1 = table[m1]
            for m2 in preds:
                r2 = table[m2]
                key = (r1, r2)
                got = comp_memo.get(key)
                if got is None:
                    got = (composite(r1, r2, "meet"), composite(r1, r2, "join"))
                    comp_memo[key] = got
                desc = lambda m1=m1, m2=m2: (_mask_desc(model, m1), _mask_desc(model, m2))
                record("meet-law", table[m1 & m2], got[0], desc)
                record("join-law", table[m1 | m2], got[1], desc)
            record("idempotent", r1, composite(r1, r1, "meet"), lambda m1=m1: (_mask_desc(model, m1),) * 2)
        return report

    rng = universe.rng()
    amask = np.arange(model.size)

    def random_upclosed():
        if rng.random() < 0.08:
            const = rng.random() < 0.5
            return np.full(model.size, const, dtype=bool), "const(%s)" % const
        gens = [rng.randrange(model.size) for _ in range(rng.randint(1, 3))]
        sel = np.zeros(model.size, dtype=bool)
        for g in gens:
            sel |= (amask & g) == g
        desc = "up(%s)" % ", ".join("{%s}" % ",".join(sorted(map(repr, model.subset_of(g)))) for g in gens)
        return sel, desc

    for _ in range(universe.count):
        sel1, d1 = random_upclosed()
        sel2, d2 = random_upclosed()
        r1 = model.reach_of_selection(sel1)
        r2 = model.reach_of_selection(sel2)
        c1 = (amask & r1) != 0
        c2 = (amask & r2) != 0
        describe = lambda d1=d1, d2=d2: (d1, d2)
        record("meet-law", model.reach_of_selection(sel1 & sel2), model.reach_of_selection(c1 & c2), describe)
        record("join-law", model.reach_of_selection(sel1 | sel2), model.reach_of_selection(c1 | c2), describe)
        record("idempotent", r1, model.reach_of_selection(c1), describe)
    return report


def is_admissible(b: AbstractBasis, xi) -> bool:
    """Whether the closure operator fixes every predicate at xi.

    Equivalent characterization: some member of xi is way below the product
    of xi, and no member of xi is way below the evaluation of the family of
    subsets that do not contain xi.
    """
    model = finite_model(b)
    xi_mask = model.mask_of(xi)
    if model.c <= _EXHAUSTIVE_PREDICATE_CAP:
        preds, table = model.upclosed_predicates()
        for m in preds:
            holds_e = bool(xi_mask & table[m])
            holds_phi = bool(m >> xi_mask & 1)
            if holds_e != holds_phi:
                return False
        return True
    return _is_admissible_reduced(model, xi_mask)


def _is_admissible_reduced(model: FiniteModel, xi_mask: int) -> bool:
    if not xi_mask & int(model.wbto[model.mu[xi_mask]]):
        return False
    return not xi_mask & int(model.wbto[model.ev_nonsubsets(xi_mask)])


def _lattice_hom_rounded(model: FiniteModel, xi_mask: int) -> bool:
    bit = lambda i: xi_mask >> i & 1
    if bit(model.i0) or not bit(model.i1):
        return False
    for i in range(model.c):
        for j in range(model.c):
            if bit(model.plus[i, j]) != (bit(i) | bit(j)):
                return False
            if bit(model.star[i, j]) != (bit(i) & bit(j)):
                return False
    for n in range(model.c):
        if bit(n) != bool(xi_mask & int(model.wbto[n])):
            return False
    return True


def points_theorem_check(b: AbstractBasis) -> AxiomReport:
    """Admissible iff rounded lattice homomorphism, over every subset of the carrier."""
    axioms = check_axioms(b, Exhaustive())
    if axioms.refuted:
        raise BasisError("basis %r fails the way-below axioms; theorem check rejected" % b.name)
    model = finite_model(b)
    report = AxiomReport()
    if model.c <= 10:
        for xi_mask in range(model.size):
            adm = (
                is_admissible(b, model.subset_of(xi_mask))
                if model.c <= _EXHAUSTIVE_PREDICATE_CAP
                else _is_admissible_reduced(model, xi_mask)
            )
            hom = _lattice_hom_rounded(model, xi_mask)
            if adm == hom:
                report.record_pass("points", 1)
            else:
                rule = "admissible-not-hom" if adm else "hom-not-admissible"
                report.record_failure(rule, (model.subset_of(xi_mask),))
        return report

    masks = np.arange(model.size, dtype=np.int64)
    bit = lambda i: (masks >> i & 1).astype(bool)
    hom = ~bit(model.i0) & bit(model.i1)
    for i in range(model.c):
        for j in range(model.c):
            hom &= bit(int(model.plus[i, j])) == (bit(i) | bit(j))
            hom &= bit(int(model.star[i, j])) == (bit(i) & bit(j))
    for n in range(model.c):
        hom &= bit(n) == ((masks & int(model.wbto[n])) != 0)

    mu_arr = model.mu.astype(np.int64)
    wbto_arr = model.wbto
    cond_a = (masks & wbto_arr[mu_arr[masks]]) != 0
    acc = np.full(model.size, model.i0, dtype=np.int64)
    for v in range(model.c):
        sel = model.total[v] > model.cnt[v, :]
        acc[sel] = model.plus[acc[sel], v]
    cond_b = (masks & wbto_arr[acc]) == 0
    adm = cond_a & cond_b

    bad = np.nonzero(adm != hom)[0]
    report.record_pass("points", int(model.size - len(bad)))
    for xi_mask in bad[: AxiomReport.MAX_RECORDED]:
        rule = "admissible-not-hom" if adm[xi_mask] else "hom-not-admissible"
        report.record_failure(rule, (model.subset_of(int(xi_mask)),))
    return report


def recovered_waybelow(b: AbstractBasis, n, m) -> bool:
    """Way-below as recovered from the closure operator at the principal predicate of m."""
    model = finite_model(b)
    val = model.ev_family_containing(model.index[m])
    return bool((1 << model.index[n]) & int(model.wbto[val]))


def waybelow_recovery_report(b: AbstractBasis) -> AxiomReport:
    """Compare the recovered relation with the declared one on all pairs."""
    report = AxiomReport()
    for n in b.carrier():
        for m in b.carrier():
            if recovered_waybelow(b, n, m) == bool(b.waybelow(n, m)):
                report.record_pass("recovery", 1)
            else:
                report.record_failure("recovery", (n, m))
    return report
