"""Local ring presentations, centered valuations and m-adic windows.

A ring is given by named generators and terminating rewrite rules; the
window R/m^N is the span of normal-form monomials of degree < N.  A
valuation is either a monomial weight assignment or a substitution sending
each generator to a truncated series; both are evaluated through the same
series machinery (a monomial valuation is the substitution by one-term
series).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import poly as P
from .errors import DefinitionError, PrecisionError, StructureError
from .groups import AtLeast, GroupElement, ValueGroup, cmp, LT, GT
from .linalg import Subspace, rref
from .series import HahnSeries


class ZeroElement:
    """Distinguished result of valuing something that reduces to zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZERO_ELEMENT"


ZERO_ELEMENT = ZeroElement()


@dataclass(frozen=True)
class RewriteRule:
    lead: tuple
    rhs: tuple  # frozen poly: tuple of (mono, Fraction)

    def rhs_poly(self):
        return {m: c for m, c in self.rhs}


def _local_smaller(m, lead) -> bool:
    """True iff monomial m is strictly below ``lead`` in the local order:
    larger total degree wins; at equal degree the later generators are more
    significant and a smaller exponent there loses."""
    dm, dl = P.mono_degree(m), P.mono_degree(lead)
    if dm != dl:
        return dm > dl
    for x, y in zip(reversed(m), reversed(lead)):
        if x != y:
            return x < y
    return False


class LocalRing:
    """A presentation of a noetherian local domain over Q."""

    def __init__(self, gens, relations=()):
        self.gens = tuple(gens)
        if len(set(self.gens)) != len(self.gens):
            raise DefinitionError("duplicate generator names")
        self.nvars = len(self.gens)
        rules = []
        for lead, rhs in relations:
            if isinstance(lead, str):
                lp = P.parse_poly(lead, self.gens)
                if len(lp) != 1 or next(iter(lp.values())) != 1:
                    raise DefinitionError(f"rule head {lead!r} must be a monic monomial")
                lead = next(iter(lp))
            if isinstance(rhs, str):
                rhs = P.parse_poly(rhs, self.gens)
            for m in rhs:
                if not _local_smaller(m, lead):
                    raise DefinitionError(
                        "rewrite rule does not terminate: "
                        f"{P.mono_string(m, self.gens)} is not below "
                        f"{P.mono_string(lead, self.gens)} in the local order")
            rules.append(RewriteRule(lead, tuple(sorted(rhs.items()))))
        self.rules = tuple(rules)

    def parse(self, s: str):
        return P.parse_poly(s, self.gens)

    def reduce(self, p, N: int):
        """Normal form of p modulo the rewrite rules and m^N."""
        work = P.drop_high_degree(p, N)
        while True:
            hit = None
            for m in P.sorted_monomials(work):
                for rule in self.rules:
                    if P.mono_divides(rule.lead, m):
                        hit = (m, rule)
                        break
                if hit:
                    break
            if hit is None:
                return work
            m, rule = hit
            c = work.pop(m)
            q = P.mono_div(rule.lead, m)
            repl = {P.mono_mul(q, rm): c * rc for rm, rc in rule.rhs}
            work = P.drop_high_degree(P.padd(work, repl), N)

    def normal_monomials(self, N: int):
        """All normal-form monomials of degree < N, canonically sorted."""
        out = []
        for total in range(N):
            for m in _monomials_of_degree(self.nvars, total):
                if not any(P.mono_divides(r.lead, m) for r in self.rules):
                    out.append(m)
        out.sort(key=P.mono_sort_key)
        return out

    def maximal_ideal_monomials(self, N: int):
        return [m for m in self.normal_monomials(N) if P.mono_degree(m) > 0]

    def __repr__(self):
        return f"LocalRing(gens={self.gens}, rules={len(self.rules)})"


def _monomials_of_degree(nvars, total):
    if nvars == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _monomials_of_degree(nvars - 1, total - head):
            yield (head,) + rest


# ---------------------------------------------------------------------------
# valuations


class ValuationSpec:
    """Monomial weights or a substitution embedding, both series-backed."""

    def __init__(self, ring: LocalRing, group: ValueGroup, images: dict,
                 kind: str = "substitution"):
        self.ring = ring
        self.group = group
        self.kind = kind
        missing = [g for g in ring.gens if g not in images]
        if missing:
            raise DefinitionError(f"no image for generators {missing}")
        self.images = {g: images[g] for g in ring.gens}
        zero = group.zero()
        for g, s in self.images.items():
            if s.group is not group:
                raise StructureError("image series in a foreign group")
            o = s.ord()
            if isinstance(o, AtLeast) or cmp(o, zero) != GT:
                raise DefinitionError(
                    f"generator {g} must have certified positive value")

    @staticmethod
    def monomial(ring: LocalRing, group: ValueGroup, weights: dict,
                 check_degree: int | None = None) -> "ValuationSpec":
        """Weights assign one positive group element per generator; the induced
        value of a monomial is the weight sum and must separate monomials."""
        images = {}
        for g in ring.gens:
            if g not in weights:
                raise DefinitionError(f"no weight for generator {g}")
            images[g] = HahnSeries.monomial(group, weights[g])
        spec = ValuationSpec(ring, group, images, kind="monomial")
        if check_degree:
            spec.verify_monomial_injectivity(check_degree)
        return spec

    def verify_monomial_injectivity(self, N: int):
        """Pairwise-distinct values on all monomials of degree < N."""
        seen = {}
        for m in itertools.chain.from_iterable(
                _monomials_of_degree(self.ring.nvars, d) for d in range(N)):
            v = self.group.zero()
            for g, e in zip(self.ring.gens, m):
                if e:
                    v = v + self.images[g].ord().scale(e)
            if v in seen:
                raise DefinitionError(
                    "monomial weights do not separate "
                    f"{P.mono_string(seen[v], self.ring.gens)} and "
                    f"{P.mono_string(m, self.ring.gens)}")
            seen[v] = m
        return True

    def verify_relations(self, N: int):
        """The substitution must kill every rewrite rule up to its frontier."""
        for rule in self.ring.rules:
            diff = self.series_of_poly(
                P.psub({rule.lead: Fraction(1)}, rule.rhs_poly()))
            if not diff.is_empty():
                raise DefinitionError(
                    "substitution does not respect the relation on "
                    f"{P.mono_string(rule.lead, self.ring.gens)}: "
                    f"residual order {diff.ord()!r}")
        return True

    def series_of_mono(self, m, cache=None):
        if cache is not None and m in cache:
            return cache[m]
        out = HahnSeries.constant(self.group, 1)
        for g, e in zip(self.ring.gens, m):
            for _ in range(e):
                out = out * self.images[g]
        if cache is not None:
            cache[m] = out
        return out

    def series_of_poly(self, p, cache=None):
        out = HahnSeries.zero(self.group)
        for m, c in p.items():
            out = out + self.series_of_mono(m, cache).scale(c)
        return out

    def gen_value(self, g) -> GroupElement:
        return self.images[g].ord()

    def min_generator_value(self) -> GroupElement:
        return min(self.images[g].ord() for g in self.ring.gens)


def nu_value(ring: LocalRing, spec: ValuationSpec, f, N: int):
    """Value of a ring element: reduce to normal form, then read the order
    of its series image.  Returns ZERO_ELEMENT for 0, AtLeast when the
    truncation consumed every visible term."""
    if isinstance(f, str):
        f = ring.parse(f)
    red = ring.reduce(f, N)
    if not red:
        return ZERO_ELEMENT
    return spec.series_of_poly(red).ord()


# ---------------------------------------------------------------------------
# windows


class Window:
    """The finite-dimensional quotient R/m^N with its monomial basis."""

    def __init__(self, ring: LocalRing, N: int):
        self.ring = ring
        self.N = N
        self.basis = ring.normal_monomials(N)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.dim = len(self.basis)

    def vec(self, p):
        """Coordinates of a polynomial (reduced first) in the window basis."""
        if isinstance(p, str):
            p = self.ring.parse(p)
        red = self.ring.reduce(p, self.N)
        v = [Fraction(0)] * self.dim
        for m, c in red.items():
            v[self.index[m]] = c
        return v

    def poly(self, vec):
        return {m: c for m, c in zip(self.basis, vec) if c != 0}

    def mul_vec(self, vec, q):
        """Window coordinates of (vec as poly) * q, reduced mod m^N."""
        p = self.poly(vec)
        return self.vec(self.ring.reduce(P.pmul(p, q), self.N))

    def degree_coordinates(self, d: int):
        """Indices of basis monomials of degree < d."""
        return [i for i, m in enumerate(self.basis) if P.mono_degree(m) < d]

    def project_from(self, other: "Window", vec):
        """Image of a vector of a deeper window (same ring, larger N) here."""
        if other.ring is not self.ring or other.N < self.N:
            raise StructureError("projection needs a deeper window of the same ring")
        return self.vec(other.poly(vec))

    def subspace(self, vectors):
        return Subspace(self.dim, vectors)

    def zero_subspace(self):
        return Subspace(self.dim)

    def full_subspace(self):
        eye = [[Fraction(i == j) for j in range(self.dim)] for i in range(self.dim)]
        return Subspace(self.dim, eye)

    def maximal_ideal_subspace(self):
        rows = []
        for i, m in enumerate(self.basis):
            if P.mono_degree(m) > 0:
                row = [Fraction(0)] * self.dim
                row[i] = Fraction(1)
                rows.append(row)
        return Subspace(self.dim, rows)

    def verify_image_independence(self, spec: ValuationSpec):
        """The series images of the basis monomials must be linearly
        independent below their common frontier; this is what makes the
        normal-form monomials an honest basis of the window."""
        cache = {}
        images = [spec.series_of_mono(m, cache) for m in self.basis]
        exps = sorted({e for s in images for e in s.terms})
        rows = [[s.coefficient(e) for e in exps] for s in images]
        pivots, _ = rref(rows)
        if len(pivots) != self.dim:
            raise DefinitionError(
                "normal-form monomial images are linearly dependent at this "
                "precision; the rewrite rules or the substitution are inadequate")
        return True
