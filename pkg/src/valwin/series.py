"""Truncated generalized power series with exact rational coefficients.

Exponents are value-group elements; a series stores finitely many terms
below a precision frontier ``prec``.  Every exponent at or beyond ``prec``
(lexicographically) is unknown.  ``prec is None`` means the series is exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DefinitionError, StructureError
from .groups import AtLeast, GroupElement, ValueGroup, cmp, LT

_MAX_DIVISION_STEPS = 10_000


def _min_elem(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if cmp(a, b) != 1 else b


class HahnSeries:
    """Finite term map exponent -> nonzero coefficient, plus a frontier."""

    __slots__ = ("group", "terms", "prec")

    def __init__(self, group: ValueGroup, terms=None, prec: GroupElement | None = None):
        self.group = group
        self.prec = prec
        clean = {}
        zero = group.zero()
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c == 0:
                continue
            if e.group is not group:
                raise StructureError("series exponent from a foreign group")
            if cmp(e, zero) == LT:
                raise DefinitionError(f"negative exponent {e} in a series")
            if prec is not None and cmp(e, prec) != LT:
                continue
            clean[e] = c
        self.terms = clean

    # -- constructors ----------------------------------------------------

    @classmethod
    def _raw(cls, group, terms, prec):
        """Fast path for arithmetic results: exponents are already known to
        be nonnegative, only zero coefficients and the frontier are filtered."""
        s = cls.__new__(cls)
        s.group = group
        s.prec = prec
        if prec is None:
            s.terms = {e: c for e, c in terms.items() if c != 0}
        else:
            s.terms = {e: c for e, c in terms.items() if c != 0 and e < prec}
        return s

    @staticmethod
    def zero(group, prec=None):
        return HahnSeries(group, {}, prec)

    @staticmethod
    def constant(group, c, prec=None):
        return HahnSeries(group, {group.zero(): Fraction(c)}, prec)

    @staticmethod
    def monomial(group, exponent, c=1, prec=None):
        return HahnSeries(group, {exponent: Fraction(c)}, prec)

    # -- basic queries -----------------------------------------------------

    def is_empty(self):
        return not self.terms

    def ord(self):
        """Least exponent with a nonzero coefficient, or AtLeast(prec)."""
        if not self.terms:
            return AtLeast(self.prec)
        return min(self.terms)

    def leading(self):
        """(exponent, coefficient) at the least exponent."""
        e = min(self.terms)
        return e, self.terms[e]

    def coefficient(self, e):
        return self.terms.get(e, Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: t[0])

    # -- arithmetic ----------------------------------------------------------

    def _require_same_group(self, other):
        if other.group is not self.group:
            raise StructureError("series from distinct groups")

    def __add__(self, other):
        self._require_same_group(other)
        prec = _min_elem(self.prec, other.prec)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return HahnSeries._raw(self.group, terms, prec)

    def __neg__(self):
        return HahnSeries._raw(self.group,
                               {e: -c for e, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return HahnSeries._raw(self.group, {}, self.prec)
        return HahnSeries._raw(self.group,
                               {e: c * v for e, v in self.terms.items()},
                               self.prec)

    def __mul__(self, other):
        self._require_same_group(other)
        # frontier: min(f.prec + ord(g), g.prec + ord(f)); the order of an
        # empty series is taken to be its own frontier.
        cands = []
        for p, s in ((self.prec, other), (other.prec, self)):
            if p is None:
                continue
            o = s.ord()
            if isinstance(o, AtLeast):
                o = o.bound
            if o is None:
                continue
            cands.append(p + o)
        prec = None
        for c in cands:
            prec = _min_elem(prec, c)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                if prec is not None and not (e < prec):
                    continue
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return HahnSeries._raw(self.group, terms, prec)

    def truncate(self, prec):
        new = _min_elem(self.prec, prec)
        return HahnSeries._raw(self.group, dict(self.terms), new)

    def shift(self, e):
        """Multiply by the monomial with exponent ``e`` (e may be any sign
        as long as all resulting exponents stay nonnegative)."""
        prec = None if self.prec is None else self.prec + e
        return HahnSeries._raw(self.group,
                               {x + e: c for x, c in self.terms.items()}, prec)

    def __pow__(self, n: int):
        if n < 0:
            raise DefinitionError("negative powers are not supported")
        out = HahnSeries.constant(self.group, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            body = " + ".join(f"{c}*t^{e}" for e, c in self.sorted_terms()[:6])
            if len(self.terms) > 6:
                body += " + ..."
        tail = "" if self.prec is None else f" + O(t^{self.prec})"
        return f"<{body}{tail}>"


def divide(f: HahnSeries, g: HahnSeries) -> HahnSeries:
    """Exact series division f/g at truncation.

    Requires ord(f) >= ord(g) certified, so the quotient stays in the
    nonnegative part of the group.
    """
    if g.is_empty():
        raise DefinitionError("division by a series with no visible terms")
    gamma, lead = g.leading()
    fo = f.ord()
    if not isinstance(fo, AtLeast) and cmp(fo, gamma) == LT:
        raise DefinitionError("division would leave the nonnegative exponent cone")
    # quotient frontier: min(f.prec, ord(f) + g.prec - gamma) - gamma
    cands = []
    if f.prec is not None:
        cands.append(f.prec)
    if g.prec is not None and not isinstance(fo, AtLeast):
        cands.append(fo + g.prec - gamma)
    if g.prec is not None and isinstance(fo, AtLeast) and fo.bound is not None:
        cands.append(fo.bound + g.prec - gamma)
    frontier = None
    for c in cands:
        frontier = _min_elem(frontier, c)
    qprec = None if frontier is None else frontier - gamma

    quotient = {}
    rem = f
    steps = 0
    while not rem.is_empty():
        steps += 1
        if steps > _MAX_DIVISION_STEPS:
            raise DefinitionError(
                "non-terminating exact division; truncate the operands first")
        e, c = rem.leading()
        qe = e - gamma
        if cmp(qe, f.group.zero()) == LT:
            raise DefinitionError("division would leave the nonnegative exponent cone")
        if qprec is not None and cmp(qe, qprec) != LT:
            break
        coef = c / lead
        quotient[qe] = coef
        rem = rem - g.shift(qe).scale(coef)
    return HahnSeries(f.group, quotient, qprec)


def _half_binomial(k: int) -> Fraction:
    # binomial(1/2, k)
    out = Fraction(1)
    half = Fraction(1, 2)
    for j in range(k):
        out *= (half - j)
        out /= (j + 1)
    return out


def sqrt1p(f: HahnSeries, order_cap: int) -> HahnSeries:
    """Binomial expansion of sqrt(1 + f), truncated after ``order_cap`` powers.

    Needs ord(f) > 0; the omitted tail starts at (order_cap+1)*ord(f), which
    becomes the result frontier unless f's own frontier is lower.
    """
    if order_cap < 0:
        raise DefinitionError("order cap must be nonnegative")
    zero = f.group.zero()
    if f.is_empty():
        # nothing visible: sqrt(1+f) = 1 up to f's own frontier
        return HahnSeries.constant(f.group, 1, f.prec)
    fo = f.ord()
    if cmp(fo, zero) != 1:
        raise DefinitionError("sqrt(1+f) needs ord(f) > 0")
    out = HahnSeries.constant(f.group, 1, f.prec)
    power = HahnSeries.constant(f.group, 1)
    for k in range(1, order_cap + 1):
        power = power * f
        out = out + power.scale(_half_binomial(k))
    return out.truncate(fo.scale(order_cap + 1))


# ---------------------------------------------------------------------------
# coefficient streams


@dataclass(frozen=True)
class SeriesStream:
    """Deterministic rule for the i-th coefficient of a one-variable tail.

    kinds: "list" (explicit coefficients, zero beyond the end), "formula"
    (rational expression in i, evaluated with Fraction arithmetic), "seeded"
    (pseudo-random nonzero rationals derived from (seed, i)).
    """

    kind: str
    data: object

    def coefficient(self, i: int) -> Fraction:
        if self.kind == "list":
            seq = self.data
            if 1 <= i <= len(seq):
                return Fraction(seq[i - 1])
            return Fraction(0)
        if self.kind == "formula":
            env = {"__builtins__": {}}
            try:
                val = eval(self.data, env, {"i": i, "Fraction": Fraction})  # noqa: S307
            except ZeroDivisionError:
                raise DefinitionError(f"formula stream undefined at i={i}")
            return Fraction(val)
        if self.kind == "seeded":
            rng = random.Random(f"{self.data}:{i}")
            num = 1 + rng.randrange(9)
            den = 1 + rng.randrange(3)
            sign = 1 if rng.randrange(2) else -1
            return Fraction(sign * num, den)
        raise DefinitionError(f"unknown stream kind {self.kind!r}")

    def describe(self):
        if self.kind == "list":
            return {"kind": "list", "data": [str(c) for c in self.data]}
        return {"kind": self.kind, "data": self.data}


def stream_series(group, unit: GroupElement, stream: SeriesStream,
                  start: int, upto: int, exact: bool = True) -> HahnSeries:
    """Sum of stream(i) * t^(i*unit) for start <= i < upto.

    By default the finite sum is the declared object itself (exact model
    data, no frontier): the kernel this induces lies beyond any window whose
    cancellation capacity stays below the stream length, which the loaders
    check.  With exact=False the frontier upto*unit is attached instead and
    deeper cancellations flag as AtLeast.
    """
    if start < 0 or upto < start:
        raise DefinitionError("bad stream range")
    terms = {}
    for i in range(start, upto):
        c = stream.coefficient(i)
        if c != 0:
            terms[unit.scale(i)] = c
    return HahnSeries(group, terms, None if exact else unit.scale(upto))
