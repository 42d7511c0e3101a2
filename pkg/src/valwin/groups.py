"""Finite-rank lex-ordered value groups and exact comparisons.

A group is an ordered tuple of levels, most significant first.  Each level
is either the rationals (with a denominator bound, so Z+Q-style groups stay
enumerable) or a real quadratic extension a + b*sqrt(d).  Elements compare
lexicographically level by level; within a quadratic level the sign of
a + b*sqrt(d) is decided by integer arithmetic only.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DefinitionError, StructureError

LT, EQ, GT = -1, 0, 1

DEFAULT_DENOMINATOR_BOUND = 10**6


@dataclass(frozen=True)
class RationalLevel:
    """A copy of Q.  ``label`` is kept so descriptors round-trip ("Z" or "Q")."""

    label: str = "Z"
    denominator_bound: int = DEFAULT_DENOMINATOR_BOUND


@dataclass(frozen=True)
class QuadraticLevel:
    """Elements a + b*sqrt(d) with a, b rational, d a positive non-square."""

    d: int

    def __post_init__(self):
        if self.d <= 1:
            raise DefinitionError(f"quadratic level needs d > 1, got {self.d}")
        r = int(self.d) ** 0.5
        for k in (int(r) - 1, int(r), int(r) + 1):
            if k * k == self.d:
                raise DefinitionError(f"quadratic level needs a non-square, got {self.d}")


LevelSpec = Union[RationalLevel, QuadraticLevel]


def _quad_sign(a: Fraction, b: Fraction, d: int) -> int:
    # sign of a + b*sqrt(d), exactly: case split on quadrant, then compare
    # a^2 against d*b^2 with integer arithmetic.
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    lhs, rhs = a * a, d * b * b
    if a > 0:  # b < 0
        return (lhs > rhs) - (lhs < rhs)
    # a < 0, b > 0
    return (rhs > lhs) - (rhs < lhs)


class ValueGroup:
    """A lex-ordered product of levels; rank = number of levels."""

    def __init__(self, levels):
        levels = tuple(levels)
        if not levels:
            raise DefinitionError("value group needs at least one level")
        self.levels = levels
        self.rank = len(levels)
        # rational-only groups compare by plain tuple order (hot path)
        self.all_rational = all(isinstance(l, RationalLevel) for l in levels)

    # -- construction -------------------------------------------------

    def zero(self) -> "GroupElement":
        return GroupElement(self, tuple(self._zero_coord(l) for l in self.levels))

    @staticmethod
    def _zero_coord(level):
        if isinstance(level, QuadraticLevel):
            return (Fraction(0), Fraction(0))
        return Fraction(0)

    def element(self, coords) -> "GroupElement":
        """Build an element from per-level raw coordinates.

        Rational levels accept ints/Fractions/strings; quadratic levels accept
        a pair (a, b) meaning a + b*sqrt(d), or a single value meaning b = 0.
        """
        if len(coords) != self.rank:
            raise StructureError(
                f"expected {self.rank} coordinates, got {len(coords)}")
        out = []
        for level, c in zip(self.levels, coords):
            if isinstance(level, QuadraticLevel):
                if isinstance(c, (tuple, list)):
                    if len(c) != 2:
                        raise StructureError("quadratic coordinate needs a pair (a, b)")
                    a, b = Fraction(c[0]), Fraction(c[1])
                else:
                    a, b = Fraction(c), Fraction(0)
                out.append((a, b))
            else:
                q = Fraction(c)
                if q.denominator > level.denominator_bound:
                    raise DefinitionError(
                        f"denominator {q.denominator} exceeds the level bound "
                        f"{level.denominator_bound}")
                out.append(q)
        return GroupElement(self, tuple(out))

    def unit(self, index: int) -> "GroupElement":
        """The element with 1 at ``index`` and 0 elsewhere."""
        coords = [0] * self.rank
        coords[index] = 1
        return self.element(coords)

    # -- arithmetic on raw coords --------------------------------------

    def _add(self, x, y):
        out = []
        for level, a, b in zip(self.levels, x, y):
            if isinstance(level, QuadraticLevel):
                out.append((a[0] + b[0], a[1] + b[1]))
            else:
                s = a + b
                if s.denominator > level.denominator_bound:
                    raise DefinitionError(
                        f"denominator {s.denominator} exceeds the level bound "
                        f"{level.denominator_bound}")
                out.append(s)
        return tuple(out)

    def _neg(self, x):
        return tuple((-a[0], -a[1]) if isinstance(l, QuadraticLevel) else -a
                     for l, a in zip(self.levels, x))

    def _scale(self, x, n):
        n = Fraction(n)
        out = []
        for level, a in zip(self.levels, x):
            if isinstance(level, QuadraticLevel):
                out.append((a[0] * n, a[1] * n))
            else:
                s = a * n
                if s.denominator > level.denominator_bound:
                    raise DefinitionError(
                        f"denominator {s.denominator} exceeds the level bound "
                        f"{level.denominator_bound}")
                out.append(s)
        return tuple(out)

    def _coord_sign(self, level, a) -> int:
        if isinstance(level, QuadraticLevel):
            return _quad_sign(a[0], a[1], level.d)
        return (a > 0) - (a < 0)

    def cmp(self, x: "GroupElement", y: "GroupElement") -> int:
        """Lexicographic comparison; first significant level decides."""
        if x.group is not self or y.group is not self:
            raise StructureError("comparison across distinct value groups")
        if self.all_rational:
            a, b = x.coords, y.coords
            return (a > b) - (a < b)
        for level, a, b in zip(self.levels, x.coords, y.coords):
            if isinstance(level, QuadraticLevel):
                s = _quad_sign(a[0] - b[0], a[1] - b[1], level.d)
            else:
                s = (a > b) - (a < b)
            if s:
                return s
        return EQ

    # -- descriptors ----------------------------------------------------

    def describe(self):
        """JSON-serializable level descriptors, e.g. ["Z", {"quadratic": 2}]."""
        out = []
        for level in self.levels:
            if isinstance(level, QuadraticLevel):
                out.append({"quadratic": level.d})
            elif level.denominator_bound != DEFAULT_DENOMINATOR_BOUND:
                out.append({"rational": {"label": level.label,
                                         "denominator_bound": level.denominator_bound}})
            else:
                out.append(level.label)
        return out

    @staticmethod
    def from_descriptor(desc) -> "ValueGroup":
        levels = []
        for item in desc:
            if isinstance(item, str):
                if item not in ("Z", "Q"):
                    raise DefinitionError(f"unknown level descriptor {item!r}")
                levels.append(RationalLevel(label=item))
            elif isinstance(item, dict) and "quadratic" in item:
                levels.append(QuadraticLevel(int(item["quadratic"])))
            elif isinstance(item, dict) and "rational" in item:
                spec = item["rational"]
                levels.append(RationalLevel(
                    label=spec.get("label", "Q"),
                    denominator_bound=int(spec.get(
                        "denominator_bound", DEFAULT_DENOMINATOR_BOUND))))
            else:
                raise DefinitionError(f"unknown level descriptor {item!r}")
        return ValueGroup(levels)

    def __repr__(self):
        return f"ValueGroup({self.describe()})"


@functools.total_ordering
class GroupElement:
    """An element of a ValueGroup.  Immutable and hashable."""

    __slots__ = ("group", "coords", "_hash")

    def __init__(self, group: ValueGroup, coords: tuple):
        self.group = group
        self.coords = coords
        self._hash = hash(coords)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group is other.group and self.coords == other.coords

    def __lt__(self, other):
        if self.group.all_rational:
            if other.group is not self.group:
                raise StructureError("comparison across distinct value groups")
            return self.coords < other.coords
        return self.group.cmp(self, other) == LT

    def __add__(self, other):
        if not isinstance(other, GroupElement) or other.group is not self.group:
            raise StructureError("addition across distinct value groups")
        return GroupElement(self.group, self.group._add(self.coords, other.coords))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GroupElement(self.group, self.group._neg(self.coords))

    def scale(self, n) -> "GroupElement":
        return GroupElement(self.group, self.group._scale(self.coords, n))

    def is_zero(self) -> bool:
        return all(self.group._coord_sign(l, a) == 0
                   for l, a in zip(self.group.levels, self.coords))

    def is_nonnegative(self) -> bool:
        return self >= self.group.zero()

    def sign(self) -> int:
        z = self.group.zero()
        return self.group.cmp(self, z)

    def first_nonzero_level(self):
        """Index of the most significant nonzero level, or None if zero."""
        for i, (l, a) in enumerate(zip(self.group.levels, self.coords)):
            if self.group._coord_sign(l, a) != 0:
                return i
        return None

    def describe(self):
        out = []
        for level, a in zip(self.group.levels, self.coords):
            if isinstance(level, QuadraticLevel):
                out.append([str(a[0]), str(a[1])])
            else:
                out.append(str(a))
        return out

    def __repr__(self):
        parts = []
        for level, a in zip(self.group.levels, self.coords):
            if isinstance(level, QuadraticLevel):
                parts.append(f"{a[0]}+{a[1]}*sqrt({level.d})")
            else:
                parts.append(str(a))
        return "(" + ", ".join(parts) + ")"


@dataclass(frozen=True)
class AtLeast:
    """Certificate that a value is >= ``bound`` but is otherwise unknown.

    ``bound is None`` marks an exactly-vanishing series: the value exceeds
    every bound the computation could have produced.
    """

    bound: GroupElement | None

    def __repr__(self):
        return f"AtLeast({self.bound!r})"


def cmp(a: GroupElement, b: GroupElement) -> int:
    """Total lex order on a shared group; LT/EQ/GT as -1/0/+1."""
    return a.group.cmp(a, b)


def in_isolated(a: GroupElement, level: int) -> bool:
    """True iff the first ``level`` coordinates of ``a`` vanish.

    ``level = 0`` is the whole group, ``level = rank`` the trivial subgroup.
    """
    if not 0 <= level <= a.group.rank:
        raise StructureError(f"isolated-subgroup index {level} out of range")
    g = a.group
    return all(g._coord_sign(l, c) == 0
               for l, c in list(zip(g.levels, a.coords))[:level])


def project_mod(a: GroupElement, level: int) -> GroupElement:
    """Zero every coordinate beyond index ``level``; the class mod the
    (level+1)-st isolated subgroup."""
    if not -1 <= level <= a.group.rank - 1:
        raise StructureError(f"projection index {level} out of range")
    g = a.group
    coords = tuple(c if i <= level else g._zero_coord(l)
                   for i, (l, c) in enumerate(zip(g.levels, a.coords)))
    return GroupElement(g, coords)


def value_sort_key(group: ValueGroup):
    """Sort key for (GroupElement | AtLeast) mixing certified values and caps.

    Certified values come before an AtLeast with the same bound; an exact-zero
    AtLeast(None) sorts after everything.
    """

    def key(v):
        if isinstance(v, AtLeast):
            if v.bound is None:
                return (2, ())
            return (0, _CmpWrap(v.bound), 1)
        return (0, _CmpWrap(v), 0)

    return key


class _CmpWrap:
    __slots__ = ("e",)

    def __init__(self, e):
        self.e = e

    def __lt__(self, other):
        return cmp(self.e, other.e) == LT

    def __eq__(self, other):
        return cmp(self.e, other.e) == EQ
