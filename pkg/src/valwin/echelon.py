"""Value echelon bases and valuation-ideal windows.

Gaussian elimination on the series images of the window basis, always
clearing the currently least leading exponent, yields a triangular basis in
which every element carries a certified value (its leading exponent) or an
explicit AtLeast cap.  Valuation ideals, graded pieces and value semigroups
are all read off this basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import poly as P
from .errors import PrecisionError, StructureError
from .groups import AtLeast, GroupElement, cmp, in_isolated, project_mod, LT, GT
from .linalg import Subspace
from .rings import ValuationSpec, Window


@dataclass
class EchelonElement:
    vec: list                      # window coordinates
    series: object                 # truncated series image
    value: object                  # GroupElement | AtLeast
    pivot: object = None           # leading exponent when certified
    dependent: bool = False        # series vanished with no frontier at all

    @property
    def certified(self):
        return not isinstance(self.value, AtLeast)


class ValueEchelonBasis:
    """Triangular window basis ordered by non-decreasing value."""

    def __init__(self, window: Window, spec: ValuationSpec, elements):
        self.window = window
        self.spec = spec
        self.elements = elements

    @property
    def group(self):
        return self.spec.group

    def certified_values(self):
        return [e.value for e in self.elements if e.certified]

    def flagged(self):
        return [e for e in self.elements if not e.certified]

    def cap(self):
        """Least AtLeast bound among flagged elements, or None when every
        element carries a certified value (no separation limit)."""
        flagged = [e.value.bound for e in self.flagged() if e.value.bound is not None]
        return min(flagged) if flagged else None

    def min_positive_value(self):
        zero = self.group.zero()
        pos = [v for v in self.certified_values() if cmp(v, zero) == GT]
        return min(pos) if pos else None

    def expansion(self, vec):
        """Coefficients of ``vec`` in this basis (which spans the window):
        plain Gaussian elimination on the transposed coordinate matrix."""
        rows = [e.vec for e in self.elements]
        n = self.window.dim
        mat = [[rows[j][i] for j in range(len(rows))] for i in range(n)]
        rhs = list(vec)
        piv = 0
        order = []
        for c in range(len(rows)):
            sel = next((r for r in range(piv, n) if mat[r][c] != 0), None)
            if sel is None:
                continue
            mat[piv], mat[sel] = mat[sel], mat[piv]
            rhs[piv], rhs[sel] = rhs[sel], rhs[piv]
            inv = 1 / mat[piv][c]
            mat[piv] = [x * inv for x in mat[piv]]
            rhs[piv] *= inv
            for r in range(n):
                if r != piv and mat[r][c] != 0:
                    f = mat[r][c]
                    mat[r] = [a - f * b for a, b in zip(mat[r], mat[piv])]
                    rhs[r] -= f * rhs[piv]
            order.append(c)
            piv += 1
        coeffs = [Fraction(0)] * len(self.elements)
        for row_idx, c in enumerate(order):
            coeffs[c] = rhs[row_idx]
        return coeffs


def value_echelon(window: Window, spec: ValuationSpec) -> ValueEchelonBasis:
    """Eliminate on series images, least leading exponent first; ties are
    broken by the position of the entry in the working list (window basis
    order), which keeps output deterministic."""
    if spec.ring is not window.ring:
        raise StructureError("valuation spec belongs to a different ring")
    cache = {}
    work = []
    for i, m in enumerate(window.basis):
        vec = [Fraction(0)] * window.dim
        vec[i] = Fraction(1)
        work.append([vec, spec.series_of_mono(m, cache)])

    pivots = {}   # leading exponent -> element
    done = []
    remaining = list(range(len(work)))
    while remaining:
        # pick the entry with the least leading exponent; exhausted series
        # fall out of the loop as flagged elements
        best = None
        for idx in remaining:
            s = work[idx][1]
            if s.is_empty():
                continue
            e = s.leading()[0]
            if best is None or cmp(e, best[1]) == LT:
                best = (idx, e)
        if best is None:
            break
        idx, e = best
        vec, s = work[idx]
        if e in pivots:
            pvec, pseries = pivots[e]
            ratio = s.terms[e] / pseries.terms[e]
            work[idx][0] = [a - ratio * b for a, b in zip(vec, pvec)]
            work[idx][1] = s - pseries.scale(ratio)
        else:
            pivots[e] = (vec, s)
            done.append(EchelonElement(vec=vec, series=s, value=e, pivot=e))
            remaining.remove(idx)
    for idx in remaining:
        vec, s = work[idx]
        if any(c != 0 for c in vec):
            bound = s.prec
            done.append(EchelonElement(
                vec=vec, series=s, value=AtLeast(bound),
                dependent=bound is None))

    # normalize: unit coefficient at the lowest-index window coordinate
    for el in done:
        lead = next(c for c in el.vec if c != 0)
        if lead != 1:
            el.vec = [c / lead for c in el.vec]
            el.series = el.series.scale(1 / lead)

    group = spec.group
    from .groups import value_sort_key

    done.sort(key=lambda el: value_sort_key(group)(el.value))
    return ValueEchelonBasis(window, spec, done)


# ---------------------------------------------------------------------------
# ideal windows


@dataclass
class IdealWindow:
    """A subspace of a window representing an ideal at precision N."""

    window: Window
    space: Subspace
    label: str = ""
    certificate: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.space.dim

    def contains(self, vec):
        return self.space.contains(vec)

    def is_zero(self):
        return self.space.is_zero()

    def basis_polys(self):
        return [self.window.poly(v) for v in self.space.basis_vectors()]

    def restrict_to_degree(self, d: int) -> Subspace:
        """Intersection with the polynomials of degree < d (the honest
        window-scale meaning of contracting to the base ring)."""
        return self.space.restrict_to_coordinates(self.window.degree_coordinates(d))

    def closure_defect(self):
        """Basis elements whose product with some generator leaves the span;
        empty for every honestly produced valuation ideal."""
        bad = []
        for v in self.space.basis_vectors():
            for i, g in enumerate(self.window.ring.gens):
                gp = P.generator(i, self.window.ring.nvars)
                if not self.space.contains(self.window.mul_vec(v, gp)):
                    bad.append((self.window.poly(v), g))
        return bad

    def ideal_closure(self) -> "IdealWindow":
        """Smallest generator-multiplication-closed span containing this one."""
        rows = [list(r) for r in self.space.rows]
        space = Subspace(self.window.dim, rows)
        changed = True
        while changed:
            changed = False
            new_rows = []
            for v in space.basis_vectors():
                for i in range(self.window.ring.nvars):
                    gp = P.generator(i, self.window.ring.nvars)
                    w = self.window.mul_vec(v, gp)
                    if not space.contains(w):
                        new_rows.append(w)
            if new_rows:
                space = Subspace(self.window.dim, space.rows + new_rows)
                changed = True
        return IdealWindow(self.window, space, label=self.label)


def _value_at_least(value, beta, strict: bool) -> bool | None:
    """Tri-state: does this element certify value >= beta (resp. > beta)?
    None means the certificate cannot decide."""
    if isinstance(value, AtLeast):
        if value.bound is None:
            return True
        c = cmp(value.bound, beta)
        if strict:
            return True if c == GT else None
        return True if c != LT else None
    c = cmp(value, beta)
    if strict:
        return c == GT
    return c != LT


def valuation_ideal(E: ValueEchelonBasis, beta: GroupElement,
                    strict: bool = False) -> IdealWindow:
    """Span of the echelon elements of value >= beta (or > beta)."""
    zero = E.group.zero()
    if cmp(beta, zero) == LT:
        raise StructureError("valuation ideals are indexed by nonnegative values")
    rows = []
    for el in E.elements:
        ok = _value_at_least(el.value, beta, strict)
        if ok is None:
            raise PrecisionError(
                f"an element is only certified AtLeast({el.value.bound!r}), "
                f"undecidable against {beta!r}",
                hint="raise the series caps")
        if ok:
            rows.append(el.vec)
    label = ("P>" if strict else "P>=") + repr(beta)
    return IdealWindow(E.window, E.window.subspace(rows), label=label,
                       certificate={"N": E.window.N, "beta": beta.describe(),
                                    "strict": strict})


def valuation_ideal_mod(E: ValueEchelonBasis, beta_bar: GroupElement,
                        level: int) -> IdealWindow:
    """Elements whose value modulo the (level+1)-st isolated subgroup is
    >= beta_bar; beta_bar must itself be a class from that quotient."""
    if not in_isolated(beta_bar, level):
        raise StructureError(
            "the class representative must lie in the isolated subgroup")
    beta_proj = project_mod(beta_bar, level)
    rows = []
    for el in E.elements:
        if isinstance(el.value, AtLeast):
            if el.value.bound is None:
                rows.append(el.vec)
                continue
            v = project_mod(el.value.bound, level)
            if cmp(v, beta_proj) != LT:
                rows.append(el.vec)
            else:
                raise PrecisionError(
                    "flagged element undecidable for the projected ideal",
                    hint="raise the series caps")
        else:
            if cmp(project_mod(el.value, level), beta_proj) != LT:
                rows.append(el.vec)
    return IdealWindow(E.window, E.window.subspace(rows),
                       label=f"Pbar>={beta_bar!r}@{level}",
                       certificate={"N": E.window.N, "level": level})


def prime_valuation_ideal(E: ValueEchelonBasis, level: int) -> IdealWindow:
    """Elements whose value lies outside the level-th isolated subgroup.
    Flagged elements whose cap sits inside the subgroup are excluded and
    reported in the certificate."""
    if not 0 <= level <= E.group.rank:
        raise StructureError("isolated-subgroup index out of range")
    rows, excluded = [], []
    for el in E.elements:
        if isinstance(el.value, AtLeast):
            if el.value.bound is not None and not in_isolated(el.value.bound, level):
                # every value >= bound is outside too
                rows.append(el.vec)
            else:
                excluded.append(el)
            continue
        if not in_isolated(el.value, level):
            rows.append(el.vec)
    return IdealWindow(E.window, E.window.subspace(rows), label=f"P_{level}",
                       certificate={"N": E.window.N, "level": level,
                                    "excluded_flagged": len(excluded)})


def graded_piece_dim(E: ValueEchelonBasis, beta: GroupElement) -> int:
    """dim P_beta / P_beta+ inside the window."""
    for el in E.flagged():
        if el.value.bound is not None and cmp(el.value.bound, beta) != GT:
            raise PrecisionError(
                f"value {beta!r} is at or beyond a flagged cap "
                f"{el.value.bound!r}; the dimension cannot be certified")
    return sum(1 for el in E.elements
               if el.certified and cmp(el.value, beta) == 0)


def value_semigroup(E: ValueEchelonBasis, bound: GroupElement,
                    require_complete: bool = True):
    """Distinct certified values <= bound, sorted.

    Completeness below the bound holds once every element of m^N has value
    beyond it, i.e. bound <= N * (least positive value); checked unless
    disabled.
    """
    if require_complete:
        delta = E.min_positive_value()
        if delta is None:
            raise PrecisionError("no positive values certified in this window")
        if cmp(delta.scale(E.window.N), bound) == LT:
            raise PrecisionError(
                f"window too shallow to enumerate values up to {bound!r}",
                hint=f"need N * {delta!r} >= bound")
    vals = []
    for v in E.certified_values():
        if cmp(v, bound) != GT and v not in vals:
            vals.append(v)
    vals.sort()
    return vals
