"""Local blowups along a valuation and trees of ring extensions.

A node presents R' = R[J/f] (localized at the center) by generator series:
the chosen minimal-value element f stays a generator, every other plain
generator g of J is replaced by the recentered quotient g/f, and relations
of the parent are carried over symbolically.  Windows of a node are formal
monomial windows; linear dependences among generator products are either
derived exactly from the parent's relations or detected (and flagged) as
series cancellations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import poly as P
from .echelon import IdealWindow, ValueEchelonBasis, value_echelon
from .errors import DefinitionError, PrecisionError, StructureError
from .groups import AtLeast, cmp, GT, LT
from .linalg import Subspace, preimage
from .rings import LocalRing, ValuationSpec, Window
from .series import HahnSeries, divide


def poly_substitute(p, gen_polys, nvars_out, degree_cap):
    """Substitute each generator by a polynomial, truncating at degree_cap."""
    out = {}
    for m, c in p.items():
        term = P.constant(c, nvars_out)
        for gi, e in enumerate(m):
            for _ in range(e):
                term = P.drop_high_degree(P.pmul(term, gen_polys[gi]), degree_cap)
        out = P.padd(out, term)
    return out


class TreeNode:
    """Common interface for the root ring and blowup nodes."""

    def __init__(self, name, ring: LocalRing, spec: ValuationSpec, parent=None,
                 parent_gen_polys=None, blowup_data=None):
        self.name = name
        self.ring = ring
        self.spec = spec
        self.parent = parent
        # parent generator name -> polynomial in this node's generators
        self.parent_gen_polys = parent_gen_polys
        self.blowup_data = blowup_data or {}
        self._windows = {}
        self._echelons = {}
        self._relations = None

    # -- caches ---------------------------------------------------------

    def window(self, N: int) -> Window:
        if N not in self._windows:
            self._windows[N] = Window(self.ring, N)
        return self._windows[N]

    def echelon(self, N: int) -> ValueEchelonBasis:
        if N not in self._echelons:
            self._echelons[N] = value_echelon(self.window(N), self.spec)
        return self._echelons[N]

    @property
    def is_root(self):
        return self.parent is None

    def root(self):
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def depth(self):
        d, node = 0, self
        while node.parent is not None:
            d, node = d + 1, node.parent
        return d

    # -- maps -------------------------------------------------------------

    def root_gen_polys(self):
        """Each root generator as a polynomial in this node's generators."""
        if getattr(self, "_root_gen_polys", None) is not None:
            return self._root_gen_polys
        if self.is_root:
            out = [P.generator(i, self.ring.nvars) for i in range(self.ring.nvars)]
        else:
            parent_polys = self.parent.root_gen_polys()
            own = [self.parent_gen_polys[g] for g in self.parent.ring.gens]
            out = [poly_substitute(rp, own, self.ring.nvars, 10**9)
                   for rp in parent_polys]
        self._root_gen_polys = out
        return out

    def map_poly_from_root(self, p, degree_cap):
        gen_polys = self.root_gen_polys()
        return poly_substitute(p, gen_polys, self.ring.nvars, degree_cap)

    def map_vec_from_root(self, root_window: Window, vec, N: int):
        p = root_window.poly(vec)
        img = self.map_poly_from_root(p, N)
        return self.window(N).vec(img)

    # -- exact relations ----------------------------------------------------

    def relation_polys(self):
        """Polynomials in the node generators that vanish exactly in the node
        ring: images of every ancestor rewrite rule, with monomial content
        divided out (the rings are domains)."""
        if self._relations is not None:
            return self._relations
        if self.is_root:
            self._relations = []
            return self._relations
        rels = []
        for q in self.parent.relation_polys():
            own = [self.parent_gen_polys[g] for g in self.parent.ring.gens]
            rels.append(poly_substitute(q, own, self.ring.nvars, 10**9))
        for rule in self.parent.ring.rules:
            diff = P.psub({rule.lead: Fraction(1)}, rule.rhs_poly())
            own = [self.parent_gen_polys[g] for g in self.parent.ring.gens]
            rels.append(poly_substitute(diff, own, self.ring.nvars, 10**9))
        out = []
        for q in rels:
            q = _strip_monomial_content(q)
            if q:
                out.append(q)
        self._relations = out
        return out

    def relation_space(self, N: int) -> Subspace:
        """Span of all relation multiples inside the degree-N window."""
        win = self.window(N)
        rows = []
        for q in self.relation_polys():
            for m in win.basis:
                prod = P.drop_high_degree(P.pmul(q, {m: Fraction(1)}), N)
                if prod:
                    rows.append(win.vec(prod))
        return Subspace(win.dim, rows)

    def completion_span(self, N: int, beta) -> tuple[Subspace, list]:
        """Window span of the extended valuation ideal of value >= beta in
        this node's completion: certified elements, flagged elements whose
        cap reaches beta, and exact relation multiples.  Returns the span and
        the list of flagged elements that could not be decided."""
        E = self.echelon(N)
        rows, undecided = [], []
        for el in E.elements:
            if isinstance(el.value, AtLeast):
                if el.value.bound is None or cmp(el.value.bound, beta) != LT:
                    rows.append(el.vec)
                else:
                    undecided.append(el)
            elif cmp(el.value, beta) != LT:
                rows.append(el.vec)
        space = Subspace(E.window.dim, rows).sum(self.relation_space(N))
        return space, undecided

    def __repr__(self):
        return f"TreeNode({self.name!r}, gens={self.ring.gens})"


def _strip_monomial_content(p):
    if not p:
        return p
    monos = list(p)
    content = tuple(min(m[i] for m in monos) for i in range(len(monos[0])))
    if not any(content):
        return p
    return {P.mono_div(content, m): c for m, c in p.items()}


def root_node(ring: LocalRing, spec: ValuationSpec, name="R") -> TreeNode:
    return TreeNode(name, ring, spec)


# ---------------------------------------------------------------------------
# recentering and blowing up


def recenter(candidate: HahnSeries, local_gens, N: int, hint=None):
    """Normalize a quotient series to a local generator of positive value.

    ``local_gens`` is a list of (name, poly-in-parent-gens, series).  When a
    hint polynomial is supplied its image is subtracted after checking that
    this strictly raises the value; otherwise only a value-zero candidate is
    corrected, first against constants, then against polynomials of bounded
    degree in the existing generators.  Failure raises rather than guessing.
    """
    zero_el = candidate.group.zero()
    o = candidate.ord()
    if hint is not None:
        hint_series = hint["series"]
        new = candidate - hint_series
        no = new.ord()
        if isinstance(o, AtLeast) or isinstance(no, AtLeast):
            raise PrecisionError("recentering hint undecidable at this precision")
        if cmp(no, o) != GT or cmp(no, zero_el) != GT:
            raise DefinitionError(
                "recentering hint does not raise the value to a positive one")
        return hint["poly"], new
    if isinstance(o, AtLeast):
        raise PrecisionError(
            "cannot recenter: quotient value unknown at this precision",
            hint="raise the series caps")
    if cmp(o, zero_el) == GT:
        return None, candidate
    if cmp(o, zero_el) == LT:
        raise DefinitionError("blowup quotient has negative value")
    # value-zero part is the coefficient at exponent zero; try constants first
    c0 = candidate.coefficient(zero_el)
    if c0 != 0:
        new = candidate - HahnSeries.constant(candidate.group, c0, candidate.prec)
        no = new.ord()
        if isinstance(no, AtLeast) or cmp(no, zero_el) == GT:
            return ("const", c0), new
    # bounded-degree search over existing local generators
    for deg_cap in (1, 2, 3):
        combo = _match_value_zero_part(candidate, local_gens, deg_cap)
        if combo is not None:
            return combo
    raise DefinitionError(
        "no recentering element found within the search bound; "
        "supply a recenter hint")


def _match_value_zero_part(candidate, local_gens, deg_cap):
    # Look for p in the existing generators, deg <= deg_cap, with
    # ord(candidate - iota(p)) > 0.  Only the exponent-zero coefficient can
    # carry value zero, so a single matching monomial suffices.
    from .rings import _monomials_of_degree

    nloc = len(local_gens)
    monos = []
    for d in range(deg_cap + 1):
        monos.extend(_monomials_of_degree(nloc, d))
    zero_el = candidate.group.zero()
    target = candidate.coefficient(zero_el)
    for m in monos:
        s = HahnSeries.constant(candidate.group, 1)
        pol = None
        for (name, gen_poly, gs), e in zip(local_gens, m):
            for _ in range(e):
                s = s * gs
                pol = gen_poly if pol is None else P.pmul(pol, gen_poly)
        c = s.coefficient(zero_el)
        if c == 0:
            continue
        coef = target / c
        new = candidate - s.scale(coef)
        no = new.ord()
        if not isinstance(no, AtLeast) and cmp(no, zero_el) == GT:
            if pol is None:  # the constant monomial
                parent_poly = {(): coef}  # fixed up by the caller
            else:
                parent_poly = P.pscale(pol, coef)
            return ("poly", parent_poly), new
    return None


def blowup_along(parent: TreeNode, J, N: int, names=None, hints=None,
                 node_name=None) -> TreeNode:
    """Blow up the ideal J (a list of polynomials in the parent generators)
    and localize at the center of the valuation.

    The element f attaining the minimal certified value of J (ties broken by
    input order) stays a generator; every other plain-generator member g is
    replaced by the recentered quotient g/f.
    """
    if not J:
        raise DefinitionError("cannot blow up the zero ideal")
    parsed = []
    for j in J:
        pj = parent.ring.parse(j) if isinstance(j, str) else j
        red = parent.ring.reduce(pj, N)
        if not red:
            raise DefinitionError("a blowup generator reduces to zero")
        parsed.append((j if isinstance(j, str) else None, red))
    cache = {}
    values = []
    for raw, red in parsed:
        o = parent.spec.series_of_poly(red, cache).ord()
        if isinstance(o, AtLeast):
            raise PrecisionError(
                "minimal value of the blowup ideal is unknown",
                hint="raise the series caps or the window degree")
        values.append(o)
    fi = 0
    for i in range(1, len(parsed)):
        if cmp(values[i], values[fi]) == LT:
            fi = i
    f_raw, f_poly = parsed[fi]
    f_series = parent.spec.series_of_poly(f_poly, cache)

    # which plain parent generators disappear
    dropped = {}
    others = []
    for i, (raw, red) in enumerate(parsed):
        if i == fi:
            continue
        gen_idx = _plain_generator_index(red, parent.ring)
        others.append((raw, red, gen_idx))
        if gen_idx is not None:
            dropped[parent.ring.gens[gen_idx]] = (raw, red)

    for m in f_poly:
        for gname in dropped:
            gi = parent.ring.gens.index(gname)
            if m[gi]:
                raise DefinitionError(
                    "the chosen minimal element references a generator that "
                    "the blowup eliminates; reorder the ideal generators")

    kept = [g for g in parent.ring.gens if g not in dropped]
    new_gen_names = []
    new_gen_series = []
    new_gen_defs = []  # (raw-label, subtracted-poly-in-parent-gens)
    local_gens = [(g, P.generator(parent.ring.gens.index(g), parent.ring.nvars),
                   parent.spec.images[g]) for g in kept]
    hints = hints or {}
    names = names or {}
    for k, (raw, red, gen_idx) in enumerate(others):
        q_series = divide(parent.spec.series_of_poly(red, cache), f_series)
        label = raw if raw is not None else f"J{k}"
        hint = None
        if label in hints or (gen_idx is not None and parent.ring.gens[gen_idx] in hints):
            hpoly_src = hints.get(label, hints.get(
                parent.ring.gens[gen_idx] if gen_idx is not None else None))
            hpoly = (parent.ring.parse(hpoly_src)
                     if isinstance(hpoly_src, str) else hpoly_src)
            hint = {"poly": hpoly,
                    "series": parent.spec.series_of_poly(hpoly, cache)}
        sub, series = recenter(q_series, local_gens, N, hint=hint)
        gname = names.get(label) or names.get(
            parent.ring.gens[gen_idx] if gen_idx is not None else "",
            f"q{parent.depth()}_{k}")
        new_gen_names.append(gname)
        new_gen_series.append(series)
        if hint is not None:
            sub_poly = hint["poly"]
        elif sub is None:
            sub_poly = P.zero()
        elif sub[0] == "const":
            sub_poly = P.constant(sub[1], parent.ring.nvars)
        else:
            sub_poly = sub[1]
            if sub_poly and next(iter(sub_poly)) == ():
                sub_poly = P.constant(next(iter(sub_poly.values())),
                                      parent.ring.nvars)
        new_gen_defs.append((raw, red, sub_poly))

    node_gens = tuple(kept) + tuple(new_gen_names)
    if len(set(node_gens)) != len(node_gens):
        raise DefinitionError("node generator names collide")
    node_ring = LocalRing(node_gens, [])
    images = {}
    for g in kept:
        images[g] = parent.spec.images[g]
    for gname, s in zip(new_gen_names, new_gen_series):
        images[gname] = s
    spec = ValuationSpec(node_ring, parent.spec.group, images,
                         kind=parent.spec.kind)

    # express every parent generator in the node generators
    nvars = node_ring.nvars
    parent_gen_polys = {}
    for g in kept:
        parent_gen_polys[g] = P.generator(node_gens.index(g), nvars)
    f_node = poly_substitute(
        f_poly, [parent_gen_polys.get(g, P.zero()) for g in parent.ring.gens],
        nvars, 10**9)
    for (raw, red, sub_poly), gname in zip(new_gen_defs, new_gen_names):
        gen_idx = _plain_generator_index(red, parent.ring)
        if gen_idx is None:
            continue
        sub_node = poly_substitute(
            sub_poly, [parent_gen_polys.get(g, P.zero())
                       for g in parent.ring.gens], nvars, 10**9)
        q_node = P.padd(P.generator(node_gens.index(gname), nvars), sub_node)
        parent_gen_polys[parent.ring.gens[gen_idx]] = P.pmul(f_node, q_node)

    data = {"J": [raw if raw is not None else "<poly>" for raw, _ in parsed],
            "f": f_raw if f_raw is not None else "<poly>",
            "f_poly": f_poly, "f_series": f_series}
    name = node_name or f"{parent.name}[J/{data['f']}]"
    node = TreeNode(name, node_ring, spec, parent=parent,
                    parent_gen_polys=parent_gen_polys, blowup_data=data)
    return node


def _plain_generator_index(p, ring: LocalRing):
    if len(p) != 1:
        return None
    m, c = next(iter(p.items()))
    if c != 1 or P.mono_degree(m) != 1:
        return None
    return m.index(1)


# ---------------------------------------------------------------------------
# node-level checks


def node_value_agreement(node: TreeNode, N: int, samples=None):
    """The node valuation restricted through the map agrees with the parent's
    valuation on parent elements (the extension property); verified on the
    parent window basis and optional extra samples."""
    if node.is_root:
        return {"checked": 0, "mismatches": []}
    parent = node.parent
    win = parent.window(N)
    cache_p, cache_n = {}, {}
    mismatches = []
    checked = 0
    polys = [dict([(m, Fraction(1))]) for m in win.basis]
    for s in samples or []:
        polys.append(parent.ring.parse(s) if isinstance(s, str) else s)
    own = [node.parent_gen_polys[g] for g in parent.ring.gens]
    for p in polys:
        vp = parent.spec.series_of_poly(parent.ring.reduce(p, N), cache_p).ord()
        img = poly_substitute(p, own, node.ring.nvars, 10**9)
        vn = node.spec.series_of_poly(img, cache_n).ord()
        checked += 1
        if isinstance(vp, AtLeast) or isinstance(vn, AtLeast):
            continue
        if cmp(vp, vn) != 0:
            mismatches.append((P.poly_string(p, parent.ring.gens), vp, vn))
    return {"checked": checked, "mismatches": mismatches}


def node_semigroup_extends(node: TreeNode, N: int, bound) -> bool:
    """Every certified parent value <= bound appears among the node values."""
    if node.is_root:
        return True
    pv = {v for v in node.parent.echelon(N).certified_values()
          if cmp(v, bound) != GT}
    nv = set(node.echelon(N).certified_values())
    return pv <= nv


def tree_of_ideals_check(nodes, family, semantics: str, N: int):
    """Verify pullback compatibility of a per-node ideal family along every
    edge of the tree.

    semantics "ring": membership of a parent element in the child ideal is
    decided by the certified value of its image (the family must be a family
    of value ideals); semantics "completion": membership is linear algebra in
    the child window including exact relation multiples.
    """
    report = {"edges": [], "violations": 0, "unknown": 0}
    for node in nodes:
        if node.is_root:
            continue
        parent = node.parent
        parent_ideal = family(parent)
        child_ideal = family(node)
        pwin = parent.window(N)
        edge = {"edge": f"{parent.name} -> {node.name}", "mismatches": []}
        if semantics == "completion":
            child_space = child_ideal.space.sum(node.relation_space(N))
            own = [node.parent_gen_polys[g] for g in parent.ring.gens]
            cols = []
            for i in range(pwin.dim):
                p = pwin.poly(_unit(pwin.dim, i))
                img = poly_substitute(p, own, node.ring.nvars, N)
                cols.append(node.window(N).vec(img))
            pull = preimage(cols, child_space, pwin.dim)
            if pull != parent_ideal.space:
                edge["mismatches"].append({
                    "kind": "pullback",
                    "pullback_dim": pull.dim,
                    "parent_dim": parent_ideal.space.dim,
                    "witness": _witness_poly(pull, parent_ideal.space, pwin),
                })
                report["violations"] += 1
        elif semantics == "ring":
            agree = node_value_agreement(node, N)
            for m in agree["mismatches"]:
                edge["mismatches"].append({"kind": "value", "detail": repr(m)})
                report["violations"] += 1
        else:
            raise StructureError(f"unknown semantics {semantics!r}")
        report["edges"].append(edge)
    report["compatible"] = report["violations"] == 0
    return report


def _unit(n, i):
    v = [Fraction(0)] * n
    v[i] = Fraction(1)
    return v


def _witness_poly(bigger: Subspace, smaller: Subspace, window: Window):
    for row in bigger.basis_vectors():
        if not smaller.contains(row):
            return P.poly_string(window.poly(row), window.ring.gens)
    return None
