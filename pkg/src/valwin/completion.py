"""Window-scale computations in the m-adic completion.

Ideals of the completion are represented by subspaces of R/m^N.  Deep
elements (Cauchy limits like u - sum c_i v^i) become visible by certifying
at a larger internal degree and projecting back down: an element of the
completion lies in an extended valuation ideal iff some approximant of
value >= beta has the same window image, which is exactly what the
projected span computes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import poly as P
from .blowup import TreeNode, poly_substitute
from .echelon import IdealWindow, graded_piece_dim, prime_valuation_ideal
from .errors import DefinitionError, PrecisionError, StructureError
from .groups import AtLeast, GroupElement, ValueGroup, cmp, in_isolated, GT, LT
from .linalg import Subspace, preimage
from .rings import Window, ZERO_ELEMENT
from .series import HahnSeries


class InH:
    """Marker: the element lies in the implicit-ideal approximant."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "InH"


IN_H = InH()


class Unknown:
    """Marker: precision insufficient to decide."""

    def __init__(self, detail=""):
        self.detail = detail

    def __repr__(self):
        return f"Unknown({self.detail})"


# ---------------------------------------------------------------------------
# extended ideals


def extend_ideal(ideal: IdealWindow) -> IdealWindow:
    """View an ideal window of R inside the completion window (the same
    subspace; the completion quotient by m^N is canonically R/m^N) and check
    that contracting back to polynomials of lower degree returns the input."""
    out = IdealWindow(ideal.window, ideal.space,
                      label=ideal.label + " R^",
                      certificate=dict(ideal.certificate, extended=True))
    d = ideal.window.N - 1
    lhs = out.restrict_to_degree(d)
    rhs = ideal.restrict_to_degree(d)
    out.certificate["contraction_exact"] = lhs == rhs
    return out


def _span_at(node: TreeNode, cert_N: int, beta, strict=False):
    """Window span (at the certification degree) of the extended valuation
    ideal of value >= beta (or > beta), together with undecided elements."""
    E = node.echelon(cert_N)
    rows, undecided = [], []
    for el in E.elements:
        if isinstance(el.value, AtLeast):
            if el.value.bound is None:
                rows.append(el.vec)
                continue
            c = cmp(el.value.bound, beta)
            ok = (c == GT) if strict else (c != LT)
            if ok:
                rows.append(el.vec)
            else:
                undecided.append(el)
            continue
        c = cmp(el.value, beta)
        ok = (c == GT) if strict else (c != LT)
        if ok:
            rows.append(el.vec)
    return Subspace(E.window.dim, rows), undecided


def _count_at(node: TreeNode, cert_N: int, beta) -> int:
    """Number of echelon elements certifying membership at value beta (they
    are linearly independent, so this is the unprojected span dimension)."""
    E = node.echelon(cert_N)
    n = 0
    for el in E.elements:
        if isinstance(el.value, AtLeast):
            if el.value.bound is None or cmp(el.value.bound, beta) != LT:
                n += 1
        elif cmp(el.value, beta) != LT:
            n += 1
    return n


def _project_span(node: TreeNode, space: Subspace, cert_N: int, N: int) -> Subspace:
    win_N = node.window(N)
    win_big = node.window(cert_N)
    rows = [win_N.project_from(win_big, v) for v in space.basis_vectors()]
    return Subspace(win_N.dim, rows)


def projected_valuation_ideal(node: TreeNode, beta, N: int, cert_N: int,
                              strict=False) -> IdealWindow:
    """P_beta R^ as a window ideal at degree N, certified at degree cert_N."""
    space, undecided = _span_at(node, cert_N, beta, strict=strict)
    proj = _project_span(node, space, cert_N, N)
    return IdealWindow(node.window(N), proj,
                       label=("P>" if strict else "P>=") + repr(beta) + " R^",
                       certificate={"N": N, "cert_degree": cert_N,
                                    "beta": beta.describe(),
                                    "undecided": len(undecided)})


@dataclass
class ImplicitIdealApprox:
    """Finite-precision approximant of an intersection of extended valuation
    ideals, with its scan trace and contraction certificate."""

    ideal: IdealWindow
    level: int
    N: int
    B: object
    tree: list
    stabilized: bool
    scan: list
    spans: list = field(default_factory=list)  # [(beta, projected Subspace)]
    contraction_ok: object = None
    undecided: int = 0
    node: object = None
    cert_N: int = 0
    cert_space: object = None  # final span at the certification window

    @property
    def status(self):
        if self.undecided:
            return "unknown"
        return "certified" if self.stabilized else "unknown"

    def contains(self, vec):
        return self.ideal.contains(vec)


def _scan_values(node: TreeNode, cert_N: int, B, level_filter=None,
                 group: ValueGroup | None = None):
    """Ascending candidate values: certified echelon values inside the
    filtered subgroup, capped at B, with B itself appended."""
    E = node.echelon(cert_N)
    zero = E.group.zero()
    vals = []
    for v in E.certified_values():
        if cmp(v, zero) != GT or cmp(v, B) == GT:
            continue
        if level_filter is not None and not level_filter(v):
            continue
        if v not in vals:
            vals.append(v)
    if (level_filter is None or level_filter(B)) and cmp(B, zero) == GT \
            and B not in vals:
        vals.append(B)
    vals.sort()
    return vals


def implicit_ideal_rank1(root: TreeNode, N: int, B, cert_degree=None
                         ) -> ImplicitIdealApprox:
    """Intersection of all P_beta R^ windows for beta <= B, for a rank-one
    valuation.  The window sequence is nested, so the result is the span at
    the largest scanned value; stabilization = the last two spans agree."""
    if root.spec.group.rank != 1:
        raise StructureError("rank-one intersection needs a rank-one group")
    cert_N = cert_degree or default_cert_degree(root, N, B)
    values = _scan_values(root, cert_N, B)
    if not values:
        raise PrecisionError("no values certified at or below the cap")
    scan, spans = [], []
    undecided_total = 0
    last, last_cert = None, None
    for beta in values:
        space, undecided = _span_at(root, cert_N, beta)
        undecided_total += len(undecided)
        proj = _project_span(root, space, cert_N, N)
        spans.append((beta, proj))
        scan.append((beta, proj.dim))
        last, last_cert = proj, space
    stabilized = len(spans) >= 2 and spans[-1][1] == spans[-2][1]
    ideal = IdealWindow(root.window(N), last, label="H",
                        certificate={"N": N, "B": B.describe(),
                                     "cert_degree": cert_N})
    approx = ImplicitIdealApprox(
        ideal=ideal, level=0, N=N, B=B, tree=[root.name],
        stabilized=stabilized, scan=scan, spans=spans,
        undecided=undecided_total, node=root, cert_N=cert_N,
        cert_space=last_cert)
    approx.contraction_ok = _check_contraction(approx, root, N)
    return approx


def default_cert_degree(root: TreeNode, N: int, B) -> int:
    """Internal certification degree: deep enough that every m^k element's
    value exceeds B (rank one), and at least twice the reporting degree so
    the base-contraction check is not fooled by products that vanish only
    mod m^N."""
    if root.spec.group.rank == 1:
        delta = root.spec.min_generator_value()
        k = 1
        while cmp(delta.scale(k), B) == LT and k < 64:
            k += 1
        return max(N, k + 1, 2 * (N - 1)) + 1
    return max(N + 2, 2 * (N - 1) + 1)


def _check_contraction(approx: ImplicitIdealApprox, root: TreeNode, N: int):
    """The approximant must contract to the prime valuation ideal P_level
    inside the polynomials of lower degree.

    For root-side computations the intersection is taken at the certification
    window and the scan is pushed to the largest value the echelon certifies
    in the isolated subgroup: low-degree polynomials with bounded value drop
    out there, exactly as in the full intersection."""
    d = N - 1
    if approx.cert_space is not None:
        # push the scan to the deepest certified value: every low-degree
        # polynomial has bounded value, so it leaves the restricted span there
        cert_N = approx.cert_N
        E = root.echelon(cert_N)
        flt = lambda v: in_isolated(v, approx.level)
        zero = root.spec.group.zero()
        deep = [v for v in E.certified_values()
                if flt(v) and cmp(v, zero) == GT]
        if deep:
            beta_star = max(deep)
            space, _ = _span_at(root, cert_N, beta_star)
        else:
            space = approx.cert_space
        win = root.window(cert_N)
        lhs = IdealWindow(win, space).restrict_to_degree(d)
        target = prime_valuation_ideal(E, approx.level)
        rhs = target.restrict_to_degree(d)
        return lhs == rhs
    lhs = approx.ideal.restrict_to_degree(d)
    target = prime_valuation_ideal(root.echelon(N), approx.level)
    rhs = target.restrict_to_degree(d)
    return lhs == rhs


def implicit_ideal_tree(nodes, level: int, N: int, B, cert_degree=None,
                        node_window=None) -> ImplicitIdealApprox:
    """Intersection over beta in the level-th isolated subgroup (capped at B)
    of the pullback to R^ of the deepest available extended valuation ideal
    along the supplied tree of blowups."""
    root = nodes[0]
    if not root.is_root:
        raise StructureError("the first node must be the root ring")
    cert_N = cert_degree or default_cert_degree(root, N, B)
    node_N = node_window or N
    flt = lambda v: in_isolated(v, level)

    candidates = set()
    for nd in nodes:
        cn = cert_N if nd.is_root else node_N
        candidates.update(_scan_values(nd, cn, B, level_filter=flt))
    values = sorted(candidates)
    if not values:
        raise PrecisionError("no values certified in the isolated subgroup")

    pwin = root.window(N)
    maps = {}
    for nd in nodes[1:]:
        cols = []
        for i in range(pwin.dim):
            p = pwin.poly(_unit_vec(pwin.dim, i))
            img = nd.map_poly_from_root(p, node_N)
            cols.append(nd.window(node_N).vec(img))
        maps[nd.name] = cols

    scan, spans = [], []
    undecided_total = 0
    last, last_cert = None, None
    # pullbacks are nested in beta; full spans are only needed at the last
    # two candidates (result + stabilization), raw counts fill the trace
    heavy = values[-2:]
    for beta in values:
        if beta not in heavy and len(nodes) == 1:
            scan.append((beta, _count_at(root, cert_N, beta)))
            continue
        best = None
        root_cert = None
        for nd in nodes:
            if nd.is_root:
                space, und = _span_at(root, cert_N, beta)
                undecided_total += len(und)
                root_cert = space
                pull = _project_span(root, space, cert_N, N)
            else:
                space, und = nd.completion_span(node_N, beta)
                undecided_total += len(und)
                pull = preimage(maps[nd.name], space, pwin.dim)
            if best is None:
                best = pull
            elif pull.contains_space(best):
                best = pull
            elif not best.contains_space(pull):
                raise StructureError(
                    "per-node pullbacks are not nested; supply a chain of nodes")
        spans.append((beta, best))
        scan.append((beta, best.dim))
        last, last_cert = best, root_cert
    stabilized = len(spans) >= 2 and spans[-1][1] == spans[-2][1]
    ideal = IdealWindow(pwin, last, label=f"H_{2 * level + 1}",
                        certificate={"N": N, "B": B.describe(),
                                     "cert_degree": cert_N,
                                     "tree": [nd.name for nd in nodes]})
    approx = ImplicitIdealApprox(
        ideal=ideal, level=level, N=N, B=B,
        tree=[nd.name for nd in nodes], stabilized=stabilized, scan=scan,
        spans=spans, undecided=undecided_total, node=root,
        cert_N=cert_N, cert_space=last_cert if len(nodes) == 1 else None)
    approx.contraction_ok = _check_contraction(approx, root, N)
    return approx


def _unit_vec(n, i):
    v = [Fraction(0)] * n
    v[i] = Fraction(1)
    return v


# ---------------------------------------------------------------------------
# the canonical rank-one extension


def nu_hat_value(approx: ImplicitIdealApprox, x):
    """The unique beta with x in P_beta R^ window but outside the next one;
    InH when x lies in the approximant, Unknown past the scanned cap."""
    root = approx.node
    win = root.window(approx.N)
    vec = x if isinstance(x, list) else win.vec(x)
    if all(c == 0 for c in vec):
        return ZERO_ELEMENT
    if approx.ideal.contains(vec):
        return IN_H
    best = root.spec.group.zero()
    for beta, span in approx.spans:
        if span.contains(vec):
            best = beta
        else:
            return best
    return Unknown(f"value at least {approx.B!r}")


def check_additivity(approx: ImplicitIdealApprox, pairs):
    """Value additivity of the extension on sample pairs; any product that
    vanishes in the window while both factors are nonzero, or any certified
    value mismatch, is returned as a counterexample."""
    root = approx.node
    win = root.window(approx.N)
    violations, checked, skipped = [], 0, 0
    for f, g in pairs:
        fv = f if isinstance(f, list) else win.vec(f)
        gv = g if isinstance(g, list) else win.vec(g)
        a, b = nu_hat_value(approx, fv), nu_hat_value(approx, gv)
        if isinstance(a, (InH, Unknown)) or a is ZERO_ELEMENT or \
                isinstance(b, (InH, Unknown)) or b is ZERO_ELEMENT:
            skipped += 1
            continue
        prod = win.mul_vec(fv, win.poly(gv))
        p = nu_hat_value(approx, prod)
        if p is ZERO_ELEMENT:
            violations.append({
                "f": P.poly_string(win.poly(fv), win.ring.gens),
                "g": P.poly_string(win.poly(gv), win.ring.gens),
                "kind": "product vanishes in the window",
            })
            continue
        expected = a + b
        # products whose expected value reaches the m-adic resolution N*delta
        # (or the scan cap) cannot be decided from this window
        delta = root.spec.min_generator_value()
        if cmp(expected, approx.B) == GT or \
                cmp(expected, delta.scale(approx.N)) != LT:
            skipped += 1
            continue
        checked += 1
        if isinstance(p, (InH, Unknown)):
            violations.append({
                "f": P.poly_string(win.poly(fv), win.ring.gens),
                "g": P.poly_string(win.poly(gv), win.ring.gens),
                "kind": f"product value undecidable, expected {expected!r}",
            })
        elif cmp(p, expected) != 0:
            violations.append({
                "f": P.poly_string(win.poly(fv), win.ring.gens),
                "g": P.poly_string(win.poly(gv), win.ring.gens),
                "kind": f"value {p!r} != {expected!r}",
            })
    return {"checked": checked, "skipped": skipped, "violations": violations}


def sample_pairs(approx: ImplicitIdealApprox, count: int, seed: int):
    """Deterministic sparse sample pairs whose expected product value stays
    below the window's m-adic resolution, so additivity is decidable."""
    import random

    rng = random.Random(seed)
    root = approx.node
    E = root.echelon(approx.N)
    delta = root.spec.min_generator_value()
    resolution = delta.scale(approx.N)
    small = [el for el in E.elements if el.certified
             and cmp(el.value.scale(2), resolution) == LT]
    if not small:
        return []
    pairs = []
    attempts = 0
    while len(pairs) < count and attempts < 20 * count:
        attempts += 1
        out = []
        for _ in range(2):
            k = rng.randrange(1, 3)
            vec = [Fraction(0)] * E.window.dim
            for _ in range(k):
                el = small[rng.randrange(len(small))]
                c = rng.randrange(1, 5)
                vec = [a + c * b for a, b in zip(vec, el.vec)]
            out.append(vec)
        pairs.append(tuple(out))
    return pairs


# ---------------------------------------------------------------------------
# primality probe


def primality_probe(ideal: IdealWindow, deg: int):
    """Search for f, g outside the ideal window whose product lands inside.

    Candidates f run over echelon-independent spanning elements of the
    complement; partners g are solved linearly (the colon of the ideal by f).
    A pair only counts when ord_m(f) + ord_m(g) < N, which rules out products
    vanishing for bare truncation reasons.  Absence of a witness is reported
    as none-found at this precision, never as a primality certificate.
    """
    win = ideal.window
    N = win.N
    spanning = []
    for i, m in enumerate(win.basis):
        if P.mono_degree(m) > deg:
            continue
        vec = _unit_vec(win.dim, i)
        if not ideal.space.contains(vec):
            spanning.append((m, vec))
    for m, fvec in spanning:
        f_poly = win.poly(fvec)
        f_ord = P.pmin_degree(f_poly)
        cols = [win.mul_vec(_unit_vec(win.dim, i), f_poly)
                for i in range(win.dim)]
        col_space = preimage(cols, ideal.space, win.dim)
        for gvec in col_space.basis_vectors():
            g_poly = win.poly(gvec)
            if not g_poly:
                continue
            if ideal.space.contains(gvec):
                continue
            if P.pmin_degree(g_poly) + f_ord >= N:
                continue
            prod = win.mul_vec(fvec, g_poly)
            return {
                "status": "witness",
                "f": P.poly_string(f_poly, win.ring.gens),
                "g": P.poly_string(g_poly, win.ring.gens),
                "product": P.poly_string(win.poly(prod), win.ring.gens),
                "product_in_ideal": bool(ideal.space.contains(prod)),
                "N": N, "deg": deg,
            }
    return {"status": "none-found", "N": N, "deg": deg,
            "note": "not a primality certificate"}


# A spanning element here is a single basis monomial outside the ideal; the
# deep cancellation witnesses live in the colon solutions, so nothing is lost
# by keeping f itself simple.


def graded_iso_check(root: TreeNode, approx: ImplicitIdealApprox, B,
                     cert_degree=None):
    """Per-value dimension comparison between the graded ring of R and the
    graded ring of the completion modulo the approximant."""
    N = approx.N
    cert_N = cert_degree or default_cert_degree(root, N, B)
    E = root.echelon(cert_N)
    zero = root.spec.group.zero()
    values = [zero] + _scan_values(root, cert_N, B)
    if B in values and not any(
            el.certified and cmp(el.value, B) == 0 for el in E.elements):
        values.remove(B)
    h_space = approx.ideal.space
    rows = []
    ok = True
    for beta in values:
        lhs = graded_piece_dim(E, beta)
        ge_proj = projected_valuation_ideal(root, beta, N, cert_N).space
        gt_proj = projected_valuation_ideal(root, beta, N, cert_N,
                                            strict=True).space
        rhs = ge_proj.sum(h_space).dim - gt_proj.sum(h_space).dim
        rows.append({"beta": beta.describe(), "dim_base": lhs,
                     "dim_completion": rhs, "equal": lhs == rhs})
        ok = ok and lhs == rhs
    return {"equal": ok, "per_value": rows, "N": N, "B": B.describe()}


# ---------------------------------------------------------------------------
# behaviour under blowups


def contraction_check(node: TreeNode, beta, N: int, cert_degree=None,
                      node_window=None):
    """Compare the pullback of the blown-up extended ideal with the base one:
    Equal for rank-one valuations, StrictlyLarger witnesses the failure of
    naive intersections to commute with blowing up."""
    root = node.root()
    cert_N = cert_degree or default_cert_degree(root, N, beta)
    node_N = node_window or N
    base = projected_valuation_ideal(root, beta, N, cert_N).space
    if node.is_root:
        return {"verdict": "Equal", "beta": beta.describe(), "N": N}
    space, undecided = node.completion_span(node_N, beta)
    pwin = root.window(N)
    cols = []
    for i in range(pwin.dim):
        p = pwin.poly(_unit_vec(pwin.dim, i))
        img = node.map_poly_from_root(p, node_N)
        cols.append(node.window(node_N).vec(img))
    pulled = preimage(cols, space, pwin.dim)
    if pulled == base:
        verdict = "Equal"
    elif pulled.contains_space(base):
        verdict = "StrictlyLarger"
    elif base.contains_space(pulled):
        verdict = "Unknown" if undecided else "StrictlySmaller"
    else:
        verdict = "Unknown"
    out = {"verdict": verdict, "beta": beta.describe(), "N": N,
           "base_dim": base.dim, "pullback_dim": pulled.dim,
           "undecided": len(undecided)}
    if verdict == "StrictlyLarger":
        for row in pulled.basis_vectors():
            if not base.contains(row):
                out["witness"] = P.poly_string(pwin.poly(row), pwin.ring.gens)
                break
    return out


def strict_transform(J: IdealWindow, node: TreeNode, i_max: int, N: int):
    """Union over i of ((J R^' ) : f^i) inside the node window, f being the
    minimal-value element recorded by the blowup; colon solving is restricted
    to degrees where the product cannot vanish for truncation reasons."""
    if node.is_root:
        raise StructureError("strict transform needs a blowup node")
    f_poly_parent = node.blowup_data["f_poly"]
    own = [node.parent_gen_polys[g] for g in node.parent.ring.gens]
    f_node = poly_substitute(f_poly_parent, own, node.ring.nvars, N)
    f_ord = P.pmin_degree(f_node)
    nwin = node.window(N)

    pwin = J.window
    if pwin.ring is not node.root().ring:
        raise StructureError("the transformed ideal must live at the root window")
    rows = []
    for v in J.space.basis_vectors():
        img = node.map_poly_from_root(pwin.poly(v), N)
        rows.append(nwin.vec(img))
    extended = IdealWindow(nwin, Subspace(nwin.dim, rows),
                           label=J.label + " R^'").ideal_closure()
    j_space = extended.space.sum(node.relation_space(N))

    current = Subspace(nwin.dim, j_space.rows)
    trace = [current.dim]
    stabilized = False
    f_power = P.constant(1, node.ring.nvars)
    for i in range(1, i_max + 1):
        f_power = P.drop_high_degree(P.pmul(f_power, f_node), N)
        if not f_power:
            break
        limit = N - i * f_ord
        if limit <= 0:
            break
        allowed = nwin.degree_coordinates(limit)
        cols, keep = [], []
        for idx in allowed:
            cols.append(nwin.mul_vec(_unit_vec(nwin.dim, idx), f_power))
            keep.append(idx)
        partial = preimage(cols, j_space, len(keep))
        lifted = []
        for sol in partial.basis_vectors():
            v = [Fraction(0)] * nwin.dim
            for pos, idx in enumerate(keep):
                v[idx] = sol[pos]
            lifted.append(v)
        new = current.sum(Subspace(nwin.dim, lifted))
        new_ideal = IdealWindow(nwin, new).ideal_closure()
        if new_ideal.space == current:
            stabilized = True
            trace.append(current.dim)
            break
        current = new_ideal.space
        trace.append(current.dim)
    return IdealWindow(nwin, current, label=J.label + "^str",
                       certificate={"N": N, "i_max": i_max,
                                    "stabilized": stabilized,
                                    "dims": trace})


# ---------------------------------------------------------------------------
# determined chains for explicit composite extensions


@dataclass
class ExtensionSpec:
    """A candidate extension of the valuation to the completion: a
    substitution into a larger-rank group together with the level embedding
    of the base group into the extension group."""

    base: TreeNode
    spec: object            # ValuationSpec on the same ring, hat group
    embedding: tuple        # base level j -> hat level embedding[j]

    def __post_init__(self):
        base_group = self.base.spec.group
        hat_group = self.spec.group
        if len(self.embedding) != base_group.rank:
            raise DefinitionError("embedding must place every base level")
        if sorted(self.embedding) != list(self.embedding):
            raise DefinitionError("embedding must preserve the level order")
        for j, k in enumerate(self.embedding):
            if not 0 <= k < hat_group.rank:
                raise DefinitionError("embedding index out of range")
            if type(base_group.levels[j]) is not type(hat_group.levels[k]):
                raise DefinitionError("embedding must match level kinds")

    def embed(self, v: GroupElement) -> GroupElement:
        hat = self.spec.group
        coords = [0] * hat.rank
        out = hat.zero()
        raw = list(out.coords)
        for j, k in enumerate(self.embedding):
            raw[k] = v.coords[j]
        return type(out)(hat, tuple(raw))

    def verify_restriction(self, N: int):
        """The extension must restrict to the base valuation on the window."""
        base_spec = self.base.spec
        win = self.base.window(N)
        cache_b, cache_h = {}, {}
        for m in win.basis:
            p = {m: Fraction(1)}
            vb = base_spec.series_of_poly(p, cache_b).ord()
            vh = self.spec.series_of_poly(p, cache_h).ord()
            if isinstance(vb, AtLeast) or isinstance(vh, AtLeast):
                continue
            if cmp(self.embed(vb), vh) != 0:
                raise DefinitionError(
                    "extension does not restrict to the base valuation on "
                    f"{P.mono_string(m, win.ring.gens)}: {vb!r} vs {vh!r}")
        return True

    def dagger_indices(self):
        """For each chain position i = 0..2r, the isolated-subgroup index of
        the extension group cutting out the i-th determined ideal."""
        base_group = self.base.spec.group
        hat_group = self.spec.group
        r, rhat = base_group.rank, hat_group.rank

        def meets(k):  # index of the base isolated subgroup Delta-hat_k cuts out
            return sum(1 for s in self.embedding if s < k)

        out = []
        for ell in range(r + 1):
            ks = [k for k in range(rhat + 1) if meets(k) == ell]
            if not ks:
                raise DefinitionError("embedding admits no matching subgroup")
            out.append((min(ks), max(ks)))
        indices = []
        for ell in range(r + 1):
            indices.append(out[ell][0])   # position 2*ell: greatest subgroup
            indices.append(out[ell][1])   # position 2*ell+1: smallest
        # rank-one steps between consecutive odd/even positions
        for ell in range(1, r + 1):
            if indices[2 * ell] - indices[2 * ell - 1] != 1:
                raise DefinitionError(
                    "determined subgroups do not differ by a rank-one step")
        return indices[:2 * r + 1]


def _outside_subgroup_solve(node: TreeNode, k: int, cert_N: int) -> Subspace:
    """Window vectors (at the certification degree) whose series image has no
    term in the k-th isolated sublattice: exactly the elements of value
    outside it, since any surviving complement term would be the lex minimum.
    """
    win = node.window(cert_N)
    cache = {}
    images = [node.spec.series_of_mono(m, cache) for m in win.basis]
    bad_exps = sorted({e for s in images for e in s.terms
                       if in_isolated(e, k)})
    rows = []
    for e in bad_exps:
        rows.append([s.coefficient(e) for s in images])
    from .linalg import kernel

    return Subspace(win.dim, kernel(rows, win.dim))


def determined_chain(ext: ExtensionSpec, N: int, cert_degree=None,
                     implicit=None, support=None):
    """The determined ideal windows cut out by the isolated subgroups of the
    extension group: elements whose declared extension value lies outside
    the subgroup, solved exactly in the window, plus the declared support.

    Contract checks: consecutive containment, base contractions equal to the
    prime valuation ideals, and containment of any supplied implicit
    approximants.
    """
    ext.verify_restriction(N)
    base = ext.base
    hat_node = TreeNode(base.name + "^", base.ring, ext.spec)
    indices = ext.dagger_indices()
    r = base.spec.group.rank
    hat_group = ext.spec.group
    cert_N = cert_degree or (2 * N - 2)
    win = base.window(N)
    support_space = support.space if support is not None else None

    chain = []
    solves = {}
    for i, k in enumerate(indices):
        if k not in solves:
            deep = _outside_subgroup_solve(hat_node, k, cert_N)
            shallow = _outside_subgroup_solve(hat_node, k, cert_N - 1)
            proj = _project_span(hat_node, deep, cert_N, N)
            proj_shallow = _project_span(hat_node, shallow, cert_N - 1, N)
            solves[k] = (deep, proj, proj == proj_shallow)
        deep, proj, stable = solves[k]
        space = proj if support_space is None else proj.sum(support_space)
        ideal = IdealWindow(win, space, label=f"Htilde_{i}",
                            certificate={"N": N, "subgroup": k,
                                         "cert_degree": cert_N})
        chain.append({"index": i, "ideal": ideal, "stabilized": stable})

    checks = {"nested": True, "base_contractions": [], "implicit_contained": []}
    for a, b in zip(chain, chain[1:]):
        if not b["ideal"].space.contains_space(a["ideal"].space):
            checks["nested"] = False
    # base contraction: low-degree polynomials inside the solve space must be
    # exactly the prime valuation ideal of the base ring, degree-restricted
    d = N - 1
    E_base = base.echelon(cert_N)
    cert_win = base.window(cert_N)
    for ell in range(r + 1):
        target = prime_valuation_ideal(E_base, ell).restrict_to_degree(d)
        for i in (2 * ell, min(2 * ell + 1, 2 * r)):
            k = indices[i]
            # a declared support carries its own contraction certificate and
            # contributes nothing below the window by that certificate
            got = IdealWindow(cert_win, solves[k][0]).restrict_to_degree(d)
            checks["base_contractions"].append(
                {"i": i, "level": ell, "equal": got == target})
    for i, approx in (implicit or {}).items():
        ok = chain[i]["ideal"].space.contains_space(approx.ideal.space)
        checks["implicit_contained"].append({"i": i, "ok": ok})
    return {"chain": chain, "checks": checks,
            "dagger_indices": indices, "N": N}
