"""Dense exact linear algebra over the rationals.

Everything here works on lists of Fractions.  Window dimensions stay in the
low hundreds, so reduced row echelon form with full pivoting-by-position is
fast enough and keeps results canonical for golden tests.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)


def rref(rows):
    """Reduced row echelon form. Returns (pivot_columns, reduced_rows);
    zero rows are dropped and rows are sorted by pivot column."""
    mat = [list(r) for r in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncols):
        # find a row with a nonzero entry in column c
        sel = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                sel = i
                break
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return pivots, mat[:r]


def kernel(rows, ncols):
    """Basis of {x : A x = 0} for the matrix with the given rows."""
    pivots, red = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [ZERO] * ncols
        v[fc] = Fraction(1)
        for prow, pc in zip(red, pivots):
            v[pc] = -prow[fc]
        basis.append(v)
    return basis


class Subspace:
    """A subspace of Q^n held in reduced row form (canonical basis)."""

    __slots__ = ("ambient", "pivots", "rows")

    def __init__(self, ambient: int, rows=()):
        self.ambient = ambient
        self.pivots, self.rows = rref([list(r) for r in rows])

    @property
    def dim(self):
        return len(self.rows)

    def is_zero(self):
        return not self.rows

    def reduce(self, vec):
        """Residual of ``vec`` after subtracting its span component."""
        v = list(vec)
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                f = v[p]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def contains(self, vec):
        return all(x == 0 for x in self.reduce(vec))

    def contains_space(self, other: "Subspace"):
        return all(self.contains(r) for r in other.rows)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.ambient == other.ambient
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ambient, tuple(tuple(r) for r in self.rows)))

    def sum(self, other: "Subspace"):
        return Subspace(self.ambient, self.rows + other.rows)

    def intersect(self, other: "Subspace"):
        """Zassenhaus-free intersection: x in both spans."""
        # Solve [B1^T | -B2^T] (a;b) = 0 and map back through B1.
        b1, b2 = self.rows, other.rows
        if not b1 or not b2:
            return Subspace(self.ambient)
        n1, n2 = len(b1), len(b2)
        sys_rows = []
        for c in range(self.ambient):
            sys_rows.append([b1[i][c] for i in range(n1)] +
                            [-b2[j][c] for j in range(n2)])
        out = []
        for sol in kernel(sys_rows, n1 + n2):
            vec = [ZERO] * self.ambient
            for i in range(n1):
                if sol[i] != 0:
                    vec = [a + sol[i] * b for a, b in zip(vec, b1[i])]
            out.append(vec)
        return Subspace(self.ambient, out)

    def restrict_to_coordinates(self, allowed):
        """Intersection with the coordinate subspace supported on ``allowed``."""
        allowed = set(allowed)
        blocked = [c for c in range(self.ambient) if c not in allowed]
        if not self.rows:
            return Subspace(self.ambient)
        # kernel of the projection onto blocked coordinates, inside the span
        sys_rows = []
        for c in blocked:
            sys_rows.append([row[c] for row in self.rows])
        combos = kernel(sys_rows, len(self.rows)) if sys_rows else [
            [Fraction(i == j) for j in range(len(self.rows))]
            for i in range(len(self.rows))]
        out = []
        for sol in combos:
            vec = [ZERO] * self.ambient
            for i, s in enumerate(sol):
                if s != 0:
                    vec = [a + s * b for a, b in zip(vec, self.rows[i])]
            out.append(vec)
        return Subspace(self.ambient, out)

    def basis_vectors(self):
        return [list(r) for r in self.rows]


def preimage(columns, target: Subspace, domain_dim: int) -> Subspace:
    """{x in Q^domain_dim : sum x_i columns[i] in target}.

    ``columns`` maps each domain basis vector to its image vector.
    """
    resid = [target.reduce(col) for col in columns]
    sys_rows = []
    if resid:
        m = len(resid[0])
        for r in range(m):
            sys_rows.append([resid[i][r] for i in range(domain_dim)])
    return Subspace(domain_dim, kernel(sys_rows, domain_dim))
