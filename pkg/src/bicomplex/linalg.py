"""Dense exact linear algebra over Q(i).

Matrices act on column vectors.  Subspaces are stored through a basis
matrix whose columns span them; the canonical form is the reduced column
echelon basis, which makes subspace equality a syntactic check.
"""

from __future__ import annotations

from .scalars import Scalar, ZERO, ONE

__all__ = [
    "Matrix", "Subspace", "rref", "kernel", "image", "least_norm_solve",
    "solve", "Unsolvable", "AmbientMismatch",
]


class Unsolvable(Exception):
    """Raised when a right-hand side is not in the image of the map."""


class AmbientMismatch(Exception):
    """Raised when subspace operands live in different ambient spaces."""


class Matrix:
    """An immutable-by-convention dense matrix of Scalars."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, ncols=None):
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else (ncols or 0)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zeros(nrows, ncols):
        if nrows == 0:
            return Matrix([], ncols)
        return Matrix([[ZERO] * ncols for _ in range(nrows)])

    @staticmethod
    def identity(n):
        return Matrix([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @staticmethod
    def from_columns(cols, nrows=None):
        if not cols:
            return Matrix.zeros(nrows or 0, 0)
        n = len(cols[0])
        return Matrix([[col[i] for col in cols] for i in range(n)])

    # -- access ----------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def column(self, j):
        return [r[j] for r in self.rows]

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    def copy_rows(self):
        return [list(r) for r in self.rows]

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError("matrix shapes %s x %s do not compose"
                                 % (self.shape, other.shape))
            bt = list(zip(*other.rows)) if other.rows else []
            out = []
            for arow in self.rows:
                nz = [(j, a) for j, a in enumerate(arow) if a.nz]
                orow = []
                for c in range(other.ncols):
                    s = ZERO
                    col = bt[c] if bt else ()
                    for j, a in nz:
                        b = col[j]
                        if b.nz:
                            s = s + a * b
                    orow.append(s)
                out.append(orow)
            return Matrix(out, other.ncols)
        raise TypeError("can only multiply Matrix by Matrix; use apply() for vectors")

    def apply(self, vec):
        if self.ncols != len(vec):
            raise ValueError("matrix %s applied to vector of length %d"
                             % (self.shape, len(vec)))
        out = []
        for row in self.rows:
            s = ZERO
            for a, x in zip(row, vec):
                if a.nz and x.nz:
                    s = s + a * x
            out.append(s)
        return out

    def __add__(self, other):
        return Matrix([[a + b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other):
        return Matrix([[a - b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self):
        return Matrix([[(-a if a.nz else a) for a in r] for r in self.rows],
                      self.ncols)

    def scale(self, s):
        if s.is_one():
            return self
        if not s.im and s.re == -1:
            return -self
        return Matrix([[(s * a if a.nz else a) for a in r] for r in self.rows],
                      self.ncols)

    def transpose(self):
        if not self.rows:
            return Matrix.zeros(self.ncols, 0)
        return Matrix([list(c) for c in zip(*self.rows)], self.nrows)

    def conj_transpose(self):
        if not self.rows:
            return Matrix.zeros(self.ncols, 0)
        return Matrix([[a.conj() for a in c] for c in zip(*self.rows)], self.nrows)

    def conj_entries(self):
        return Matrix([[a.conj() for a in r] for r in self.rows], self.ncols)

    def hstack(self, other):
        if self.nrows != other.nrows:
            raise ValueError("hstack with mismatched row counts")
        return Matrix([r1 + r2 for r1, r2 in zip(self.rows, other.rows)],
                      self.ncols + other.ncols)

    def is_zero(self):
        return all(a.is_zero() for r in self.rows for a in r)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r1, r2 in zip(self.rows, other.rows) for a, b in zip(r1, r2))

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def __repr__(self):
        return "Matrix(%d x %d)" % self.shape

    def to_strings(self):
        return [[str(a) for a in r] for r in self.rows]

    @staticmethod
    def from_strings(rows):
        return Matrix([[Scalar.parse(s) for s in r] for r in rows])


def rref(m: Matrix):
    """Reduced row-echelon form; returns (matrix, pivot column list)."""
    rows = m.copy_rows()
    nr, nc = m.nrows, m.ncols
    pivots = []
    r = 0
    for c in range(nc):
        pr = None
        for i in range(r, nr):
            x = rows[i][c]
            if x.nz:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        if pv.im or pv.re != 1:
            inv = pv.inv()
            row = rows[r]
            for j in range(c, nc):
                x = row[j]
                if x.nz:
                    row[j] = inv * x
        prow = rows[r]
        support = [j for j in range(c, nc) if prow[j].nz]
        for i in range(nr):
            if i == r:
                continue
            f = rows[i][c]
            if not f.nz:
                continue
            row = rows[i]
            if f.im or f.re != 1:
                for j in support:
                    row[j] = row[j] - f * prow[j]
            else:
                for j in support:
                    row[j] = row[j] - prow[j]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return Matrix(rows, nc), pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def kernel(m: Matrix) -> "Subspace":
    """Canonical basis of the null space of m."""
    R, pivots = rref(m)
    nc = m.ncols
    pivset = set(pivots)
    free = [c for c in range(nc) if c not in pivset]
    cols = []
    for fc in free:
        v = [ZERO] * nc
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -R.rows[i][fc]
        cols.append(v)
    return Subspace(nc, Matrix.from_columns(cols, nc))


def image(m: Matrix) -> "Subspace":
    """Column space of m."""
    return Subspace(m.nrows, m)


def solve(m: Matrix, b):
    """One particular solution of m x = b, or raise Unsolvable."""
    aug = Matrix([row + [bv] for row, bv in zip(m.rows, b)]) if m.nrows else Matrix([[bv] for bv in b])
    R, pivots = rref(aug)
    if m.ncols in pivots:
        raise Unsolvable("right-hand side not in the image")
    x = [ZERO] * m.ncols
    for i, pc in enumerate(pivots):
        x[pc] = R.rows[i][m.ncols]
    return x


def solve_multi(m: Matrix, B: Matrix) -> Matrix:
    """Particular solutions of m X = B for all columns of B at once."""
    aug = m.hstack(B)
    R, pivots = rref(aug)
    if pivots and pivots[-1] >= m.ncols:
        raise Unsolvable("some right-hand side not in the image")
    X = Matrix.zeros(m.ncols, B.ncols)
    rows = [[ZERO] * B.ncols for _ in range(m.ncols)]
    for i, pc in enumerate(pivots):
        rows[pc] = list(R.rows[i][m.ncols:])
    return Matrix(rows, B.ncols) if m.ncols else Matrix.zeros(0, B.ncols)


def least_norm_solve_multi(m: Matrix, B: Matrix) -> Matrix:
    """Least-norm solutions of m X = B, column by column, in one pass."""
    if m.ncols == 0:
        if not B.is_zero():
            raise Unsolvable("right-hand side not in the image")
        return Matrix.zeros(0, B.ncols)
    X0 = solve_multi(m, B)
    k = kernel(m).basis
    if k.ncols == 0:
        return X0
    kh = k.conj_transpose()
    Y = solve_multi(kh * k, kh * X0)
    return X0 - (k * Y)


def least_norm_solve(m: Matrix, b):
    """The unique solution of m x = b orthogonal to ker m.

    Orthogonality is with respect to the standard Hermitian conjugate-
    symmetric form; computed exactly as a particular solution minus its
    orthogonal projection onto the kernel (equivalent to the conjugate-
    transpose normal equations, but cheaper when the kernel is small).
    """
    if m.ncols == 0:
        if any(not v.is_zero() for v in b):
            raise Unsolvable("right-hand side not in the image")
        return []
    x0 = solve(m, b)
    k = kernel(m).basis
    if k.ncols == 0:
        return x0
    kh = k.conj_transpose()
    gram = kh * k
    rhs = kh.apply(x0)
    y = solve(gram, rhs)          # gram is positive definite, always solvable
    proj = k.apply(y)
    return [a - b2 for a, b2 in zip(x0, proj)]


class Subspace:
    """A linear subspace of Q(i)^ambient_dim with canonical echelon basis."""

    __slots__ = ("ambient_dim", "basis", "_canonical")

    def __init__(self, ambient_dim: int, basis: Matrix, canonical=False):
        if basis.ncols == 0:
            self.basis = Matrix.zeros(ambient_dim, 0)
        elif basis.nrows != ambient_dim:
            raise AmbientMismatch("basis rows %d != ambient %d" % (basis.nrows, ambient_dim))
        elif canonical:
            self.basis = basis
        else:
            self.basis = _canonical_column_basis(basis, ambient_dim)
        self.ambient_dim = ambient_dim
        self._canonical = True

    @staticmethod
    def zero(ambient_dim):
        return Subspace(ambient_dim, Matrix.zeros(ambient_dim, 0), canonical=True)

    @staticmethod
    def full(ambient_dim):
        return Subspace(ambient_dim, Matrix.identity(ambient_dim), canonical=True)

    @staticmethod
    def span(ambient_dim, vectors):
        return Subspace(ambient_dim, Matrix.from_columns(list(vectors), ambient_dim))

    @property
    def dim(self):
        return self.basis.ncols

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return "Subspace(dim %d of %d)" % (self.dim, self.ambient_dim)

    def _check(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise AmbientMismatch("ambient %d vs %d" % (self.ambient_dim, other.ambient_dim))

    def sum(self, other) -> "Subspace":
        self._check(other)
        return Subspace(self.ambient_dim, self.basis.hstack(other.basis))

    def intersect(self, other) -> "Subspace":
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        stacked = self.basis.hstack(other.basis.scale(-ONE))
        ker = kernel(stacked)
        cols = []
        for v in ker.basis.columns():
            cols.append(self.basis.apply(v[: self.dim]))
        return Subspace.span(self.ambient_dim, cols)

    def contains_vector(self, vec) -> bool:
        if len(vec) != self.ambient_dim:
            raise AmbientMismatch("vector length %d vs ambient %d" % (len(vec), self.ambient_dim))
        try:
            solve(self.basis, list(vec))
            return True
        except Unsolvable:
            return False

    def contains(self, other) -> bool:
        self._check(other)
        if other.dim == 0:
            return True
        return self.sum(other).dim == self.dim

    def quotient_dim(self, other) -> int:
        """dim(self / other); other must be contained in self."""
        self._check(other)
        if not self.contains(other):
            raise AmbientMismatch("quotient by a non-subspace")
        return self.dim - other.dim

    def preimage(self, m: Matrix) -> "Subspace":
        """{x : m x in self} for a map m into this ambient space."""
        if m.nrows != self.ambient_dim:
            raise AmbientMismatch("map target %d vs ambient %d" % (m.nrows, self.ambient_dim))
        if self.dim == 0:
            return kernel(m)
        stacked = m.hstack(self.basis.scale(-ONE))
        ker = kernel(stacked)
        cols = [v[: m.ncols] for v in ker.basis.columns()]
        return Subspace.span(m.ncols, cols)

    def map_by(self, m: Matrix) -> "Subspace":
        """Image of this subspace under the map m."""
        if self.ambient_dim != m.ncols:
            raise AmbientMismatch("map source %d vs ambient %d" % (m.ncols, self.ambient_dim))
        cols = [m.apply(c) for c in self.basis.columns()]
        return Subspace.span(m.nrows, cols)

    def perp_in(self, other: "Subspace") -> "Subspace":
        """{x in self : <x, y> = 0 for all y in other} (standard Hermitian form)."""
        self._check(other)
        if other.dim == 0 or self.dim == 0:
            return self
        constraints = other.basis.conj_transpose() * self.basis
        ker = kernel(constraints)
        cols = [self.basis.apply(v) for v in ker.basis.columns()]
        return Subspace.span(self.ambient_dim, cols)

    def coordinates(self, vec):
        """Coordinates of vec in this subspace's canonical basis."""
        return solve(self.basis, list(vec))


def _canonical_column_basis(basis: Matrix, ambient: int) -> Matrix:
    if basis.ncols == 0:
        return Matrix.zeros(ambient, 0)
    R, pivots = rref(basis.transpose())
    cols = [list(R.rows[i]) for i in range(len(pivots))]
    return Matrix.from_columns(cols, ambient)
