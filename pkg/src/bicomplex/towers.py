"""Tower systems on a double complex.

The closedness/exactness conditions used throughout (E_r-closed, E_r-exact,
"runs at least s times", "reaches 0 in at most s steps", E_r Ebar_r-closed
and -exact, and their metric adjoints) are all finite towers of linear
equations in auxiliary forms.  Each is solved as one block linear system
whose solution space, projected to the leading unknown, is exactly the
existentially quantified subspace.
"""

from __future__ import annotations

from .scalars import ZERO, ONE
from .linalg import (
    Matrix, Subspace, kernel, least_norm_solve, least_norm_solve_multi,
)
from .complexes import DoubleComplex

__all__ = [
    "Op", "d1_op", "d2_op", "BlockSystem", "TowerSpec", "tower_subspace",
    "z_space", "c_space", "run_space", "reach_space", "zrr_space", "d_exact_space",
    "pure_closed_space", "im_d_pure_space", "im_ddbar_space", "im_d1_space",
    "im_d2_space",
]


class Op:
    """A bidegree-homogeneous linear operator on a double complex."""

    def __init__(self, cx: DoubleComplex, shift, mat_at, label=""):
        self.cx = cx
        self.shift = shift
        self._mat_at = mat_at
        self.label = label

    def source_dim(self, bd):
        return self.cx.dim(*bd)

    def target(self, bd):
        return (bd[0] + self.shift[0], bd[1] + self.shift[1])

    def matrix(self, bd):
        return self._mat_at(bd)


def d1_op(cx):
    return Op(cx, (1, 0), lambda bd: cx.d1_at(*bd), "d1")


def d2_op(cx):
    return Op(cx, (0, 1), lambda bd: cx.d2_at(*bd), "d2")


class BlockSystem:
    """A homogeneous linear system in several bidegree blocks of a complex."""

    def __init__(self, cx: DoubleComplex):
        self.cx = cx
        self.var_bd = []
        self.var_dim = []
        self.eqs = []     # each: list of (var_index, Matrix)
        self._solution = None

    def add_var(self, bd):
        self.var_bd.append(bd)
        self.var_dim.append(self.cx.dim(*bd))
        return len(self.var_bd) - 1

    def add_eq(self, terms, target_dim=None):
        """terms: list of (var_index, Matrix mapping that block to a common
        target); rows with no nonzero matrix are dropped."""
        terms = [(v, m) for v, m in terms if m.nrows > 0]
        dims = {m.nrows for _, m in terms}
        if len(dims) > 1:
            raise ValueError("equation blocks disagree on target dimension")
        if terms:
            self.eqs.append(terms)

    def _offsets(self):
        offs = []
        total = 0
        for d in self.var_dim:
            offs.append(total)
            total += d
        return offs, total

    def big_matrix(self) -> Matrix:
        offs, total = self._offsets()
        rows = []
        for terms in self.eqs:
            nr = terms[0][1].nrows
            block = [[ZERO] * total for _ in range(nr)]
            for v, m in terms:
                off = offs[v]
                for i in range(nr):
                    mr = m.rows[i]
                    tr = block[i]
                    for j in range(m.ncols):
                        x = mr[j]
                        if x.nz:
                            tr[off + j] = tr[off + j] + x
            rows.extend(block)
        return Matrix(rows, total) if rows else Matrix.zeros(0, total)

    def solution(self) -> Subspace:
        """Kernel of the assembled block matrix."""
        if self._solution is None:
            self._solution = kernel(self.big_matrix())
        return self._solution

    def project(self, var_index) -> Subspace:
        """Projection of the solution space onto one block."""
        sol = self.solution()
        offs, _ = self._offsets()
        lo = offs[var_index]
        hi = lo + self.var_dim[var_index]
        cols = [v[lo:hi] for v in sol.basis.columns()]
        return Subspace.span(self.var_dim[var_index], cols)

    def project_through(self, terms) -> Subspace:
        """Image of the solution space under x -> sum_i M_i x_{v_i}."""
        sol = self.solution()
        offs, _ = self._offsets()
        terms = [(v, m) for v, m in terms if m.nrows > 0]
        if not terms:
            return Subspace.zero(0)
        nr = terms[0][1].nrows
        cols = []
        for vec in sol.basis.columns():
            out = [ZERO] * nr
            for v, m in terms:
                lo = offs[v]
                piece = m.apply(vec[lo:lo + self.var_dim[v]])
                out = [a + b for a, b in zip(out, piece)]
            cols.append(out)
        return Subspace.span(nr, cols)

    def _pinned(self, var_index):
        """(Q, P): big matrix split into non-pinned and pinned column blocks."""
        key = ("pinned", var_index)
        cache = getattr(self, "_pin_cache", None)
        if cache is None:
            cache = self._pin_cache = {}
        if key in cache:
            return cache[key]
        offs, total = self._offsets()
        big = self.big_matrix()
        lo = offs[var_index]
        hi = lo + self.var_dim[var_index]
        Q = Matrix([r[:lo] + r[hi:] for r in big.rows], total - (hi - lo))
        P = Matrix([r[lo:hi] for r in big.rows], hi - lo)
        cache[key] = (Q, P, lo, hi)
        return cache[key]

    def witness(self, var_index, value):
        """Least-norm solution of the system with block var_index pinned to
        the given vector; returns the full solution split per block."""
        parts_matrix = self.witness_multi(var_index, Matrix.from_columns([list(value)]))
        return [blk.column(0) for blk in parts_matrix]

    def witness_multi(self, var_index, values: Matrix):
        """Batched witness: values' columns are pinned vectors; returns one
        Matrix per block whose columns are the least-norm solutions."""
        offs, total = self._offsets()
        Q, P, lo, hi = self._pinned(var_index)
        rhs = -(P * values) if P.nrows else Matrix.zeros(0, values.ncols)
        X = least_norm_solve_multi(Q, rhs)
        blocks = []
        pos = 0
        for vi, d in enumerate(self.var_dim):
            if vi == var_index:
                blocks.append(values)
            else:
                blocks.append(Matrix(X.rows[pos:pos + d], X.ncols) if d else
                              Matrix.zeros(0, X.ncols))
                pos += d
        return blocks


# -- tower subspaces -----------------------------------------------------------


def run_space(h: Op, v: Op, s: int, bd) -> Subspace:
    """{alpha at bd : h(alpha) runs at least s times}, i.e. there are
    u_1..u_s with h(alpha) = v(u_1), h(u_1) = v(u_2), ..., h(u_{s-1}) = v(u_s)."""
    cx = h.cx
    amb = cx.dim(*bd)
    if s <= 0:
        return Subspace.full(amb)
    sys = BlockSystem(cx)
    a = sys.add_var(bd)
    step = (h.shift[0] - v.shift[0], h.shift[1] - v.shift[1])
    us = []
    cur = bd
    for l in range(1, s + 1):
        cur = (bd[0] + l * step[0], bd[1] + l * step[1])
        us.append(sys.add_var(cur))
    prev = a
    prev_bd = bd
    for l, uvar in enumerate(us):
        u_bd = (bd[0] + (l + 1) * step[0], bd[1] + (l + 1) * step[1])
        sys.add_eq([(prev, h.matrix(prev_bd)),
                    (uvar, v.matrix(u_bd).scale(-ONE))])
        prev, prev_bd = uvar, u_bd
    return sys.project(a)


def reach_space(v: Op, h: Op, s: int, bd) -> Subspace:
    """{zeta at bd : v(zeta) reaches 0 in at most s steps}: there are
    w_1..w_{s-1} with v(zeta) = h(w_1), v(w_1) = h(w_2), ..., v(w_{s-1}) = 0.
    s <= 0 yields the zero space (no form qualifies by convention)."""
    cx = v.cx
    amb = cx.dim(*bd)
    if s <= 0:
        return Subspace.zero(amb)
    sys = BlockSystem(cx)
    z = sys.add_var(bd)
    step = (v.shift[0] - h.shift[0], v.shift[1] - h.shift[1])
    ws = []
    for l in range(1, s):
        ws.append(sys.add_var((bd[0] + l * step[0], bd[1] + l * step[1])))
    chain = [z] + ws
    for l in range(len(chain)):
        cur = chain[l]
        cur_bd = (bd[0] + l * step[0], bd[1] + l * step[1])
        terms = [(cur, v.matrix(cur_bd))]
        if l + 1 < len(chain):
            nxt_bd = (bd[0] + (l + 1) * step[0], bd[1] + (l + 1) * step[1])
            terms.append((chain[l + 1], h.matrix(nxt_bd).scale(-ONE)))
        sys.add_eq(terms)
    return sys.project(z)


def z_space(h: Op, v: Op, r: int, bd) -> Subspace:
    """E_r-closed forms at bd for the (h, v) = (d-like, dbar-like) pair:
    v(alpha) = 0 and h(alpha) runs at least r-1 times.  r = 0 gives the
    whole space."""
    cx = h.cx
    amb = cx.dim(*bd)
    if r <= 0:
        return Subspace.full(amb)
    sys = BlockSystem(cx)
    a = sys.add_var(bd)
    sys.add_eq([(a, v.matrix(bd))])
    step = (h.shift[0] - v.shift[0], h.shift[1] - v.shift[1])
    prev, prev_bd = a, bd
    for l in range(1, r):
        u_bd = (bd[0] + l * step[0], bd[1] + l * step[1])
        uvar = sys.add_var(u_bd)
        sys.add_eq([(prev, h.matrix(prev_bd)),
                    (uvar, v.matrix(u_bd).scale(-ONE))])
        prev, prev_bd = uvar, u_bd
    return sys.project(a)


def c_space(h: Op, v: Op, r: int, bd) -> Subspace:
    """E_r-exact forms at bd: alpha = h(zeta) + v(xi) with v(zeta) reaching 0
    in at most r-1 steps.  r = 0 gives the zero space, r = 1 gives Im v."""
    cx = h.cx
    amb = cx.dim(*bd)
    if r <= 0:
        return Subspace.zero(amb)
    v_src = (bd[0] - v.shift[0], bd[1] - v.shift[1])
    if r == 1:
        return Subspace(amb, v.matrix(v_src))
    sys = BlockSystem(cx)
    a = sys.add_var(bd)
    z_bd = (bd[0] - h.shift[0], bd[1] - h.shift[1])
    z = sys.add_var(z_bd)
    xi = sys.add_var(v_src)
    eye = Matrix.identity(amb)
    sys.add_eq([(a, eye), (z, h.matrix(z_bd).scale(-ONE)),
                (xi, v.matrix(v_src).scale(-ONE))])
    step = (v.shift[0] - h.shift[0], v.shift[1] - h.shift[1])
    chain = [z]
    for l in range(1, r - 1):
        chain.append(sys.add_var((z_bd[0] + l * step[0], z_bd[1] + l * step[1])))
    for l in range(len(chain)):
        cur = chain[l]
        cur_bd = (z_bd[0] + l * step[0], z_bd[1] + l * step[1])
        terms = [(cur, v.matrix(cur_bd))]
        if l + 1 < len(chain):
            nxt_bd = (z_bd[0] + (l + 1) * step[0], z_bd[1] + (l + 1) * step[1])
            terms.append((chain[l + 1], h.matrix(nxt_bd).scale(-ONE)))
        sys.add_eq(terms)
    return sys.project(a)


# -- named instances on a complex ------------------------------------------


class TowerSpec:
    """side 'column'/'row', kind 'Zr'/'Cr', page index r >= 1, bidegree at."""

    def __init__(self, side, kind, r, at):
        if r < 1:
            raise ValueError("tower page index must be >= 1")
        if side not in ("column", "row") or kind not in ("Zr", "Cr"):
            raise ValueError("bad tower spec")
        self.side = side
        self.kind = kind
        self.r = r
        self.at = tuple(at)


def _ops(cx, side):
    if side == "column":
        return d1_op(cx), d2_op(cx)
    return d2_op(cx), d1_op(cx)


def tower_subspace(cx: DoubleComplex, spec: TowerSpec) -> Subspace:
    h, v = _ops(cx, spec.side)
    if spec.kind == "Zr":
        return z_space(h, v, spec.r, spec.at)
    return c_space(h, v, spec.r, spec.at)


def zrr_space(cx: DoubleComplex, r: int, bd) -> Subspace:
    """E_r Ebar_r-closed forms: r = 1 means ddbar-closed; r >= 2 asks both
    towers (d alpha runs >= r-1 times, dbar alpha runs >= r-1 times)."""
    h, v = d1_op(cx), d2_op(cx)
    if r <= 1:
        comp = cx.d1_at(bd[0], bd[1] + 1) * cx.d2_at(*bd)
        return kernel(comp)
    return run_space(h, v, r - 1, bd).intersect(run_space(v, h, r - 1, bd))


def d_exact_space(cx: DoubleComplex, r: int, bd) -> Subspace:
    """E_r Ebar_r-exact forms: alpha = d1 zeta + d1 d2 xi + d2 eta with
    d2 zeta, d1 eta reaching 0 in at most r-1 steps (r = 1: Im d1 d2)."""
    p, q = bd
    amb = cx.dim(p, q)
    ddbar = Subspace(amb, cx.d1_at(p - 1, q) * cx.d2_at(p - 1, q - 1))
    if r <= 1:
        return ddbar
    h, v = d1_op(cx), d2_op(cx)
    zeta = reach_space(v, h, r - 1, (p - 1, q))
    eta = reach_space(h, v, r - 1, (p, q - 1))
    out = ddbar.sum(zeta.map_by(cx.d1_at(p - 1, q)))
    out = out.sum(eta.map_by(cx.d2_at(p, q - 1)))
    return out


# -- frequently used plain subspaces -------------------------------------------


def pure_closed_space(cx, bd) -> Subspace:
    """d-closed pure-type forms at bd (ker d1 intersect ker d2)."""
    return kernel(cx.d1_at(*bd)).intersect(kernel(cx.d2_at(*bd)))


def im_d1_space(cx, bd) -> Subspace:
    p, q = bd
    return Subspace(cx.dim(p, q), cx.d1_at(p - 1, q))


def im_d2_space(cx, bd) -> Subspace:
    p, q = bd
    return Subspace(cx.dim(p, q), cx.d2_at(p, q - 1))


def im_ddbar_space(cx, bd) -> Subspace:
    p, q = bd
    return Subspace(cx.dim(p, q), cx.d1_at(p - 1, q) * cx.d2_at(p - 1, q - 1))


def im_d_pure_space(cx, bd) -> Subspace:
    """Pure-type forms at bd that are d-exact in the total complex: the
    image of {beta in degree p+q-1 : all components of d(beta) other than
    the (p,q) one vanish} under the (p,q)-component of d."""
    p, q = bd
    k = p + q - 1
    blocks = [b for b in cx.bidegrees() if b[0] + b[1] == k]
    amb = cx.dim(p, q)
    if not blocks:
        return Subspace.zero(amb)
    sys = BlockSystem(cx)
    vars_ = {b: sys.add_var(b) for b in blocks}
    targets = sorted({(b[0] + 1, b[1]) for b in blocks} | {(b[0], b[1] + 1) for b in blocks})
    for tgt in targets:
        if tgt == (p, q) or cx.dim(*tgt) == 0:
            continue
        terms = []
        left = (tgt[0] - 1, tgt[1])
        down = (tgt[0], tgt[1] - 1)
        if left in vars_:
            terms.append((vars_[left], cx.d1_at(*left)))
        if down in vars_:
            terms.append((vars_[down], cx.d2_at(*down)))
        sys.add_eq(terms)
    terms = []
    left = (p - 1, q)
    down = (p, q - 1)
    if left in vars_:
        terms.append((vars_[left], cx.d1_at(*left)))
    if down in vars_:
        terms.append((vars_[down], cx.d2_at(*down)))
    if not terms:
        return Subspace.zero(amb)
    return sys.project_through(terms)
