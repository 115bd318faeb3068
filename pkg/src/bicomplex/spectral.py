"""Frolicher-style spectral sequences of a bounded double complex.

The column sequence filters by the first index (first differential d2,
i.e. the dbar-analogue); the row sequence is computed by transposing the
complex.  Pages are presented through E_r-closed/-exact subspaces with
explicit representative lifts and d_r matrices, following the
tower description of CFGU.
"""

from __future__ import annotations

from .scalars import ZERO, ONE
from .linalg import Matrix, Subspace, kernel
from .complexes import DoubleComplex, transpose
from .towers import (
    BlockSystem, d1_op, d2_op, z_space, c_space, TowerSpec, tower_subspace,
)

__all__ = ["PageTable", "pages", "zc_spaces", "e_dim", "infinity_vs_filtration",
           "total_complex", "SpectralError"]


class SpectralError(Exception):
    pass


def _side_complex(cx, side):
    if side == "column":
        return cx, (lambda bd: bd)
    if side == "row":
        key = "_transpose"
        if key not in cx._cache:
            cx._cache[key] = transpose(cx)
        return cx._cache[key], (lambda bd: (bd[1], bd[0]))
    raise ValueError("side must be 'column' or 'row'")


def zc_spaces(cx: DoubleComplex, side: str, r: int, bd):
    """(Z_r, C_r) at a bidegree, in original coordinates, cached."""
    scx, flip = _side_complex(cx, side)
    key = ("zc", side, r, tuple(bd))
    if key in cx._cache:
        return cx._cache[key]
    h, v = d1_op(scx), d2_op(scx)
    z = z_space(h, v, r, flip(bd))
    c = c_space(h, v, r, flip(bd))
    if not z.contains(c):
        raise SpectralError("C_%d not inside Z_%d at %s (%s side)" % (r, r, bd, side))
    cx._cache[key] = (z, c)
    return z, c


def e_dim(cx, side, r, bd):
    z, c = zc_spaces(cx, side, r, bd)
    return z.dim - c.dim


class PageTable:
    """All pages of one side: dims, representative lifts, d_r matrices and
    the degeneration page."""

    def __init__(self, side, r_max):
        self.side = side
        self.r_max = r_max
        self.dims = {}      # r -> {bd: dim}
        self.reps = {}      # r -> {bd: Matrix (columns are lifts in Z_r)}
        self.d = {}         # r -> {bd: Matrix E_r^{bd} -> E_r^{bd + (r,1-r)}}
        self.degeneration = None

    def e(self, r, bd):
        rr = min(r, self.r_max)
        return self.dims.get(rr, {}).get(tuple(bd), 0)

    def e_infinity(self, bd):
        return self.e(self.r_max, bd)

    def e_total(self, r, k):
        return sum(d for bd, d in self.dims.get(min(r, self.r_max), {}).items()
                   if bd[0] + bd[1] == k)

    def d_target(self, r, bd):
        if self.side == "column":
            return (bd[0] + r, bd[1] - r + 1)
        return (bd[0] - r + 1, bd[1] + r)

    def nonzero_maps(self, r):
        out = []
        for bd, m in sorted(self.d.get(r, {}).items()):
            if not m.is_zero():
                out.append((bd, self.d_target(r, bd)))
        return out

    def to_json(self):
        pages = []
        for r in sorted(self.dims):
            entry = {
                "r": r,
                "e": {"%d,%d" % bd: d for bd, d in sorted(self.dims[r].items()) if d},
                "d_nonzero": [["%d,%d" % src, "%d,%d" % tgt]
                              for src, tgt in self.nonzero_maps(r)],
            }
            pages.append(entry)
        return {"side": self.side, "pages": pages, "degeneration": self.degeneration}


def pages(cx: DoubleComplex, side: str = "column", r_limit=None) -> PageTable:
    """Compute all pages r = 1..r_max of the chosen side, with lifts and
    differentials; verifies monotonicity of the tower subspaces, the
    rank bookkeeping e_{r+1} = dim ker d_r - rank d_r(incoming), and that
    d_r is well defined on C_r-cosets."""
    key = ("pages", side, r_limit)
    if key in cx._cache:
        return cx._cache[key]
    scx, _flip = _side_complex(cx, side)
    if side == "row":
        t = pages(scx, "column", r_limit)
        out = PageTable(side, t.r_max)
        out.dims = {r: {(bd[1], bd[0]): d for bd, d in dd.items()}
                    for r, dd in t.dims.items()}
        out.reps = {r: {(bd[1], bd[0]): m for bd, m in rr.items()}
                    for r, rr in t.reps.items()}
        out.d = {r: {(bd[1], bd[0]): m for bd, m in dd.items()}
                 for r, dd in t.d.items()}
        out.degeneration = t.degeneration
        cx._cache[key] = out
        return out

    r_max = r_limit or cx.r_max()
    table = PageTable(side, r_max)
    bds = cx.bidegrees()
    h, v = d1_op(cx), d2_op(cx)
    zc = {}
    for r in range(1, r_max + 1):
        dims = {}
        reps = {}
        for bd in bds:
            z, c = zc_spaces(cx, side, r, bd)
            if r > 1:
                zp, cp = zc[bd]
                if not zp.contains(z) or not c.contains(cp):
                    raise SpectralError("tower monotonicity failed at %s, r=%d" % (bd, r))
            zc[bd] = (z, c)
            dims[bd] = z.dim - c.dim
            reps[bd] = _lift_basis(z, c)
        table.dims[r] = dims
        table.reps[r] = reps
        dr = {}
        for bd in bds:
            if dims[bd] == 0:
                continue
            tgt = table.d_target(r, bd)
            if dims.get(tgt, 0) == 0:
                continue
            dr[bd] = _d_r_matrix(cx, r, bd, reps[bd], reps[tgt], zc[tgt][1])
        table.d[r] = dr
        if r > 1:
            _check_rank_bookkeeping(table, r, bds)
    degen = r_max
    for r in range(r_max, 0, -1):
        if any(not m.is_zero() for m in table.d.get(r, {}).values()):
            break
        degen = r
    table.degeneration = degen
    _check_abutment(cx, table)
    cx._cache[key] = table
    return table


def _lift_basis(z: Subspace, c: Subspace) -> Matrix:
    """Least-norm representative lifts: basis of the orthogonal complement
    of C_r inside Z_r."""
    return z.perp_in(c).basis


def _d_r_matrix(cx, r, bd, rep_matrix, treps, tc):
    """Matrix of d_r from the representative basis at bd to the one at tgt."""
    values = _d_r_values_matrix(cx, r, bd, rep_matrix)
    return _class_coordinates_multi(values, treps, tc)


def _d_r_values_matrix(cx, r, bd, rep_matrix) -> Matrix:
    """d1(u_{r-1}) for every representative column, batched through one
    least-norm witness solve."""
    p, q = bd
    if r == 1:
        return cx.d1_at(p, q) * rep_matrix
    sys = _z_tower_system(cx, r, bd)
    blocks = sys.witness_multi(0, rep_matrix)
    last_bd = (p + r - 1, q - r + 1)
    return cx.d1_at(*last_bd) * blocks[-1]


def _z_tower_system(cx, r, bd):
    p, q = bd
    sys = BlockSystem(cx)
    a = sys.add_var(bd)
    prev, prev_bd = a, bd
    for l in range(1, r):
        u_bd = (p + l, q - l)
        uvar = sys.add_var(u_bd)
        sys.add_eq([(prev, cx.d1_at(*prev_bd)),
                    (uvar, cx.d2_at(*u_bd).scale(-ONE))])
        prev, prev_bd = uvar, u_bd
    return sys


def _class_coordinates_multi(values: Matrix, reps: Matrix, c) -> Matrix:
    from .linalg import solve_multi
    stacked = reps.hstack(c.basis) if c.dim else reps
    if stacked.ncols == 0:
        if not values.is_zero():
            raise SpectralError("value not in Z_r span")
        return Matrix.zeros(0, values.ncols)
    X = solve_multi(stacked, values)
    return Matrix(X.rows[: reps.ncols], X.ncols) if reps.ncols else Matrix.zeros(0, X.ncols)


def d_r_value(cx, r, bd, alpha, perturb_kernel=False):
    """Push a representative alpha in Z_r at bd to its d_r value d1(u_{r-1})
    (u_0 = alpha), using the least-norm witness chain of the tower.  With
    perturb_kernel=True a second witness chain (least-norm plus a kernel
    element of the block system) is used; the resulting class must agree."""
    p, q = bd
    if r == 1:
        return cx.d1_at(p, q).apply(alpha)
    sys = _z_tower_system(cx, r, bd)
    us = [(i, sys.var_bd[i]) for i in range(1, len(sys.var_bd))]
    parts = sys.witness(0, alpha)
    if perturb_kernel:
        sol = sys.solution()
        sizes = [cx.dim(*b) for b in sys.var_bd]
        for jcol in range(sol.dim):
            add = sol.basis.column(jcol)
            chunks = []
            offs = 0
            for s in sizes:
                chunks.append(add[offs:offs + s])
                offs += s
            if all(x.is_zero() for x in chunks[0]) and \
                    any(not x.is_zero() for c in chunks[1:] for x in c):
                parts = [[x + y for x, y in zip(blk, extra)]
                         for blk, extra in zip(parts, chunks)]
                break
    last_var, last_bd = us[-1]
    idx = sys.var_bd.index(last_bd)
    return cx.d1_at(*last_bd).apply(parts[idx])


def _class_coordinates(value, reps: Matrix, c: Subspace):
    """Coordinates of a Z_r vector's class in the representative basis
    (solve [reps | C] x = value, take the reps part)."""
    from .linalg import solve
    amb = len(value)
    stacked = reps.hstack(c.basis) if c.dim else reps
    if stacked.ncols == 0:
        if any(not x.is_zero() for x in value):
            raise SpectralError("value not in Z_r span")
        return []
    x = solve(stacked, value)
    return x[: reps.ncols]


def _check_rank_bookkeeping(table, r, bds):
    prev = r - 1
    for bd in bds:
        into = table.d_target(prev, (bd[0] - prev, bd[1] + prev - 1))
        src = (bd[0] - prev, bd[1] + prev - 1)
        out_m = table.d.get(prev, {}).get(bd)
        in_m = table.d.get(prev, {}).get(src)
        e_prev = table.dims[prev].get(bd, 0)
        rank_out = _rank_of(out_m)
        rank_in = _rank_of(in_m) if into == bd else 0
        expected = e_prev - rank_out - rank_in
        if table.dims[r].get(bd, 0) != expected:
            raise SpectralError(
                "page dimension bookkeeping failed at %s: e_%d=%d, expected %d"
                % (bd, r, table.dims[r].get(bd, 0), expected))


def _rank_of(m):
    if m is None:
        return 0
    from .linalg import rref
    return len(rref(m)[1])


# -- total complex and the filtration comparison -----------------------------


def total_complex(cx: DoubleComplex):
    """Blocks (ascending p within each degree), total differentials and
    cohomology lifts of the total complex; cached."""
    if "total" in cx._cache:
        return cx._cache["total"]
    degrees = cx.degrees()
    blocks = {k: cx.total_space_blocks(k) for k in degrees}
    dims = {k: sum(cx.dim(*bd) for bd in blocks[k]) for k in degrees}
    d_tot = {}
    for k in degrees:
        tgt_blocks = blocks.get(k + 1, [])
        if not tgt_blocks or dims[k] == 0:
            continue
        tgt_dim = dims.get(k + 1, 0)
        rows = [[ZERO] * dims[k] for _ in range(tgt_dim)]
        col_off = 0
        tgt_off = {bd: sum(cx.dim(*b) for b in tgt_blocks[:i])
                   for i, bd in enumerate(tgt_blocks)}
        for bd in blocks[k]:
            for m, tgt in ((cx.d1_at(*bd), (bd[0] + 1, bd[1])),
                           (cx.d2_at(*bd), (bd[0], bd[1] + 1))):
                if tgt in tgt_off and m.nrows:
                    ro = tgt_off[tgt]
                    for i in range(m.nrows):
                        for j in range(m.ncols):
                            x = m.rows[i][j]
                            if not x.is_zero():
                                rows[ro + i][col_off + j] = x
            col_off += cx.dim(*bd)
        d_tot[k] = Matrix(rows, dims[k])
    out = {"degrees": degrees, "blocks": blocks, "dims": dims, "d": d_tot}
    # cohomology
    betti = {}
    ker_im = {}
    for k in degrees:
        dk = d_tot.get(k)
        kerk = kernel(dk) if dk is not None else Subspace.full(dims[k])
        dprev = d_tot.get(k - 1)
        imk = Subspace(dims[k], dprev) if dprev is not None else Subspace.zero(dims[k])
        ker_im[k] = (kerk, imk)
        betti[k] = kerk.dim - imk.dim
    out["ker_im"] = ker_im
    out["betti"] = betti
    cx._cache["total"] = out
    return out


def filtration_subspace(cx, k, p, side="column") -> Subspace:
    """The coordinate subspace F^p of the total degree-k space (components
    with first index >= p; side='row' uses the second index)."""
    tot = total_complex(cx)
    blocks = tot["blocks"].get(k, [])
    dim = tot["dims"].get(k, 0)
    cols = []
    off = 0
    eye = Matrix.identity(dim)
    for bd in blocks:
        take = (bd[0] >= p) if side == "column" else (bd[1] >= p)
        if take:
            cols.extend(eye.column(off + j) for j in range(cx.dim(*bd)))
        off += cx.dim(*bd)
    return Subspace.span(dim, cols)


def filtered_h_dim(cx, k, p, side="column") -> int:
    """dim F^p H^k: classes representable by forms in F^p."""
    key = ("fph", side, k, p)
    if key in cx._cache:
        return cx._cache[key]
    tot = total_complex(cx)
    kerk, imk = tot["ker_im"].get(k, (None, None))
    if kerk is None:
        return 0
    f = filtration_subspace(cx, k, p, side)
    sub = kerk.intersect(f)
    val = sub.sum(imk).dim - imk.dim
    cx._cache[key] = val
    return val


def infinity_vs_filtration(cx: DoubleComplex):
    """Check dim E_inf^{p,q} = dim F^p H^{p+q} - dim F^{p+1} H^{p+q} on both
    sides, and report the filtration dimensions."""
    report = {"ok": True, "checks": [], "f_column": {}, "f_row": {}}
    for side in ("column", "row"):
        t = pages(cx, side)
        for bd in cx.bidegrees():
            k = bd[0] + bd[1]
            p = bd[0] if side == "column" else bd[1]
            lhs = t.e_infinity(bd)
            rhs = filtered_h_dim(cx, k, p, side) - filtered_h_dim(cx, k, p + 1, side)
            ok = lhs == rhs
            report["checks"].append({"side": side, "bidegree": bd, "e_inf": lhs,
                                     "graded": rhs, "ok": ok})
            if not ok:
                report["ok"] = False
    tot = total_complex(cx)
    for k in tot["degrees"]:
        pmin, pmax, qmin, qmax = cx.bounding_box()
        report["f_column"]["%d" % k] = [filtered_h_dim(cx, k, p) for p in range(pmin, pmax + 2)]
        report["f_row"]["%d" % k] = [filtered_h_dim(cx, k, q, "row") for q in range(qmin, qmax + 2)]
    return report


def _check_abutment(cx, table: PageTable):
    tot = total_complex(cx)
    for k, b in tot["betti"].items():
        e_inf = sum(table.e_infinity(bd) for bd in cx.bidegrees() if sum(bd) == k)
        if e_inf != b:
            raise SpectralError(
                "E_infinity total %d does not match Betti number %d in degree %d"
                % (e_inf, b, k))
    for r in range(1, table.r_max):
        for bd, d in table.dims[r + 1].items():
            if d > table.dims[r].get(bd, 0):
                raise SpectralError("page dims increased at %s from r=%d" % (bd, r))
