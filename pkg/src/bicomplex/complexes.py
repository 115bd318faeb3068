"""Bounded double complexes over Q(i).

A DoubleComplex is a finite collection of bigraded spaces A^{p,q} with two
anticommuting square-zero differentials d1 (bidegree (1,0)) and d2
(bidegree (0,1)), an optional total complex dimension n (needed for
duality), and an optional antilinear conjugation structure mapping
A^{p,q} -> A^{q,p}.

Elementary complexes (squares, dots, zigzags) follow the sign convention
d1 a_i = -d2 a_{i+1} on consecutive zigzag generators, with all structure
constants equal to 1 on arrows that no relation constrains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .scalars import Scalar, ZERO, ONE
from .linalg import Matrix

__all__ = [
    "DoubleComplex", "ElementaryShape", "elementary", "direct_sum", "tensor",
    "single_complex", "shift", "dual", "conjugate", "transpose", "blowup_model",
    "ValidationError", "MalformedShape",
]


class ValidationError(Exception):
    pass


class MalformedShape(Exception):
    pass


class DoubleComplex:
    """Bounded bigraded spaces with differentials d1: (p,q)->(p+1,q) and
    d2: (p,q)->(p,q+1).  Maps absent from the tables are zero."""

    def __init__(self, dims, d1=None, d2=None, n=None, conj=None, meta=None):
        self.dims = {bd: d for bd, d in dims.items() if d > 0}
        self.d1 = dict(d1 or {})
        self.d2 = dict(d2 or {})
        self.n = n
        self.conj = dict(conj) if conj else None
        self.meta = meta or {}
        self._cache = {}

    # -- geometry ---------------------------------------------------------

    def dim(self, p, q=None):
        bd = p if q is None else (p, q)
        return self.dims.get(bd, 0)

    def bidegrees(self):
        return sorted(self.dims)

    def bounding_box(self):
        if not self.dims:
            return (0, 0, 0, 0)
        ps = [p for p, _ in self.dims]
        qs = [q for _, q in self.dims]
        return (min(ps), max(ps), min(qs), max(qs))

    def r_max(self):
        pmin, pmax, qmin, qmax = self.bounding_box()
        return (pmax - pmin + 1) + (qmax - qmin + 1)

    def total_dim(self):
        return sum(self.dims.values())

    def degrees(self):
        return sorted({p + q for p, q in self.dims})

    def total_space_blocks(self, k):
        """Bidegrees of total degree k in descending-p order is NOT used;
        blocks are listed with p ascending so that the column filtration
        F^p is a trailing coordinate block."""
        return sorted(bd for bd in self.dims if bd[0] + bd[1] == k)

    # -- differentials as matrices ----------------------------------------

    def d1_at(self, p, q):
        m = self.d1.get((p, q))
        if m is None:
            return Matrix.zeros(self.dim(p + 1, q), self.dim(p, q))
        return m

    def d2_at(self, p, q):
        m = self.d2.get((p, q))
        if m is None:
            return Matrix.zeros(self.dim(p, q + 1), self.dim(p, q))
        return m

    def conj_at(self, p, q):
        if self.conj is None:
            raise ValidationError("complex has no conjugation structure")
        m = self.conj.get((p, q))
        if m is None:
            return Matrix.zeros(self.dim(q, p), self.dim(p, q))
        return m

    def conj_vector(self, p, q, vec):
        """Apply the antilinear conjugation to a coordinate vector at (p,q)."""
        return self.conj_at(p, q).apply([x.conj() for x in vec])

    # -- validation ---------------------------------------------------------

    def validate(self):
        """Return the list of violated structural identities (empty = valid)."""
        bad = []
        for name, table, dp, dq in (("d1", self.d1, 1, 0), ("d2", self.d2, 0, 1)):
            for (p, q), m in table.items():
                want = (self.dim(p + dp, q + dq), self.dim(p, q))
                if m.shape != want:
                    bad.append("%s at (%d,%d): shape %s, expected %s"
                               % (name, p, q, m.shape, want))
        if bad:
            return bad
        for (p, q) in self.dims:
            if not (self.d1_at(p + 1, q) * self.d1_at(p, q)).is_zero():
                bad.append("d1.d1 != 0 at (%d,%d)" % (p, q))
            if not (self.d2_at(p, q + 1) * self.d2_at(p, q)).is_zero():
                bad.append("d2.d2 != 0 at (%d,%d)" % (p, q))
            anti = self.d2_at(p + 1, q) * self.d1_at(p, q) + self.d1_at(p, q + 1) * self.d2_at(p, q)
            if not anti.is_zero():
                bad.append("d1.d2 + d2.d1 != 0 at (%d,%d)" % (p, q))
        if self.conj is not None:
            for (p, q) in self.dims:
                c = self.conj_at(p, q)
                if c.shape != (self.dim(q, p), self.dim(p, q)):
                    bad.append("conj at (%d,%d): shape %s" % (p, q, c.shape))
                    continue
                back = self.conj_at(q, p) * c.conj_entries()
                if back != Matrix.identity(self.dim(p, q)):
                    bad.append("conj.conj != id at (%d,%d)" % (p, q))
                # conj intertwines d1 with d2: C(dx bar) = d2 C(x bar)
                lhs = self.conj_at(p + 1, q) * self.d1_at(p, q).conj_entries()
                rhs = self.d2_at(q, p) * c
                if lhs != rhs:
                    bad.append("conj does not intertwine d1/d2 at (%d,%d)" % (p, q))
        return bad

    def require_valid(self):
        bad = self.validate()
        if bad:
            raise ValidationError("; ".join(bad))
        return self

    # -- JSON exchange -------------------------------------------------------

    def to_json(self):
        def key(bd):
            return "%d,%d" % bd

        obj = {}
        if self.n is not None:
            obj["n"] = self.n
        obj["dims"] = {key(bd): self.dims[bd] for bd in sorted(self.dims)}
        for name, table in (("d1", self.d1), ("d2", self.d2)):
            entries = {key(bd): table[bd].to_strings()
                       for bd in sorted(table) if not table[bd].is_zero()}
            if entries:
                obj[name] = entries
        if self.conj is not None:
            obj["conj"] = {key(bd): self.conj[bd].to_strings()
                           for bd in sorted(self.conj) if not self.conj[bd].is_zero()}
        return obj

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)

    @staticmethod
    def from_json(obj):
        def unkey(s):
            p, q = s.split(",")
            return (int(p), int(q))

        dims = {unkey(k): int(v) for k, v in obj.get("dims", {}).items()}
        tables = {}
        for name in ("d1", "d2", "conj"):
            if name in obj:
                tables[name] = {unkey(k): Matrix.from_strings(v)
                                for k, v in obj[name].items()}
        return DoubleComplex(dims, tables.get("d1"), tables.get("d2"),
                             n=obj.get("n"), conj=tables.get("conj"))

    @staticmethod
    def loads(text):
        return DoubleComplex.from_json(json.loads(text))

    def __repr__(self):
        return "DoubleComplex(%d bidegrees, total dim %d)" % (len(self.dims), self.total_dim())


@dataclass(frozen=True)
class ElementaryShape:
    """A square, dot or zigzag shape; anchor is the position of the first
    generator a_1 and length counts vertices (squares count 4)."""

    kind: str          # square | dot | even_type1 | even_type2 | odd_M | odd_L
    anchor: tuple
    length: int = 0

    def __post_init__(self):
        kind = self.kind
        if kind not in ("square", "dot", "even_type1", "even_type2", "odd_M", "odd_L"):
            raise MalformedShape("unknown kind %r" % kind)
        length = self.length or _DEFAULT_LEN[kind]
        object.__setattr__(self, "length", length)
        if kind == "square" and length != 4:
            raise MalformedShape("squares have length 4 by convention")
        if kind == "dot" and length != 1:
            raise MalformedShape("dots have length 1")
        if kind.startswith("even") and (length < 2 or length % 2):
            raise MalformedShape("even zigzags need even length >= 2")
        if kind.startswith("odd") and (length < 3 or length % 2 == 0):
            raise MalformedShape("odd zigzags of type M/L need odd length >= 3")


_DEFAULT_LEN = {"square": 4, "dot": 1, "even_type1": 2, "even_type2": 2,
                "odd_M": 3, "odd_L": 3}


def elementary(shape: ElementaryShape) -> DoubleComplex:
    """The canonical model of an indecomposable with unit structure constants
    and the zigzag sign convention d1 a_i = -d2 a_{i+1}."""
    p, q = shape.anchor
    dims = {}
    d1 = {}
    d2 = {}

    def one(table, bd, value=1):
        table[bd] = Matrix([[Scalar(value)]])

    if shape.kind == "square":
        for bd in ((p, q), (p + 1, q), (p, q + 1), (p + 1, q + 1)):
            dims[bd] = 1
        one(d1, (p, q))            # a -> d1 a
        one(d2, (p, q))            # a -> d2 a
        one(d2, (p + 1, q))        # d1 a -> d2 d1 a
        one(d1, (p, q + 1), -1)    # d2 a -> -d2 d1 a
    elif shape.kind == "dot":
        dims[(p, q)] = 1
    elif shape.kind == "even_type1":
        l = shape.length // 2
        for i in range(l):
            dims[(p + i, q - i)] = 1          # a_{i+1}
            dims[(p + i + 1, q - i)] = 1      # d1 a_{i+1}
            one(d1, (p + i, q - i))
            if i:
                one(d2, (p + i, q - i), -1)   # d2 a_{i+1} = -d1 a_i
    elif shape.kind == "even_type2":
        l = shape.length // 2
        dims[(p, q + 1)] = 1                  # d2 a_1
        one(d2, (p, q))
        for i in range(l):
            dims[(p + i, q - i)] = 1          # a_{i+1}
            if i:
                one(d2, (p + i, q - i), -1)
            if i < l - 1:
                dims[(p + i + 1, q - i)] = 1  # d1 a_{i+1}
                one(d1, (p + i, q - i))
    elif shape.kind == "odd_M":
        l = (shape.length - 1) // 2
        for i in range(l + 1):
            dims[(p + i, q - i)] = 1          # a_{i+1}
            if i:
                one(d2, (p + i, q - i), -1)
            if i < l:
                dims[(p + i + 1, q - i)] = 1  # d1 a_{i+1}
                one(d1, (p + i, q - i))
    elif shape.kind == "odd_L":
        l = (shape.length - 1) // 2
        dims[(p, q + 1)] = 1                  # d2 a_1
        one(d2, (p, q))
        for i in range(l):
            dims[(p + i, q - i)] = 1          # a_{i+1}
            if i:
                one(d2, (p + i, q - i), -1)
            dims[(p + i + 1, q - i)] = 1      # d1 a_{i+1}
            one(d1, (p + i, q - i))
    return DoubleComplex(dims, d1, d2)


# -- combinators --------------------------------------------------------------


def direct_sum(*complexes) -> DoubleComplex:
    if not complexes:
        return DoubleComplex({})
    dims = {}
    offsets = []
    for cx in complexes:
        off = {}
        for bd, d in cx.dims.items():
            off[bd] = dims.get(bd, 0)
            dims[bd] = dims.get(bd, 0) + d
        offsets.append(off)

    d1 = {}
    d2 = {}
    for bd in dims:
        for store, tgt in ((d1, (bd[0] + 1, bd[1])), (d2, (bd[0], bd[1] + 1))):
            if dims.get(tgt, 0) == 0:
                continue
            rows = [[ZERO] * dims[bd] for _ in range(dims[tgt])]
            nonzero = False
            for cx, off in zip(complexes, offsets):
                if bd not in off or tgt not in off:
                    continue
                m = cx.d1_at(*bd) if store is d1 else cx.d2_at(*bd)
                if m.nrows == 0 or m.ncols == 0:
                    continue
                ro, co = off[tgt], off[bd]
                for i in range(m.nrows):
                    mr = m.rows[i]
                    for j in range(m.ncols):
                        if not mr[j].is_zero():
                            rows[ro + i][co + j] = mr[j]
                            nonzero = True
            if nonzero:
                store[bd] = Matrix(rows)

    n = complexes[0].n
    if any(cx.n != n for cx in complexes):
        n = None
    conj = None
    if complexes and all(cx.conj is not None for cx in complexes):
        conj = {}
        for bd in dims:
            tgt = (bd[1], bd[0])
            if dims.get(tgt, 0) == 0:
                continue
            rows = [[ZERO] * dims[bd] for _ in range(dims[tgt])]
            for cx, off in zip(complexes, offsets):
                if bd not in off or tgt not in off or cx.dim(*bd) == 0:
                    continue
                m = cx.conj_at(*bd)
                ro, co = off[tgt], off[bd]
                for i in range(m.nrows):
                    for j in range(m.ncols):
                        rows[ro + i][co + j] = m.rows[i][j]
            conj[bd] = Matrix(rows)
    return DoubleComplex(dims, d1, d2, n=n, conj=conj)


def single_complex(spaces, maps, orientation="row") -> DoubleComplex:
    """A cochain complex placed inside the plane.

    spaces: {degree: dim}; maps: {degree: Matrix degree->degree+1}.
    orientation "row" puts degree k at (k,0) with d = d1; "col" puts it at
    (0,k) with d = d2.
    """
    dims = {}
    d1 = {}
    d2 = {}
    for k, d in spaces.items():
        bd = (k, 0) if orientation == "row" else (0, k)
        dims[bd] = d
    for k, m in maps.items():
        bd = (k, 0) if orientation == "row" else (0, k)
        if orientation == "row":
            d1[bd] = m
        else:
            d2[bd] = m
    return DoubleComplex(dims, d1, d2)


def tensor(a: DoubleComplex, b: DoubleComplex) -> DoubleComplex:
    """Tensor product double complex with the Koszul rule
    d2(x (x) y) = (-1)^{|x|} x (x) d2 y (|x| = total degree), and likewise
    for the d1-part of the second factor."""
    dims = {}
    index = {}
    for abd in a.bidegrees():
        for bbd in b.bidegrees():
            bd = (abd[0] + bbd[0], abd[1] + bbd[1])
            base = dims.get(bd, 0)
            index[(abd, bbd)] = base
            dims[bd] = base + a.dims[abd] * b.dims[bbd]

    def block_offsets(bd):
        out = []
        for abd in a.bidegrees():
            bbd = (bd[0] - abd[0], bd[1] - abd[1])
            if bbd in b.dims:
                out.append((abd, bbd, index[(abd, bbd)]))
        return out

    def build(which):
        table = {}
        for bd in dims:
            tgt = (bd[0] + 1, bd[1]) if which == "d1" else (bd[0], bd[1] + 1)
            if dims.get(tgt, 0) == 0:
                continue
            rows = [[ZERO] * dims[bd] for _ in range(dims[tgt])]
            nonzero = False
            tgt_off = {pair[:2]: pair[2] for pair in block_offsets(tgt)}
            for abd, bbd, off in block_offsets(bd):
                da = a.dims[abd]
                db = b.dims[bbd]
                # d on the first factor
                am = a.d1_at(*abd) if which == "d1" else a.d2_at(*abd)
                a_tgt = (abd[0] + 1, abd[1]) if which == "d1" else (abd[0], abd[1] + 1)
                if (a_tgt, bbd) in tgt_off and am.nrows:
                    ro = tgt_off[(a_tgt, bbd)]
                    for i in range(am.nrows):
                        for j in range(am.ncols):
                            v = am.rows[i][j]
                            if v.is_zero():
                                continue
                            for t in range(db):
                                rows[ro + i * db + t][off + j * db + t] = v
                                nonzero = True
                # Koszul-signed d on the second factor
                bm = b.d1_at(*bbd) if which == "d1" else b.d2_at(*bbd)
                b_tgt = (bbd[0] + 1, bbd[1]) if which == "d1" else (bbd[0], bbd[1] + 1)
                if (abd, b_tgt) in tgt_off and bm.nrows:
                    sign = ONE if (abd[0] + abd[1]) % 2 == 0 else -ONE
                    ro = tgt_off[(abd, b_tgt)]
                    for i in range(bm.nrows):
                        for j in range(bm.ncols):
                            v = bm.rows[i][j]
                            if v.is_zero():
                                continue
                            for s in range(da):
                                rows[ro + s * bm.nrows + i][off + s * bm.ncols + j] = sign * v
                                nonzero = True
            if nonzero:
                table[bd] = Matrix(rows)
        return table

    n = None
    if a.n is not None and b.n is not None:
        n = a.n + b.n
    return DoubleComplex(dims, build("d1"), build("d2"), n=n)


def shift(a: DoubleComplex, i: int) -> DoubleComplex:
    """Diagonal shift: (A[i])^{p,q} = A^{p-i,q-i}."""
    dims = {(p + i, q + i): d for (p, q), d in a.dims.items()}
    d1 = {(p + i, q + i): m for (p, q), m in a.d1.items()}
    d2 = {(p + i, q + i): m for (p, q), m in a.d2.items()}
    conj = None
    if a.conj is not None:
        conj = {(p + i, q + i): m for (p, q), m in a.conj.items()}
    n = a.n + 2 * i if a.n is not None else None
    return DoubleComplex(dims, d1, d2, n=n, conj=conj)


def dual(a: DoubleComplex) -> DoubleComplex:
    """DA^{p,q} = Hom(A^{n-p,n-q}, C) with (d^D f)(x) = (-1)^{p+q+1} f(d x)."""
    if a.n is None:
        raise ValidationError("dual requires the total complex dimension n")
    n = a.n
    dims = {(n - p, n - q): d for (p, q), d in a.dims.items()}
    d1 = {}
    d2 = {}
    for (P, Q) in dims:
        sign = ONE if (P + Q + 1) % 2 == 0 else -ONE
        # d1^D at (P,Q) pairs with d1 into A^{n-P, n-Q}
        src = (n - P - 1, n - Q)
        if src in a.dims and a.dims.get((n - P, n - Q), 0):
            m = a.d1_at(*src)
            if m.nrows and m.ncols:
                d1[(P, Q)] = m.transpose().scale(sign)
        src2 = (n - P, n - Q - 1)
        if src2 in a.dims and a.dims.get((n - P, n - Q), 0):
            m = a.d2_at(*src2)
            if m.nrows and m.ncols:
                d2[(P, Q)] = m.transpose().scale(sign)
    return DoubleComplex(dims, d1, d2, n=n)


def conjugate(a: DoubleComplex) -> DoubleComplex:
    """The conjugate complex: bidegrees transposed, entries conjugated."""
    dims = {(q, p): d for (p, q), d in a.dims.items()}
    d1 = {(q, p): a.d2_at(p, q).conj_entries() for (p, q) in a.d2}
    d2 = {(q, p): a.d1_at(p, q).conj_entries() for (p, q) in a.d1}
    conj = None
    if a.conj is not None:
        conj = {(q, p): a.conj_at(p, q).conj_entries() for (p, q) in a.conj}
    return DoubleComplex(dims, d1, d2, n=a.n, conj=conj)


def transpose(a: DoubleComplex) -> DoubleComplex:
    """Swap the two directions (p <-> q, d1 <-> d2) without conjugating."""
    dims = {(q, p): d for (p, q), d in a.dims.items()}
    d1 = {(q, p): m for (p, q), m in a.d2.items()}
    d2 = {(q, p): m for (p, q), m in a.d1.items()}
    return DoubleComplex(dims, d1, d2, n=a.n)


def blowup_model(aX: DoubleComplex, aZ: DoubleComplex, codim: int) -> DoubleComplex:
    """The E1-model of a blow-up with centre of the given codimension:
    A_X (+) A_Z[1] (+) ... (+) A_Z[codim-1]."""
    if codim < 2:
        raise ValidationError("blow-up centres have codimension >= 2")
    parts = [aX] + [shift(aZ, i) for i in range(1, codim)]
    return direct_sum(*parts)
