"""Multiplicities of indecomposable summands (squares, dots, zigzags) of a
bounded double complex, computed by cohomological counting:

* squares(p,q) = rank of the length-2 composite d2.d1 out of (p,q);
* even zigzags of length 2l = ranks of the page-l differentials of the
  column (type 1) and row (type 2) sequences, keyed by the source of the
  differential they induce;
* odd zigzags = double differences of the bifiltration dimensions
  m(p,q,k) = dim(F^p H^k cap Fbar^q H^k).

The reconstruction op assembles the elementary model with the same table,
and the page-r criterion reads the table directly.
"""

from __future__ import annotations

from .linalg import rref
from .complexes import DoubleComplex, ElementaryShape, elementary, direct_sum
from .spectral import pages, total_complex
from .cohomology import de_rham

__all__ = ["MultiplicityTable", "decompose", "reconstruct", "zigzag_page_r",
           "symmetry_check", "render", "NegativeMultiplicity"]


class NegativeMultiplicity(Exception):
    """A multiplicity count came out negative: internal inconsistency."""


class MultiplicityTable:
    """squares: {(p,q): count} keyed by the generator position;
    evens: {(side, l, p, q): count} keyed by the page-l differential source;
    odds: {(k, p, q): count} keyed by the bifiltration corner signature."""

    def __init__(self, squares, evens, odds):
        self.squares = {bd: c for bd, c in squares.items() if c}
        self.evens = {key: c for key, c in evens.items() if c}
        self.odds = {key: c for key, c in odds.items() if c}

    def total_dim(self):
        total = 4 * sum(self.squares.values())
        for (side, l, p, q), c in self.evens.items():
            total += 2 * l * c
        for (k, p, q), c in self.odds.items():
            total += self.odd_length(k, p, q) * c
        return total

    @staticmethod
    def odd_length(k, p, q):
        return 2 * abs(k - p - q) + 1

    @staticmethod
    def odd_kind(k, p, q):
        if p + q == k:
            return "dot"
        return "odd_M" if p + q < k else "odd_L"

    def shapes(self):
        """The multiset of (kind, anchor, length) with anchors as in the
        elementary() constructor."""
        out = {}
        for bd, c in self.squares.items():
            out[("square", bd, 4)] = out.get(("square", bd, 4), 0) + c
        for (side, l, p, q), c in self.evens.items():
            if side == "column":
                key = ("even_type1", (p, q), 2 * l)
            else:
                key = ("even_type2", (p - l + 1, q + l - 1), 2 * l)
            out[key] = out.get(key, 0) + c
        for (k, p, q), c in self.odds.items():
            kind = self.odd_kind(k, p, q)
            length = self.odd_length(k, p, q)
            l = (length - 1) // 2
            if kind == "dot":
                anchor = (p, q)
            elif kind == "odd_M":
                anchor = (p, q + l)
            else:
                anchor = (p - l, q - 1)
            out[(kind, anchor, length)] = out.get((kind, anchor, length), 0) + c
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiplicityTable):
            return NotImplemented
        return (self.squares == other.squares and self.evens == other.evens
                and self.odds == other.odds)

    def to_json(self):
        return {
            "squares": {"%d,%d" % bd: c for bd, c in sorted(self.squares.items())},
            "evens": [{"side": side, "l": l, "p": p, "q": q, "mult": c}
                      for (side, l, p, q), c in sorted(self.evens.items())],
            "odds": [{"k": k, "p": p, "q": q, "mult": c}
                     for (k, p, q), c in sorted(self.odds.items())],
        }


def decompose(cx: DoubleComplex) -> MultiplicityTable:
    key = "zigzag_table"
    if key in cx._cache:
        return cx._cache[key]
    squares = {}
    for bd in cx.bidegrees():
        comp = cx.d2_at(bd[0] + 1, bd[1]) * cx.d1_at(*bd)
        r = len(rref(comp)[1]) if comp.nrows and comp.ncols else 0
        if r:
            squares[bd] = r
    evens = {}
    for side in ("column", "row"):
        table = pages(cx, side)
        for l in range(1, table.r_max + 1):
            for bd, m in table.d.get(l, {}).items():
                r = len(rref(m)[1])
                if r:
                    evens[(side, l, bd[0], bd[1])] = r
    odds = {}
    data = de_rham(cx)
    tot = total_complex(cx)
    pmin, pmax, qmin, qmax = cx.bounding_box()
    for k in tot["degrees"]:
        if tot["betti"][k] == 0:
            continue
        for p in range(pmin, pmax + 1):
            for q in range(qmin, qmax + 1):
                delta = (data.m.get((p, q, k), 0)
                         - data.m.get((p + 1, q, k), 0)
                         - data.m.get((p, q + 1, k), 0)
                         + data.m.get((p + 1, q + 1, k), 0))
                if delta < 0:
                    raise NegativeMultiplicity(
                        "delta(%d,%d,%d) = %d" % (p, q, k, delta))
                if delta:
                    odds[(k, p, q)] = delta
    t = MultiplicityTable(squares, evens, odds)
    if t.total_dim() != cx.total_dim():
        raise NegativeMultiplicity(
            "multiplicities account for dimension %d of %d"
            % (t.total_dim(), cx.total_dim()))
    cx._cache[key] = t
    return t


def reconstruct(t: MultiplicityTable) -> DoubleComplex:
    parts = []
    for (kind, anchor, length), c in sorted(t.shapes().items()):
        for _ in range(c):
            parts.append(elementary(ElementaryShape(kind, anchor, length)))
    return direct_sum(*parts) if parts else DoubleComplex({})


def zigzag_page_r(t: MultiplicityTable, r: int) -> bool:
    """True iff the odd summands are all dots and every even zigzag has
    length at most 2r."""
    for (k, p, q) in t.odds:
        if p + q != k:
            return False
    for (side, l, p, q) in t.evens:
        if l > r:
            return False
    return True


def symmetry_check(cx: DoubleComplex):
    """Multiplicity invariance under the diagonal reflection (conjugation;
    exchanges type-1 with type-2 evens) and the antidiagonal reflection
    through (n,n) (duality; exchanges type M with type L)."""
    if cx.conj is None or cx.n is None:
        raise ValueError("symmetry check needs conj and n")
    n = cx.n
    t = decompose(cx)
    shapes = t.shapes()

    def normalize(shape_set):
        return sorted(shape_set.items())

    mirrored = {}
    for (kind, (p, q), length), c in shapes.items():
        l = (length - 1) // 2
        ll = length // 2
        if kind == "square":
            new = ("square", (q, p), 4)
        elif kind == "dot":
            new = ("dot", (q, p), 1)
        elif kind == "even_type1":
            # swapping d1/d2 turns the horizontal-ended staircase into a
            # vertical-ended one, anchored at the reflected last generator
            new = ("even_type2", (q - ll + 1, p + ll - 1), length)
        elif kind == "even_type2":
            new = ("even_type1", (q - ll + 1, p + ll - 1), length)
        elif kind == "odd_M":
            new = ("odd_M", (q - l, p + l), length)
        else:
            new = ("odd_L", (q - l + 1, p + l - 1), length)
        mirrored[new] = mirrored.get(new, 0) + c
    diag_ok = normalize(mirrored) == normalize(shapes)

    anti = {}
    for (kind, (p, q), length), c in shapes.items():
        l = (length - 1) // 2
        ll = length // 2
        if kind == "square":
            new = ("square", (n - p - 1, n - q - 1), 4)
        elif kind == "dot":
            new = ("dot", (n - p, n - q), 1)
        elif kind == "even_type1":
            new = ("even_type1", (n - p - ll, n - q + ll - 1), length)
        elif kind == "even_type2":
            new = ("even_type2", (n - p - ll + 1, n - q + ll - 2), length)
        elif kind == "odd_M":
            new = ("odd_L", (n - p - l, n - q + l - 1), length)
        else:
            new = ("odd_M", (n - p - l, n - q + l - 1), length)
        anti[new] = anti.get(new, 0) + c
    anti_ok = normalize(anti) == normalize(shapes)
    return {"diagonal": diag_ok, "antidiagonal": anti_ok,
            "ok": diag_ok and anti_ok}


def render(t: MultiplicityTable, fmt: str = "dot") -> str:
    """Deterministic diagram source (graphviz 'dot' or tikz-cd-style 'tex'):
    one node per one-dimensional piece, one edge per nonzero arrow."""
    if fmt not in ("dot", "tex"):
        raise ValueError("unknown render format %r" % fmt)
    nodes = []
    edges = []
    copy_counter = {}
    for (kind, anchor, length), mult in sorted(t.shapes().items()):
        for copy in range(mult):
            tag = "%s_%d_%d_len%d_c%d" % (kind, anchor[0], anchor[1], length, copy)
            cx = elementary(ElementaryShape(kind, anchor, length))
            local = {}
            for bd in cx.bidegrees():
                name = "%s_%d_%d" % (tag, bd[0], bd[1])
                local[bd] = name
                nodes.append((name, bd, kind))
            for bd in cx.bidegrees():
                if not cx.d1_at(*bd).is_zero():
                    edges.append((local[bd], local[(bd[0] + 1, bd[1])], "d1"))
                if not cx.d2_at(*bd).is_zero():
                    edges.append((local[bd], local[(bd[0], bd[1] + 1)], "d2"))
    if fmt == "dot":
        lines = ["digraph zigzags {", "  rankdir=BT;",
                 "  node [shape=point, width=0.12];"]
        for name, bd, kind in nodes:
            lines.append('  "%s" [pos="%d,%d!", xlabel="(%d,%d)"];'
                         % (name, bd[0], bd[1], bd[0], bd[1]))
        for a, b, lab in edges:
            lines.append('  "%s" -> "%s" [label="%s"];' % (a, b, lab))
        lines.append("}")
        return "\n".join(lines) + "\n"
    lines = ["% zigzag diagram (tikz-cd style; one \\bullet per basis line)"]
    for name, bd, kind in nodes:
        lines.append("\\node (%s) at (%d,%d) {$\\bullet$};" % (name, bd[0], bd[1]))
    for a, b, lab in edges:
        arrow = "->" if lab == "d1" else "->, dashed"
        lines.append("\\draw[%s] (%s) -- (%s);" % (arrow, a, b))
    return "\n".join(lines) + "\n"
