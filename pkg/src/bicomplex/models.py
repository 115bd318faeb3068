"""Builders for the example complexes.

* LieModel: invariant-form bicomplexes of complex Lie algebras given by
  structure equations d(phi_k) expanded over {phi_i^phi_j, phi_i^~phi_j}.
* Borel-style CDGA models for Calabi-Eckmann manifolds, truncated to a
  bounded window.
* A named corpus of built-in models.
"""

from __future__ import annotations

import itertools
import re as _re
from fractions import Fraction

from .scalars import Scalar, ZERO, ONE, sc
from .linalg import Matrix
from .complexes import DoubleComplex, ElementaryShape, elementary

__all__ = [
    "LieModel", "parse_structure_equations", "exterior_bicomplex",
    "calabi_eckmann_model", "corpus", "corpus_names",
    "ParseError", "JacobiViolation", "IntegrabilityViolation", "UnknownModel",
]


class ParseError(Exception):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = "" if line is None else " (line %s, col %s)" % (line, col)
        super().__init__(message + where)


class JacobiViolation(Exception):
    pass


class IntegrabilityViolation(Exception):
    pass


class UnknownModel(Exception):
    pass


# -- exterior-algebra monomials ------------------------------------------------
#
# A monomial is (I, J): sorted tuples of holomorphic / antiholomorphic
# indices, representing phi_I ^ phibar_J.  Forms are dicts {(I, J): Scalar}.


def _merge_sign(a, b):
    """Sign of sorting the concatenation of two sorted index tuples; None if
    they overlap."""
    sign = 1
    inversions = 0
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None, ()
        if a[i] < b[j]:
            i += 1
        else:
            inversions += len(a) - i
            j += 1
    merged = tuple(sorted(a + b))
    if inversions % 2:
        sign = -1
    return sign, merged


def wedge_monomials(m1, m2):
    """(sign, monomial) for (I1,J1)^(I2,J2); sign 0 when factors repeat."""
    (i1, j1), (i2, j2) = m1, m2
    s1, ii = _merge_sign(i1, i2)
    if s1 is None:
        return 0, None
    s2, jj = _merge_sign(j1, j2)
    if s2 is None:
        return 0, None
    # move phi_{I2} (|i2| factors) across phibar_{J1} (|j1| factors)
    cross = -1 if (len(j1) * len(i2)) % 2 else 1
    return s1 * s2 * cross, (ii, jj)


def wedge_forms(f1, f2):
    out = {}
    for m1, c1 in f1.items():
        if c1.is_zero():
            continue
        for m2, c2 in f2.items():
            if c2.is_zero():
                continue
            s, m = wedge_monomials(m1, m2)
            if s == 0:
                continue
            c = c1 * c2
            if s < 0:
                c = -c
            acc = out.get(m)
            out[m] = c if acc is None else acc + c
    return {m: c for m, c in out.items() if not c.is_zero()}


def conj_form(f):
    """Complex conjugate of a form: phi_I^phibar_J -> (-1)^{|I||J|} phi_J^phibar_I
    with conjugated coefficients."""
    out = {}
    for (ii, jj), c in f.items():
        s = -1 if (len(ii) * len(jj)) % 2 else 1
        cc = c.conj()
        out[(jj, ii)] = -cc if s < 0 else cc
    return out


class LieModel:
    """A complex Lie algebra presented by structure equations on a basis
    phi_1..phi_n of (1,0)-forms, together with the derived invariant-form
    double complex on the sorted monomial basis."""

    def __init__(self, n, dphi, name="lie"):
        self.n = n
        self.name = name
        # dphi[k] (k = 1..n): form dict with (2,0) and (1,1) monomials only
        self.dphi = dphi
        self._check_integrability()
        self.dphi_bar = [None] + [conj_form(self.dphi[k]) for k in range(1, n + 1)]
        self._check_jacobi()
        self.brackets = self._bracket_constants()
        self._basis = {}
        self._index = {}
        for p in range(n + 1):
            for q in range(n + 1):
                mons = [(ii, jj)
                        for ii in itertools.combinations(range(1, n + 1), p)
                        for jj in itertools.combinations(range(1, n + 1), q)]
                mons.sort()
                self._basis[(p, q)] = mons
                self._index[(p, q)] = {m: i for i, m in enumerate(mons)}
        self._complex = None

    # -- structure checks ----------------------------------------------

    def _check_integrability(self):
        for k in range(1, self.n + 1):
            for (ii, jj), c in self.dphi[k].items():
                if len(ii) == 0 and len(jj) == 2 and not c.is_zero():
                    raise IntegrabilityViolation(
                        "d(phi%d) has a (0,2) component ~phi%d^~phi%d"
                        % (k, jj[0], jj[1]))
                if len(ii) + len(jj) != 2:
                    raise IntegrabilityViolation(
                        "d(phi%d) contains a non-2-form monomial" % k)

    def generator_image(self, idx, conjugated):
        """d of the generator phi_idx (or phibar_idx)."""
        return self.dphi_bar[idx] if conjugated else self.dphi[idx]

    def d_form(self, f):
        """Extend d to arbitrary monomial forms by the graded Leibniz rule."""
        out = {}
        for (ii, jj), c in f.items():
            if c.is_zero():
                continue
            factors = [(i, False) for i in ii] + [(j, True) for j in jj]
            for t, (idx, conjq) in enumerate(factors):
                dgen = self.generator_image(idx, conjq)
                if not dgen:
                    continue
                rest_i = tuple(x for x in ii if not (not conjq and x == idx)) if not conjq else ii
                rest_j = tuple(x for x in jj if not (conjq and x == idx)) if conjq else jj
                rest = {(rest_i, rest_j): ONE}
                sign = -1 if t % 2 else 1
                for m2, c2 in wedge_forms(dgen, rest).items():
                    add = c * c2
                    if sign < 0:
                        add = -add
                    acc = out.get(m2)
                    out[m2] = add if acc is None else acc + add
        return {m: c for m, c in out.items() if not c.is_zero()}

    def _check_jacobi(self):
        for k in range(1, self.n + 1):
            for f in (self.dphi[k], self.dphi_bar[k]):
                dd = self.d_form(f)
                if dd:
                    raise JacobiViolation(
                        "d.d(phi%d) != 0; offending Jacobi triple visible in %s"
                        % (k, sorted(dd)))

    def _bracket_constants(self):
        """c[k][(i,j)] with [theta_i, theta_j] = sum_k c^k_{ij} theta_k, from
        phi_k([x,y]) = -d(phi_k)(x,y) applied to the (2,0) parts."""
        c = {k: {} for k in range(1, self.n + 1)}
        for k in range(1, self.n + 1):
            for (ii, jj), coef in self.dphi[k].items():
                if len(ii) == 2 and len(jj) == 0:
                    i, j = ii
                    c[k][(i, j)] = -coef
                    c[k][(j, i)] = coef
        return c

    def is_complex_parallelisable(self):
        return all(len(jj) == 0
                   for k in range(1, self.n + 1)
                   for (ii, jj) in self.dphi[k])

    # -- coordinates ------------------------------------------------------

    def basis(self, p, q):
        return self._basis[(p, q)]

    def monomial_index(self, p, q, mon):
        return self._index[(p, q)][mon]

    def form_to_vector(self, p, q, f):
        v = [ZERO] * len(self._basis[(p, q)])
        for m, c in f.items():
            if len(m[0]) != p or len(m[1]) != q:
                if not c.is_zero():
                    raise ValueError("form is not pure of type (%d,%d)" % (p, q))
                continue
            v[self._index[(p, q)][m]] = c
        return v

    def vector_to_form(self, p, q, vec):
        return {m: c for m, c in zip(self._basis[(p, q)], vec) if not c.is_zero()}

    def wedge_vectors(self, bd1, v1, bd2, v2):
        f = wedge_forms(self.vector_to_form(*bd1, v1), self.vector_to_form(*bd2, v2))
        bd = (bd1[0] + bd2[0], bd1[1] + bd2[1])
        return bd, self.form_to_vector(*bd, f)

    def top_coefficient(self, vec):
        """Coefficient of phi_{1..n}^phibar_{1..n} in an (n,n)-vector."""
        top = (tuple(range(1, self.n + 1)), tuple(range(1, self.n + 1)))
        return vec[self._index[(self.n, self.n)][top]]

    def complex(self) -> DoubleComplex:
        if self._complex is not None:
            return self._complex
        n = self.n
        dims = {(p, q): len(self._basis[(p, q)]) for p in range(n + 1) for q in range(n + 1)}
        d1 = {}
        d2 = {}
        conj = {}
        for (p, q), mons in self._basis.items():
            cols1 = []
            cols2 = []
            for mon in mons:
                df = self.d_form({mon: ONE})
                parts = {(pp, qq): {} for pp, qq in (((p + 1), q), (p, (q + 1)))}
                for m, c in df.items():
                    parts[(len(m[0]), len(m[1]))][m] = c
                cols1.append(self.form_to_vector(p + 1, q, parts[(p + 1, q)])
                             if p + 1 <= n else [])
                cols2.append(self.form_to_vector(p, q + 1, parts[(p, q + 1)])
                             if q + 1 <= n else [])
            if p + 1 <= n:
                d1[(p, q)] = Matrix.from_columns(cols1, dims[(p + 1, q)])
            if q + 1 <= n:
                d2[(p, q)] = Matrix.from_columns(cols2, dims[(p, q + 1)])
            ccols = []
            for mon in mons:
                f = conj_form({mon: ONE})
                ccols.append(self.form_to_vector(q, p, f))
            conj[(p, q)] = Matrix.from_columns(ccols, dims[(q, p)])
        cx = DoubleComplex(dims, d1, d2, n=n, conj=conj,
                           meta={"kind": "lie", "model": self, "name": self.name})
        bad = cx.validate()
        if bad:
            raise JacobiViolation("derived bicomplex is invalid: %s" % "; ".join(bad))
        self._complex = cx
        return cx


def exterior_bicomplex(model: LieModel) -> DoubleComplex:
    return model.complex()


# -- structure-equation DSL ------------------------------------------------
#
#   dphi1 = 0
#   dphi3 = phi1^phi2 - 1/2*phi1^~phi2
#
# "~" marks a conjugated generator; coefficients are Scalar literals
# (rational or pure-imaginary; parenthesized complex "(a+b*i)" allowed),
# default 1; whitespace is insignificant.

_TERM_RX = _re.compile(
    r"^(?P<coef>(?:\((?P<paren>[^)]*)\)|(?P<lit>(?:\d+(?:/\d+)?)?\*?i|\d+(?:/\d+)?))\*?)?"
    r"(?P<c1>~?)(?P<g1>[A-Za-z]+)(?P<i1>\d+)\^(?P<c2>~?)(?P<g2>[A-Za-z]+)(?P<i2>\d+)$"
)


def parse_structure_equations(text: str, name="lie") -> LieModel:
    lines = []
    for chunk in text.replace(";", "\n").splitlines():
        s = chunk.strip()
        if s and not s.startswith("#"):
            lines.append(s)
    eqs = {}
    gen_name = None
    for lineno, line in enumerate(lines, start=1):
        s = line.replace(" ", "").replace("\t", "")
        m = _re.match(r"^d([A-Za-z]+)(\d+)=(.*)$", s)
        if not m:
            raise ParseError("expected 'd<name><k> = ...'", lineno, 1)
        gname, idx, rhs = m.group(1), int(m.group(2)), m.group(3)
        if gen_name is None:
            gen_name = gname
        elif gname != gen_name:
            raise ParseError("mixed generator names %r and %r" % (gen_name, gname), lineno, 2)
        if idx in eqs:
            raise ParseError("duplicate equation for d%s%d" % (gname, idx), lineno, 1)
        eqs[idx] = _parse_rhs(rhs, gen_name, lineno)
    if not eqs:
        raise ParseError("no structure equations found")
    n = max(eqs)
    missing = [k for k in range(1, n + 1) if k not in eqs]
    if missing:
        raise ParseError("missing equation for d%s%d" % (gen_name, missing[0]))
    dphi = [None] + [eqs[k] for k in range(1, n + 1)]
    for k in range(1, n + 1):
        for (ii, jj) in dphi[k]:
            for t in ii + jj:
                if t > n:
                    raise ParseError("index %d exceeds generator count %d" % (t, n))
    return LieModel(n, dphi, name=name)


def _parse_rhs(rhs, gen_name, lineno):
    if rhs == "0":
        return {}
    out = {}
    col = 1
    for signed in _split_terms(rhs, lineno):
        sign, term, tcol = signed
        m = _TERM_RX.match(term)
        if not m or m.group("g1") != gen_name or m.group("g2") != gen_name:
            raise ParseError("bad term %r" % term, lineno, col + tcol)
        if m.group("paren") is not None:
            coef = Scalar.parse(m.group("paren"))
        elif m.group("lit"):
            coef = Scalar.parse(m.group("lit"))
        else:
            coef = ONE
        if sign < 0:
            coef = -coef
        i1, i2 = int(m.group("i1")), int(m.group("i2"))
        c1, c2 = bool(m.group("c1")), bool(m.group("c2"))
        f = {((i1,) if not c1 else (), (i1,) if c1 else ()): ONE}
        g = {((i2,) if not c2 else (), (i2,) if c2 else ()): ONE}
        for mon, c in wedge_forms(f, g).items():
            add = coef * c
            acc = out.get(mon)
            out[mon] = add if acc is None else acc + add
    return {m: c for m, c in out.items() if not c.is_zero()}


def _split_terms(rhs, lineno):
    """Split "a - b + c" into signed terms, respecting parentheses."""
    terms = []
    depth = 0
    cur = ""
    sign = 1
    start = 0
    for i, ch in enumerate(rhs):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parenthesis", lineno, i + 1)
        if ch in "+-" and depth == 0 and cur:
            terms.append((sign, cur, start))
            sign = 1 if ch == "+" else -1
            cur = ""
            start = i + 1
            continue
        if ch in "+-" and depth == 0 and not cur:
            sign = sign * (1 if ch == "+" else -1)
            continue
        cur += ch
    if depth:
        raise ParseError("unbalanced parenthesis", lineno, len(rhs))
    if cur:
        terms.append((sign, cur, start))
    if not terms:
        raise ParseError("empty right-hand side", lineno, 1)
    return terms


# -- Calabi-Eckmann CDGA models ---------------------------------------------


def calabi_eckmann_model(u: int, v: int) -> DoubleComplex:
    """Bounded CDGA model for the Calabi-Eckmann manifold X_{u,v}: the free
    graded-commutative algebra on x01 (0,1), x11 (1,1), y (u+1,u) and
    xv (v+1,v) with dbar(y) = x11^(u+1) and d(x01) = x11, truncated by the
    differential ideal (x11^(n+1)) for n = u+v+1.

    The truncation reproduces the Borel cohomology table on the geometric
    window 0 <= p,q <= n and confines its artifacts to bidegrees outside
    that window; all values are model-level (meta flag model_level)."""
    if not (0 <= u <= v):
        raise UnknownModel("calabi_eckmann_model requires 0 <= u <= v")
    n = u + v + 1
    cap = n + 1   # x11^cap = 0

    # monomial = (e0, e1, e2, e3): x01^e0 x11^e1 y^e2 xv^e3
    def bidegree(m):
        e0, e1, e2, e3 = m
        return (e1 + e2 * (u + 1) + e3 * (v + 1),
                e0 + e1 + e2 * u + e3 * v)

    monos = [(e0, e1, e2, e3)
             for e0 in (0, 1) for e2 in (0, 1) for e3 in (0, 1)
             for e1 in range(cap)]

    def d_of(m, which):
        """Image of monomial m under d1 (which='d') or d2 (which='dbar')."""
        e0, e1, e2, e3 = m
        out = {}
        if which == "d" and e0 and e1 + 1 < cap:
            # d(x01) = x11; x01 sits in the leading slot, empty prefix
            out[(0, e1 + 1, e2, e3)] = ONE
        if which == "dbar" and e2 and e1 + u + 1 < cap:
            # dbar(y) = x11^(u+1); Koszul sign from the prefix x01^e0 x11^e1
            out[(e0, e1 + u + 1, 0, e3)] = Scalar(-1 if e0 % 2 else 1)
        return out

    by_bd = {}
    for m in sorted(monos):
        by_bd.setdefault(bidegree(m), []).append(m)
    index = {m: i for ms in by_bd.values() for i, m in enumerate(ms)}
    dims = {bd: len(ms) for bd, ms in by_bd.items()}
    d1 = {}
    d2 = {}
    for bd, ms in by_bd.items():
        for which, store, tgt_bd in (("d", d1, (bd[0] + 1, bd[1])),
                                     ("dbar", d2, (bd[0], bd[1] + 1))):
            if dims.get(tgt_bd, 0) == 0:
                continue
            rows = [[ZERO] * len(ms) for _ in range(dims[tgt_bd])]
            nonzero = False
            for j, m in enumerate(ms):
                for tgt, c in d_of(m, which).items():
                    rows[index[tgt]][j] = c
                    nonzero = True
            if nonzero:
                store[bd] = Matrix(rows)
    meta = {"kind": "cdga", "name": "ce(%d,%d)" % (u, v), "model_level": True,
            "ce_params": (u, v), "window": n,
            "ce_monomials": {bd: list(ms) for bd, ms in by_bd.items()}}
    cx = DoubleComplex(dims, d1, d2, n=n, meta=meta)
    bad = cx.validate()
    if bad:
        raise ValueError("Calabi-Eckmann model failed validation: %s" % bad)
    return cx


# -- corpus -----------------------------------------------------------------


IWASAWA3_EQUATIONS = "dphi1=0; dphi2=0; dphi3=-phi1^phi2"
IWASAWA5_EQUATIONS = ("dphi1=0; dphi2=0; dphi3=phi1^phi2; "
                      "dphi4=phi1^phi3; dphi5=phi2^phi3")
H5_TILDE_EQUATIONS = "dtau1=0; dtau2=0; dtau3=tau1^~tau2"


def torus_model(n: int) -> LieModel:
    text = "; ".join("dphi%d=0" % k for k in range(1, n + 1))
    return parse_structure_equations(text, name="torus(%d)" % n)


_NAME_RX = _re.compile(r"^([A-Za-z_0-9]+?)(?:\((-?\d+(?:,-?\d+)*)\))?$")


def corpus(name: str) -> DoubleComplex:
    """Built-in models addressed by name: torus(n), iwasawa3, iwasawa5,
    h5_tilde, ce(u,v), and elementary shapes square(p,q), dot(p,q),
    even1(len,p,q), even2(len,p,q), oddM(len,p,q), oddL(len,p,q)."""
    m = _NAME_RX.match(name.strip())
    if not m:
        raise UnknownModel("cannot parse model name %r" % name)
    base = m.group(1)
    args = [int(x) for x in m.group(2).split(",")] if m.group(2) else []
    if base == "torus" and len(args) == 1 and args[0] >= 1:
        return torus_model(args[0]).complex()
    if base == "iwasawa3" and not args:
        return parse_structure_equations(IWASAWA3_EQUATIONS, "iwasawa3").complex()
    if base == "iwasawa5" and not args:
        return parse_structure_equations(IWASAWA5_EQUATIONS, "iwasawa5").complex()
    if base == "h5_tilde" and not args:
        return parse_structure_equations(H5_TILDE_EQUATIONS, "h5_tilde").complex()
    if base == "ce" and len(args) == 2 and 0 <= args[0] <= args[1]:
        return calabi_eckmann_model(*args)
    shape_kinds = {"square": "square", "dot": "dot", "even1": "even_type1",
                   "even2": "even_type2", "oddm": "odd_M", "oddl": "odd_L"}
    if base.lower() in shape_kinds:
        kind = shape_kinds[base.lower()]
        try:
            if kind in ("square", "dot") and len(args) == 2:
                return elementary(ElementaryShape(kind, tuple(args)))
            if len(args) == 3:
                return elementary(ElementaryShape(kind, (args[1], args[2]), args[0]))
        except Exception as exc:
            raise UnknownModel("bad shape arguments in %r: %s" % (name, exc))
    raise UnknownModel("unknown model %r" % name)


def corpus_names(include_heavy=True):
    """The standard model list used by the property and acceptance suites."""
    names = ["torus(1)", "torus(2)", "iwasawa3", "h5_tilde",
             "ce(0,1)", "ce(1,1)",
             "square(0,0)", "dot(1,1)", "even1(2,0,0)", "even2(4,1,1)",
             "oddM(3,0,0)", "oddL(3,0,0)"]
    if include_heavy:
        names.insert(3, "iwasawa5")
    return names
