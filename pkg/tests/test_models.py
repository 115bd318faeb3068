import math

import pytest

from bicomplex.scalars import sc, ONE, ZERO
from bicomplex.models import (
    LieModel, parse_structure_equations, exterior_bicomplex,
    calabi_eckmann_model, corpus, corpus_names, torus_model,
    ParseError, JacobiViolation, IntegrabilityViolation, UnknownModel,
    IWASAWA3_EQUATIONS, IWASAWA5_EQUATIONS, H5_TILDE_EQUATIONS,
    wedge_forms, conj_form,
)
from bicomplex.complexes import tensor, single_complex


def C(n, k):
    return math.comb(n, k)


class TestParser:
    def test_iwasawa_type(self):
        m = parse_structure_equations("dphi1=0; dphi2=0; dphi3=phi1^phi2")
        assert m.n == 3
        assert m.is_complex_parallelisable()
        assert m.dphi[3] == {((1, 2), ()): ONE}

    def test_j_tilde(self):
        m = parse_structure_equations(H5_TILDE_EQUATIONS)
        assert not m.is_complex_parallelisable()
        assert m.dphi[3] == {((1,), (2,)): ONE}

    def test_integrability_violation(self):
        with pytest.raises(IntegrabilityViolation):
            parse_structure_equations("dphi1=0; dphi2=0; dphi3=~phi1^~phi2")

    def test_jacobi_violation(self):
        # d(phi4) = phi3^~phi1 with d(phi3) = phi1^~phi2 breaks d.d = 0
        with pytest.raises(JacobiViolation):
            parse_structure_equations(
                "dphi1=0; dphi2=0; dphi3=phi1^~phi2; dphi4=phi3^~phi1")

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            parse_structure_equations("phi1=0")
        with pytest.raises(ParseError):
            parse_structure_equations("dphi1=0; dphi3=0")  # missing dphi2
        with pytest.raises(ParseError):
            parse_structure_equations("dphi1=phi1&phi2")
        with pytest.raises(ParseError):
            parse_structure_equations("dphi1=0; dphi1=0")

    def test_coefficients(self):
        m = parse_structure_equations("dphi1=0; dphi2=0; dphi3=1/2*phi1^phi2 - i*phi1^~phi2")
        assert m.dphi[3][((1, 2), ())] == sc("1/2")
        assert m.dphi[3][((1,), (2,))] == sc("-i")

    def test_whitespace_insensitive(self):
        a = parse_structure_equations("dphi1 = 0\ndphi2=0\n dphi3 = phi1 ^ phi2".replace(" ^ ", "^"))
        b = parse_structure_equations("dphi1=0;dphi2=0;dphi3=phi1^phi2")
        assert a.dphi == b.dphi


class TestLieComplex:
    def test_torus1(self):
        cx = corpus("torus(1)")
        assert cx.dims == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
        assert all(m.is_zero() for m in cx.d1.values())
        assert all(m.is_zero() for m in cx.d2.values())

    def test_dims_binomial(self):
        cx = corpus("iwasawa5")
        for p in range(6):
            for q in range(6):
                assert cx.dim(p, q) == C(5, p) * C(5, q)
        assert cx.dim(2, 1) == 50
        assert cx.dim(0, 1) == 5

    def test_iwasawa3_sign(self):
        m = parse_structure_equations(IWASAWA3_EQUATIONS)
        cx = m.complex()
        # d(phi3) = -phi1^phi2 lands in the (2,0) block
        col = cx.d1_at(1, 0).column(m.monomial_index(1, 0, ((3,), ())))
        vec = m.vector_to_form(2, 0, col)
        assert vec == {((1, 2), ()): sc(-1)}
        # dbar vanishes on (p,0) for parallelisable models
        for p in range(3):
            assert cx.d2_at(p, 0).is_zero()

    def test_validates_and_conj(self):
        for name in ("iwasawa3", "h5_tilde", "torus(2)"):
            cx = corpus(name)
            assert cx.validate() == []
            assert cx.conj is not None
            for (p, q), d in cx.dims.items():
                assert cx.dim(q, p) == d

    def test_brackets_match_duality(self):
        m = parse_structure_equations(IWASAWA5_EQUATIONS)
        assert m.brackets[3][(1, 2)] == sc(-1)   # [theta1,theta2] = -theta3
        assert m.brackets[4][(1, 3)] == sc(-1)
        assert m.brackets[5][(2, 3)] == sc(-1)
        assert (1, 2) not in m.brackets[4]
        m3 = parse_structure_equations(IWASAWA3_EQUATIONS)
        assert m3.brackets[3][(1, 2)] == ONE     # [theta1,theta2] = theta3

    def test_parallelisable_is_tensor_of_rows_and_columns(self):
        m = parse_structure_equations(IWASAWA3_EQUATIONS)
        cx = m.complex()
        n = m.n
        row_spaces = {p: cx.dim(p, 0) for p in range(n + 1)}
        row_maps = {p: cx.d1_at(p, 0) for p in range(n)}
        col_spaces = {q: cx.dim(0, q) for q in range(n + 1)}
        col_maps = {q: cx.d2_at(0, q) for q in range(n)}
        t = tensor(single_complex(row_spaces, row_maps, "row"),
                   single_complex(col_spaces, col_maps, "col"))
        assert t.validate() == []
        assert t.dims == cx.dims
        for bd in cx.dims:
            assert t.d1_at(*bd) == cx.d1_at(*bd)
            assert t.d2_at(*bd) == cx.d2_at(*bd)

    def test_wedge_anticommutes(self):
        f = {((1,), ()): ONE}
        g = {((2,), ()): ONE}
        fg = wedge_forms(f, g)
        gf = wedge_forms(g, f)
        assert fg == {((1, 2), ()): ONE}
        assert gf == {((1, 2), ()): sc(-1)}
        assert wedge_forms(f, f) == {}

    def test_conj_involution(self):
        f = {((1, 2), (3,)): sc(2, 1)}
        assert conj_form(conj_form(f)) == f


class TestCalabiEckmann:
    def test_ce11_validates(self):
        cx = corpus("ce(1,1)")
        assert cx.validate() == []
        assert cx.n == 3
        # the x11-power truncation keeps a bounded box that contains the
        # geometric window 0..n
        assert all(cx.dim(p, q) > 0 for p in range(4) for q in range(4)
                   if (p, q) in [(0, 0), (1, 1), (3, 3)])

    def test_ce01_validates(self):
        cx = corpus("ce(0,1)")
        assert cx.validate() == []
        assert cx.n == 2

    def test_bad_params(self):
        with pytest.raises(UnknownModel):
            corpus("ce(2,1)")


class TestCorpus:
    def test_unknown(self):
        with pytest.raises(UnknownModel):
            corpus("nope")

    def test_all_names_resolve_and_validate(self):
        for name in corpus_names():
            cx = corpus(name)
            assert cx.validate() == [], name

    def test_elementary_names(self):
        assert corpus("square(0,0)").total_dim() == 4
        assert corpus("oddM(5,1,1)").total_dim() == 5
        assert corpus("even1(4,0,2)").total_dim() == 4
        with pytest.raises(UnknownModel):
            corpus("oddM(4,1,1)")
