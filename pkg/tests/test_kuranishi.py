import random
from fractions import Fraction

import pytest

from bicomplex.scalars import Scalar, ZERO, ONE, sc
from bicomplex.linalg import Subspace, rref
from bicomplex.models import (
    corpus, parse_structure_equations, IWASAWA3_EQUATIONS, IWASAWA5_EQUATIONS,
)
from bicomplex.hodge import Metric
from bicomplex.kuranishi import (
    VectorForm, contract, bracket, tangent_cohomology, tangent_direction,
    appendix2_membership, essential_spaces, run_kuranishi, holomorphic_volume,
    vector_form_from_vector, vector_form_to_vector, vector_form_keys,
    center, Obstructed, KuranishiError, cy_matrix,
)
from bicomplex.spectral import zc_spaces
from bicomplex.towers import pure_closed_space


def model3():
    return corpus("iwasawa3").meta["model"]


def model5():
    return corpus("iwasawa5").meta["model"]


class TestContract:
    def test_frame_duality(self):
        m = model3()
        # theta_3 -| phi_1 = 0
        psi = VectorForm(m, 0, {(3, ()): ONE})
        bd, vec = contract(psi, (1, 0), m.form_to_vector(1, 0, {((1,), ()): ONE}))
        assert all(not x.nz for x in vec)

    def test_theta1_phibar1_contraction(self):
        m = model3()
        u = holomorphic_volume(m)
        psi = VectorForm(m, 1, {(1, (1,)): ONE})
        bd, vec = contract(psi, (3, 0), u)
        assert bd == (2, 1)
        form = m.vector_to_form(2, 1, vec)
        # phibar_1 ^ (theta_1 -| u) = phibar_1 ^ phi_2 ^ phi_3 = phi_23 ^ phibar_1
        assert form == {((2, 3), (1,)): ONE}

    def test_cy_map_injective(self):
        for m in (model3(), model5()):
            cy = cy_matrix(m, 1)
            assert len(rref(cy)[1]) == cy.ncols


class TestBracket:
    def test_appendix_D_coefficient(self):
        m = model3()
        psi = VectorForm(m, 1, {(1, (2,)): ONE, (2, (1,)): ONE})
        out = bracket(psi, psi)
        # D_{t,t} = -2 with t12 = t21 = 1: [psi,psi] = -2 theta_3 phibar_12
        assert out.coeffs == {(3, (1, 2)): sc(-2)}

    def test_center_annihilates(self):
        m = model3()
        rng = random.Random(0)
        psi = VectorForm(m, 1, {(3, (3,)): ONE})
        for key in [(1, (1,)), (2, (3,)), (3, (2,))]:
            rho = VectorForm(m, 1, {key: ONE})
            assert bracket(psi, rho).is_zero()

    def test_symmetric_on_01(self):
        m = model5()
        rng = random.Random(1)
        keys = vector_form_keys(m, 1)
        a = VectorForm(m, 1, {rng.choice(keys): sc(2), rng.choice(keys): ONE})
        b = VectorForm(m, 1, {rng.choice(keys): sc(-1), rng.choice(keys): sc(3)})
        ab = vector_form_to_vector(bracket(a, b))
        ba = vector_form_to_vector(bracket(b, a))
        assert ab == ba

    def test_tian_todorov_identity(self):
        # d1(psi -| (rho -| u)) = -[psi,rho] -| u whenever both contractions
        # with u are d1-closed, over all basis pairs.  The sign is forced by
        # the two fixed conventions psi -| u = sum (-1)^(i-1) t phibar^phihat
        # and [theta_1,theta_2] = theta_3 (dual to d(phi_3) = -phi_12).
        for m in (model3(), model5()):
            cx = m.complex()
            n = m.n
            u = holomorphic_volume(m)
            keys = vector_form_keys(m, 1)
            d1_top = cx.d1_at(n - 1, 1)
            ok_keys = []
            for k in keys:
                _, vec = contract(VectorForm(m, 1, {k: ONE}), (n, 0), u)
                if all(not x.nz for x in d1_top.apply(vec)):
                    ok_keys.append(k)
            for ka in ok_keys:
                psi = VectorForm(m, 1, {ka: ONE})
                for kb in ok_keys:
                    rho = VectorForm(m, 1, {kb: ONE})
                    _, inner = contract(rho, (n, 0), u)
                    bd, outer = contract(psi, (n - 1, 1), inner)
                    lhs = cx.d1_at(n - 2, 2).apply(outer)
                    br = bracket(psi, rho)
                    acc = [ZERO] * cx.dim(n - 1, 2)
                    for (i, J), c in br.coeffs.items():
                        _, piece = contract(VectorForm(m, 2, {(i, J): c}), (n, 0), u)
                        acc = [x + y for x, y in zip(acc, piece)]
                    assert lhs == [-x for x in acc], (ka, kb)


class TestTangent:
    def test_dimensions(self):
        assert tangent_cohomology(model3())["dimension"] == 6
        assert tangent_cohomology(model5())["dimension"] == 10
        torus = corpus("torus(2)").meta["model"]
        assert tangent_cohomology(torus)["dimension"] == 4

    def test_requires_parallelisable(self):
        m = corpus("h5_tilde").meta["model"]
        with pytest.raises(KuranishiError):
            tangent_cohomology(m)

    def test_center(self):
        assert center(model3()).dim == 1
        assert center(model5()).dim == 2
        assert parallelisable_dims(model5()) == 4

    def test_z1_equals_z2_at_n11(self):
        # the unobstructedness hypothesis Z_1^{n-1,1} = Z_2^{n-1,1}
        for m in (model3(), model5()):
            cx = m.complex()
            bd = (m.n - 1, 1)
            z1 = zc_spaces(cx, "column", 1, bd)[0]
            z2 = zc_spaces(cx, "column", 2, bd)[0]
            assert z1 == z2


def parallelisable_dims(m):
    from bicomplex.kuranishi import parallelisable_directions
    return parallelisable_directions(m)["dimension"]


class TestAppendix2:
    def test_i3_all_pass(self):
        rep = appendix2_membership(model3())
        assert rep["all_pass"]
        assert rep["closed_dim"] == 6
        assert rep["d_exact_dim"] == 1      # span(theta_3 phibar_3)

    def test_i5_all_pass(self):
        rep = appendix2_membership(model5())
        assert rep["all_pass"]
        assert rep["closed_dim"] == 10
        assert rep["d_exact_dim"] == 3

    def test_i5_family_is_quoted_span(self):
        from bicomplex.kuranishi import recursion_exact_family
        from bicomplex.linalg import Subspace
        m = model5()
        fam = recursion_exact_family(m)
        gens = []
        for j in (3, 4, 5):
            gens.append(vector_form_to_vector(VectorForm(m, 1, {(j, (3,)): ONE})))
        assert fam == Subspace.span(len(gens[0]), gens)

    def test_i3_full_d_exact_family_also_passes(self):
        # the worked I3 case actually treats all of CY^{-1}(Im d1), which is
        # span(theta_3 (x) phibar_mu); every pairing stays E_2-closed
        from bicomplex.kuranishi import closed_family, holomorphic_volume
        m = model3()
        cx = m.complex()
        u = holomorphic_volume(m)
        z2 = zc_spaces(cx, "column", 2, (1, 2))[0]
        fam = [VectorForm(m, 1, {(3, (mu,)): ONE}) for mu in (1, 2, 3)]
        closed = [vector_form_from_vector(m, 1, c)
                  for c in closed_family(m).basis.columns()]
        for psi in fam + closed:
            for rho in fam:
                _, inner = contract(rho, (3, 0), u)
                _, outer = contract(psi, (2, 1), inner)
                assert z2.contains_vector(outer)

    def test_i3_case_c_vanishes(self):
        m = model3()
        u = holomorphic_volume(m)
        # both directions with psi -| u in Im d1: theta_3 (x) phibar_mu
        for mu in (1, 2, 3):
            for nu in (1, 2, 3):
                psi = VectorForm(m, 1, {(3, (mu,)): ONE})
                rho = VectorForm(m, 1, {(3, (nu,)): ONE})
                _, inner = contract(rho, (3, 0), u)
                _, outer = contract(psi, (2, 1), inner)
                assert all(not x.nz for x in outer)


class TestEssential:
    def test_i3(self):
        m = model3()
        rep = essential_spaces(m, Metric.orthonormal())
        assert rep["e1_dim"] == 6
        assert rep["e1_0_dim"] == 6     # every class has a d-closed representative
        assert rep["e2_dim"] == 4
        assert rep["P_restricted_iso"]
        cx = m.complex()
        c1 = zc_spaces(cx, "column", 1, (2, 1))[1]
        quoted = Subspace(cx.dim(2, 1), cx.d1_at(1, 1).scale(sc(0))).sum(c1)
        gens = []
        for I, J in [((1, 3), (1,)), ((1, 3), (2,)), ((2, 3), (1,)), ((2, 3), (2,))]:
            gens.append(m.form_to_vector(2, 1, {(I, J): ONE}))
        quoted = Subspace.span(cx.dim(2, 1), gens).sum(c1)
        assert rep["essential_with_c1"] == quoted

    def test_i5_quoted_classes(self):
        m = model5()
        rep = essential_spaces(m, Metric.orthonormal())
        assert rep["e2_dim"] == 4
        cx = m.complex()
        c1 = zc_spaces(cx, "column", 1, (4, 1))[1]
        gens = []
        for I, J in [((2, 3, 4, 5), (1,)), ((1, 3, 4, 5), (1,)),
                     ((2, 3, 4, 5), (2,)), ((1, 3, 4, 5), (2,))]:
            gens.append(m.form_to_vector(4, 1, {(I, J): ONE}))
        quoted = Subspace.span(cx.dim(4, 1), gens).sum(c1)
        assert rep["essential_with_c1"] == quoted

    def test_i5_discrepancy_visible(self):
        # the essential space and the complex-parallelisable directions have
        # the same dimension on I5 but are different spaces
        m = model5()
        rep = essential_spaces(m, Metric.orthonormal())
        assert rep["parallelisable_directions"]["dimension"] == 4
        assert rep["e2_dim"] == 4

    def test_torus_everything_essential(self):
        m = corpus("torus(2)").meta["model"]
        rep = essential_spaces(m, Metric.orthonormal())
        assert rep["e1_dim"] == rep["e2_dim"] == rep["e1_0_dim"]


class TestRecursion:
    def test_single_direction_terminates(self):
        m = model3()
        tc = tangent_cohomology(m)
        direction = [ZERO] * tc["dimension"]
        direction[tc["basis_keys"].index((1, 0))] = ONE   # theta_1 (x) phibar_1
        series = run_kuranishi(m, Metric.orthonormal(), direction, 5)
        for nu in range(2, 6):
            assert series.psi(nu).is_zero()

    def test_i3_order2_term(self):
        m = model3()
        tc = tangent_cohomology(m)
        direction = [ZERO] * tc["dimension"]
        # t_{12} = t_{21} = 1: theta_1 (x) phibar_2 + theta_2 (x) phibar_1
        direction[tc["basis_keys"].index((1, 1))] = ONE
        direction[tc["basis_keys"].index((2, 0))] = ONE
        series = run_kuranishi(m, Metric.orthonormal(), direction, 3)
        psi2 = series.psi(2)
        assert set(psi2.coeffs) == {(3, (3,))}
        assert series.psi(3).is_zero()

    def test_i5_random_directions_unobstructed(self):
        m = model5()
        tc = tangent_cohomology(m)
        rng = random.Random(11)
        for _ in range(3):
            direction = [sc(Fraction(rng.randint(-2, 2), rng.choice([1, 2, 3])))
                         for _ in range(tc["dimension"])]
            series = run_kuranishi(m, Metric.orthonormal(), direction, 4)
            assert series.order() == 4
            assert series.residual_checked

    def test_determinism(self):
        m = model3()
        tc = tangent_cohomology(m)
        direction = [sc(1)] * tc["dimension"]
        s1 = run_kuranishi(m, Metric.orthonormal(), direction, 3)
        s2 = run_kuranishi(m, Metric.orthonormal(), direction, 3)
        for nu in range(1, 4):
            assert vector_form_to_vector(s1.psi(nu)) == vector_form_to_vector(s2.psi(nu))
