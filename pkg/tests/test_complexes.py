import random

import pytest

from bicomplex.scalars import sc, ONE, ZERO
from bicomplex.linalg import Matrix
from bicomplex.complexes import (
    DoubleComplex, ElementaryShape, elementary, direct_sum, tensor,
    single_complex, shift, dual, conjugate, transpose, blowup_model,
    ValidationError, MalformedShape,
)


def sq(p=0, q=0):
    return elementary(ElementaryShape("square", (p, q)))


def dot(p=0, q=0):
    return elementary(ElementaryShape("dot", (p, q)))


def zz(kind, length, p=0, q=0):
    return elementary(ElementaryShape(kind, (p, q), length))


def random_elementary_sum(rng, max_summands=6, box=4):
    kinds = ["square", "dot", "even_type1", "even_type2", "odd_M", "odd_L"]
    parts = []
    for _ in range(rng.randint(1, max_summands)):
        kind = rng.choice(kinds)
        p, q = rng.randint(0, box), rng.randint(0, box)
        if kind in ("square", "dot"):
            length = 4 if kind == "square" else 1
        elif kind.startswith("even"):
            length = 2 * rng.randint(1, 3)
        else:
            length = 2 * rng.randint(1, 3) + 1
        parts.append(elementary(ElementaryShape(kind, (p, q), length)))
    return direct_sum(*parts)


class TestElementary:
    def test_dot(self):
        cx = dot(1, 1)
        assert cx.dims == {(1, 1): 1}
        assert cx.validate() == []

    def test_square(self):
        cx = sq(0, 0)
        assert sorted(cx.dims) == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert cx.validate() == []

    def test_even_type1_len2(self):
        cx = zz("even_type1", 2)
        assert sorted(cx.dims) == [(0, 0), (1, 0)]
        assert cx.d1_at(0, 0) == Matrix([[ONE]])

    def test_odd_L_len3(self):
        cx = zz("odd_L", 3)
        assert sorted(cx.dims) == [(0, 0), (0, 1), (1, 0)]
        assert cx.d1_at(0, 0) == Matrix([[ONE]])
        assert cx.d2_at(0, 0) == Matrix([[ONE]])

    def test_all_shapes_validate(self):
        for kind, length in [("square", 4), ("dot", 1), ("even_type1", 6),
                             ("even_type2", 4), ("odd_M", 5), ("odd_L", 7)]:
            cx = elementary(ElementaryShape(kind, (2, 3), length))
            assert cx.validate() == []
            assert cx.total_dim() == length

    def test_malformed(self):
        with pytest.raises(MalformedShape):
            ElementaryShape("odd_M", (0, 0), 4)
        with pytest.raises(MalformedShape):
            ElementaryShape("even_type1", (0, 0), 3)
        with pytest.raises(MalformedShape):
            ElementaryShape("blob", (0, 0), 1)

    def test_flipped_sign_is_invalid(self):
        cx = sq(0, 0)
        bad = DoubleComplex(cx.dims, dict(cx.d1), dict(cx.d2))
        bad.d1[(0, 1)] = Matrix([[ONE]])  # break anticommutation
        msgs = bad.validate()
        assert any("d1.d2 + d2.d1" in m and "(0,0)" in m for m in msgs)


class TestCombinators:
    def test_direct_sum_dims(self):
        cx = direct_sum(dot(0, 0), dot(1, 1))
        assert cx.dims == {(0, 0): 1, (1, 1): 1}

    def test_direct_sum_validates(self):
        rng = random.Random(0)
        for _ in range(15):
            cx = random_elementary_sum(rng)
            assert cx.validate() == []

    def test_tensor_of_two_segments_is_square(self):
        k_row = single_complex({0: 1, 1: 1}, {0: Matrix([[ONE]])}, "row")
        k_col = single_complex({0: 1, 1: 1}, {0: Matrix([[ONE]])}, "col")
        cx = tensor(k_row, k_col)
        assert cx.validate() == []
        assert cx.dims == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
        # one nonzero composite path through (1,1): it is a square
        comp = cx.d2_at(1, 0) * cx.d1_at(0, 0)
        assert not comp.is_zero()

    def test_tensor_dims_convolve(self):
        rng = random.Random(1)
        a = random_elementary_sum(rng, 3, 2)
        b = random_elementary_sum(rng, 3, 2)
        c = tensor(a, b)
        assert c.validate() == []
        for bd, d in c.dims.items():
            total = 0
            for abd, ad in a.dims.items():
                bbd = (bd[0] - abd[0], bd[1] - abd[1])
                total += ad * b.dims.get(bbd, 0)
            assert d == total

    def test_shift(self):
        assert shift(dot(0, 0), 2).dims == {(2, 2): 1}
        cx = shift(sq(0, 0), -1)
        assert cx.validate() == []
        assert (-1, -1) in cx.dims

    def test_dual(self):
        cx = sq(0, 0)
        cx.n = 2
        d = dual(cx)
        assert d.validate() == []
        assert sorted(d.dims) == [(1, 1), (1, 2), (2, 1), (2, 2)]
        dd = dual(d)
        assert dd.dims == cx.dims
        with pytest.raises(ValidationError):
            dual(sq(0, 0))

    def test_conjugate_involution(self):
        cx = zz("even_type1", 4, 1, 2)
        cc = conjugate(conjugate(cx))
        assert cc.dims == cx.dims
        for bd in cx.d1:
            assert cc.d1_at(*bd) == cx.d1_at(*bd)
        assert conjugate(cx).validate() == []

    def test_transpose(self):
        cx = zz("even_type2", 4, 1, 2)
        t = transpose(cx)
        assert t.validate() == []
        assert t.dims == {(q, p): d for (p, q), d in cx.dims.items()}

    def test_blowup_expansion(self):
        out = blowup_model(dot(0, 0), dot(0, 0), 3)
        assert out.dims == {(0, 0): 1, (1, 1): 1, (2, 2): 1}
        with pytest.raises(ValidationError):
            blowup_model(dot(0, 0), dot(0, 0), 1)

    def test_combinator_outputs_validate(self):
        rng = random.Random(2)
        for _ in range(10):
            a = random_elementary_sum(rng, 4, 3)
            b = random_elementary_sum(rng, 4, 3)
            assert direct_sum(a, b).validate() == []
            assert tensor(a, b).validate() == []
            assert shift(a, rng.randint(-2, 2)).validate() == []
            a.n = 5
            assert dual(a).validate() == []


class TestJson:
    def test_roundtrip(self):
        rng = random.Random(3)
        for _ in range(10):
            cx = random_elementary_sum(rng)
            cx.n = 4
            back = DoubleComplex.loads(cx.dumps())
            assert back.dims == cx.dims
            assert back.n == cx.n
            for bd in cx.dims:
                assert back.d1_at(*bd) == cx.d1_at(*bd)
                assert back.d2_at(*bd) == cx.d2_at(*bd)
            assert back.dumps() == cx.dumps()

    def test_absent_map_is_zero(self):
        cx = DoubleComplex.loads('{"dims": {"0,0": 2, "1,0": 1}}')
        assert cx.d1_at(0, 0).is_zero()
        assert cx.validate() == []
