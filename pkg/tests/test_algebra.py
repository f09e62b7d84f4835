import numpy as np
import pytest

from entlab.algebra import (FieldTower, FiniteGroup, Mat2, coset_representatives,
                            element_order, field_create, field_embed, sl2_enumerate,
                            triple_product_size)
from entlab.errors import BudgetError


class TestFieldTower:
    def test_prime_field(self):
        t = field_create(3, 0)
        assert t.sizes == [3]
        assert [t.add(0, 1, 2), t.mul(0, 2, 2)] == [0, 1]

    def test_rejects_non_prime_and_two(self):
        with pytest.raises(ValueError):
            field_create(9, 1)
        with pytest.raises(ValueError):
            field_create(2, 1)

    def test_first_nonsquare_f3(self):
        # brute-force squaring: squares of F_3 are {0, 1}
        t = field_create(3, 1)
        squares = {t.mul(0, i, i) for i in range(3)}
        assert squares == {0, 1}
        assert t.nonsquares[0] == 2

    def test_first_nonsquare_f5(self):
        t = field_create(5, 1)
        squares = {t.mul(0, i, i) for i in range(5)}
        assert squares == {0, 1, 4}
        assert t.nonsquares[0] == 2

    def test_field_axioms_f9(self):
        t = field_create(3, 1)
        q = 9
        for a in range(q):
            assert t.add(1, a, 0) == a
            assert t.mul(1, a, 1) == a
            if a:
                assert t.mul(1, a, t.inv(1, a)) == 1
        for a in range(q):
            for b in range(q):
                assert t.add(1, a, b) == t.add(1, b, a)
                assert t.mul(1, a, b) == t.mul(1, b, a)
                for c in range(q):
                    assert t.mul(1, t.mul(1, a, b), c) == t.mul(1, a, t.mul(1, b, c))
                    lhs = t.mul(1, a, t.add(1, b, c))
                    rhs = t.add(1, t.mul(1, a, b), t.mul(1, a, c))
                    assert lhs == rhs

    def test_adjoined_root_squares_to_nonsquare(self):
        t = field_create(3, 1)
        root = t.element(1, [0, 1])
        assert (root * root).index == t.nonsquares[0]

    def test_embed_preserves_arithmetic(self):
        t = field_create(3, 2)
        one = t.element(0, 1)
        assert field_embed(one, 1).index == 1
        x = t.element(0, 2)
        assert field_embed(x, 0) == x
        y = field_embed(x, 1)
        assert (y * y).index == 1  # 2*2 = 4 = 1 mod 3
        # homomorphism on sampled pairs, and functoriality along levels
        rng = np.random.default_rng(0)
        for a, b in rng.integers(0, 3, size=(20, 2)).tolist():
            ea, eb = t.element(0, a), t.element(0, b)
            assert field_embed(ea + eb, 2).index == (field_embed(ea, 2) + field_embed(eb, 2)).index
            assert field_embed(ea * eb, 2).index == (field_embed(ea, 2) * field_embed(eb, 2)).index
            via = field_embed(field_embed(ea, 1), 2)
            assert via.index == field_embed(ea, 2).index

    def test_fallback_arithmetic_matches_tables(self):
        # recursion path (tables dropped) must agree with the table path
        t = field_create(3, 1)
        add_tab = t._add_tables.pop(1)
        mul_tab = t._mul_tables.pop(1)
        inv_tab = t._inv_tables.pop(1)
        try:
            for a in range(9):
                for b in range(9):
                    assert t.add(1, a, b) == add_tab[a, b]
                    assert t.mul(1, a, b) == mul_tab[a, b]
                if a:
                    assert t.inv(1, a) == inv_tab[a]
        finally:
            t._add_tables[1] = add_tab
            t._mul_tables[1] = mul_tab
            t._inv_tables[1] = inv_tab


class TestSL2:
    @pytest.mark.parametrize("p,level,expected", [(3, 0, 24), (5, 0, 120), (3, 1, 720)])
    def test_order_formula(self, p, level, expected):
        t = field_create(p, level)
        g = sl2_enumerate(t, level)
        q = t.sizes[level]
        assert g.n == q * (q * q - 1) == expected
        assert q < g.n < q**4

    def test_budget(self):
        t = field_create(3, 2)
        with pytest.raises(BudgetError, match="531360"):
            sl2_enumerate(t, 2, max_order=10**5)

    def test_all_unimodular_and_canonical_order(self, sl2_3):
        keys = []
        for i in range(sl2_3.n):
            m = sl2_3.element(i)
            assert m.det_index() == 1
            keys.append(m.key())
        assert keys == sorted(keys)

    def test_identity_and_inverse(self, sl2_3):
        e = sl2_3.identity
        assert sl2_3.element(e).key() == (1, 0, 0, 1)
        for i in range(sl2_3.n):
            assert sl2_3.mul(i, sl2_3.inv(i)) == e

    def test_element_order(self, sl2_3, sl2_9):
        assert element_order(sl2_3, sl2_3.identity) == 1
        g0 = sl2_3.index_of_matrix((1, 1, 0, 1))
        assert element_order(sl2_3, g0) == 3
        # the order stays the characteristic, not the field size
        g0_big = sl2_9.index_of_matrix((1, 1, 0, 1))
        assert element_order(sl2_9, g0_big) == 3
        t5 = field_create(5, 1)
        g5 = sl2_enumerate(t5, 1)
        assert element_order(g5, g5.index_of_matrix((1, 1, 0, 1))) == 5

    def test_mul_row_matches_scalar(self, sl2_9):
        rng = np.random.default_rng(1)
        js = rng.integers(0, sl2_9.n, size=40)
        for i in rng.integers(0, sl2_9.n, size=5).tolist():
            row = sl2_9.mul_row(i, js)
            assert all(int(r) == sl2_9._mul_idx(i, int(j)) for r, j in zip(row, js))


class TestCosets:
    def test_trivial_cases(self, sl2_3):
        assert coset_representatives(sl2_3, range(sl2_3.n)) == [0]
        reps = coset_representatives(sl2_3, [sl2_3.identity])
        assert reps[0] == sl2_3.identity and len(reps) == sl2_3.n

    def test_sl2_tower_cosets(self, sl2_3, sl2_9):
        emb = [sl2_9.index_of_matrix(sl2_3.element(i).key()) for i in range(sl2_3.n)]
        reps = coset_representatives(sl2_9, emb)
        assert len(reps) == 720 // 24 == 30
        # the cosets H*rep partition the big group
        seen = set()
        for rep in reps:
            coset = {sl2_9.mul(h, rep) for h in emb}
            assert len(coset) == 24
            assert not coset & seen
            seen |= coset
        assert len(seen) == 720

    def test_rejects_non_subgroup(self, sl2_3):
        with pytest.raises(ValueError, match="witness"):
            coset_representatives(sl2_3, [sl2_3.identity, 0])


class TestTripleProducts:
    def test_identity_only(self, sl2_3):
        g = triple_product_size(sl2_3, [sl2_3.identity])
        assert (g.size, g.square, g.cube, g.generates) == (1, 1, 1, False)

    def test_whole_group(self, sl2_3):
        g = triple_product_size(sl2_3, range(sl2_3.n))
        assert (g.size, g.square, g.cube, g.generates) == (24, 24, 24, True)

    def test_nesting_and_monotonicity(self):
        t = field_create(5, 0)
        group = sl2_enumerate(t, 0)
        rng = np.random.default_rng(2)
        g0 = group.index_of_matrix((1, 1, 0, 1))
        for _ in range(10):
            h = int(rng.integers(0, group.n))
            a = sorted({group.identity, g0, group.inv(g0), h})
            res = triple_product_size(group, a)
            # exhaustive product sets computed independently
            prods2 = {group.mul(x, y) for x in a for y in a}
            prods3 = {group.mul(x, y) for x in prods2 for y in a}
            assert res.square == len(prods2) and res.cube == len(prods3)
            assert set(a) <= prods2 <= prods3  # e in A gives the chain
            assert res.cube >= res.size
            bigger = sorted(set(a) | {int(rng.integers(0, group.n))})
            assert triple_product_size(group, bigger).cube >= res.cube


class TestStockGroups:
    def test_cyclic(self):
        g = FiniteGroup.cyclic(6)
        assert g.identity == 0 and g.mul(4, 5) == 3 and g.inv(2) == 4
        assert g.order_of(2) == 3

    def test_product(self):
        g = FiniteGroup.direct_product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(3))
        assert g.n == 6
        assert g.element(g.identity) == (0, 0)
        assert g.order_of(g.mul(g.identity, 4)) == g.order_of(4)

    def test_closure_is_subgroup(self, sl2_3):
        rng = np.random.default_rng(3)
        for _ in range(5):
            seed = rng.integers(0, sl2_3.n, size=2).tolist()
            closure = sl2_3.subgroup_closure(seed)
            sl2_3.check_subgroup(closure)
            assert sl2_3.n % len(closure) == 0  # Lagrange
