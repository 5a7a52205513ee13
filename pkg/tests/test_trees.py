"""Rooted tree enumeration and the Bar complex of Comm."""

import math

import pytest

from outerops.trees import (
    all_trees, bar_complex, contract, degree, internal_edges, leaves, node,
    parse_tree_literal, splits, tree_from_splits, tree_literal,
)


class TestEnumeration:
    def test_counts(self):
        # series-reduced rooted trees with n labelled leaves
        expected = {1: 1, 2: 1, 3: 4, 4: 26, 5: 236}
        for n, count in expected.items():
            assert len(all_trees(frozenset(range(1, n + 1)))) == count

    def test_degrees_n3(self):
        ts = all_trees(frozenset({1, 2, 3}))
        by_deg = {}
        for t in ts:
            by_deg.setdefault(degree(t), []).append(t)
        assert {d: len(v) for d, v in by_deg.items()} == {0: 1, 1: 3}

    def test_leaves(self):
        t = node([1, node([2, 3])])
        assert leaves(t) == frozenset({1, 2, 3})
        assert internal_edges(t) == [frozenset({2, 3})]


class TestContract:
    def test_contract_two_level(self):
        t = node([1, node([2, 3])])
        assert contract(t, frozenset({2, 3})) == node([1, 2, 3])

    def test_contract_missing_edge(self):
        with pytest.raises(ValueError):
            contract(node([1, 2, 3]), frozenset({1, 2}))

    def test_splits_roundtrip(self):
        for t in all_trees(frozenset(range(1, 6))):
            if not isinstance(t, tuple):
                continue
            assert tree_from_splits(leaves(t), splits(t)) == t


class TestLiteral:
    def test_roundtrip(self):
        for t in all_trees(frozenset(range(1, 5))):
            assert parse_tree_literal(tree_literal(t)) == t

    def test_example(self):
        assert tree_literal(node([1, node([3, 2])])) == "(1,(2,3))"


class TestBarComplex:
    def test_arity_guard(self):
        with pytest.raises(ValueError):
            bar_complex(1)

    def test_n2(self):
        c = bar_complex(2)
        assert c.total_dim() == 1
        assert c.betti() == [(0, 1)]

    def test_n3(self):
        c = bar_complex(3)
        assert [c.dim(d) for d in c.degrees()] == [1, 3]
        assert c.betti() == [(0, 0), (1, 2)]

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_homology_is_lie_dual(self, n):
        # dim H = (n-1)!, concentrated in the top degree
        c = bar_complex(n)
        betti = dict(c.betti())
        top = n - 2
        assert betti.get(top, 0) == math.factorial(n - 1)
        assert all(b == 0 for d, b in betti.items() if d != top)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_dd_zero(self, n):
        assert bar_complex(n).verify_dd_zero().ok

    def test_euler(self):
        for n in (3, 4, 5):
            c = bar_complex(n)
            assert c.euler_characteristic() == c.euler_from_betti()
