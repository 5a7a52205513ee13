"""Generalized Cobar complexes, grafting, the cell isomorphism, bonnets."""

import pytest

from outerops.graphs import BoundaryProfile, GraphError
from outerops.gencobar import (
    UNIT, LabelledGraph, bonnet_decompose, bonnet_degree, bonnet_element,
    cobar_bar_complex, forest_cobar_iso, gen_cobar_basis, generalized_cobar,
    graft, lg_boundary, lg_glue, unit_element, vertex_label_options,
)
from outerops.moduli import xv_complex


class TestLabels:
    def test_options_by_valence(self):
        # 3 legs: corolla only; 4 legs: corolla + three one-split trees
        assert len(vertex_label_options((0, 1, 2))) == 1
        opts4 = vertex_label_options((0, 1, 2, 3))
        assert len(opts4) == 4
        assert sum(1 for o in opts4 if len(o) == 1) == 3

    def test_cohabit_filter(self):
        opts = vertex_label_options((0, 1, 2, 3), cohabit=(0, 1))
        # the split {0,1}|{2,3} keeps the pair together; the two others break it
        assert len(opts) == 2


class TestCobarBar:
    def test_arity_guard(self):
        with pytest.raises(ValueError):
            cobar_bar_complex(1)

    @pytest.mark.parametrize("n,dims", [
        (2, {0: 1}),
        (3, {0: 4, 1: 3}),
        (4, {0: 26, 1: 40, 2: 15}),
    ])
    def test_dims(self, n, dims):
        c = cobar_bar_complex(n)
        assert {d: c.dim(d) for d in c.degrees()} == dims

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_resolution(self, n):
        betti = dict(cobar_bar_complex(n).betti())
        assert betti[0] == 1
        assert all(b == 0 for d, b in betti.items() if d > 0)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_dd_zero(self, n):
        assert cobar_bar_complex(n).verify_dd_zero().ok


class TestIso:
    @pytest.mark.parametrize("gte", [
        (0, 4, 0), (0, 5, 0), (1, 1, 0), (1, 2, 0), (0, 1, 1), (0, 2, 1),
        (1, 0, 1), (0, 0, 2),
    ])
    def test_profiles(self, gte):
        v = BoundaryProfile.totals(*gte)
        report = forest_cobar_iso(v)
        assert report.ok, report.mismatches

    def test_betti_match(self):
        v = BoundaryProfile.totals(0, 1, 1)
        assert generalized_cobar(v).betti() == xv_complex(v).betti()


def corolla_element(e_in, e_out=1):
    v = BoundaryProfile(0, e_in, e_out, 0, 0)
    for elem in gen_cobar_basis(v):
        if elem.graph.n_vertices == e_in + e_out + 1 and elem.degree == 0:
            return elem
    raise AssertionError("corolla not found")


class TestGraft:
    def test_unit_law(self):
        x = corolla_element(2)
        out, sign = graft(x, [UNIT, UNIT])
        assert out == x and sign == 1
        y, sign2 = graft(unit_element(), [x])
        assert y == x and sign2 == 1

    def test_two_corollas_into_corolla(self):
        two = corolla_element(2)
        out, _ = graft(two, [two, two])
        assert len(out.graph.in_labels) == 4
        assert out.graph.n_vertices == 3 + 5  # three internal, five leaves
        assert out.degree == 0

    def test_arity_mismatch(self):
        with pytest.raises(GraphError):
            graft(corolla_element(2), [UNIT])

    def test_associativity_with_signs(self):
        # gamma(gamma(x; y1, y2); z...) == gamma(x; gamma(y1; z1), gamma(y2; z2))
        deg1 = [e for e in gen_cobar_basis(BoundaryProfile(0, 3, 1, 0, 0))
                if e.degree == 1]
        x = corolla_element(2)
        for y1 in deg1[:3]:
            for y2 in [corolla_element(2)] + deg1[:1]:
                mid, s1 = graft(x, [y1, y2])
                z = [UNIT] * 3 + [corolla_element(2)] + [UNIT] * (len(y2.graph.in_labels) - 1)
                lhs, s2 = graft(mid, z[: len(mid.graph.in_labels)])
                rhs_y2, t1 = graft(y2, [corolla_element(2)] + [UNIT] * (len(y2.graph.in_labels) - 1))
                rhs, t2 = graft(x, [y1, rhs_y2])
                assert lhs == rhs
                assert s1 * s2 == t1 * t2

    def test_leibniz_for_glue(self):
        # d(a.b) = da.b + (-1)^{deg a} a.db including signs
        left = [e for e in gen_cobar_basis(BoundaryProfile(0, 3, 1, 0, 0))
                if e.degree <= 1]
        right = [e for e in gen_cobar_basis(BoundaryProfile(0, 1, 3, 0, 0))
                 if e.degree <= 1]
        assert any(e.degree == 1 for e in left)
        assert any(e.degree == 1 for e in right)
        for a in left:
            for b in right:
                assert _leibniz_holds(a, b)

    def test_leibniz_with_torus_passthrough(self):
        left = gen_cobar_basis(BoundaryProfile(0, 2, 2, 0, 0))
        right = gen_cobar_basis(BoundaryProfile.totals(0, 2, 1))
        assert any(a.degree == 1 for a in left)
        assert any(b.degree == 1 for b in right)
        for a in left:
            for b in right:
                assert _leibniz_holds(a, b)


def _glue_chain(chain_a, chain_b):
    out = {}
    for a, ca in chain_a.items():
        for b, cb in chain_b.items():
            elem, s = lg_glue(a, b)
            out[elem] = out.get(elem, 0) + ca * cb * s
    return {k: v for k, v in out.items() if v}


def _leibniz_holds(a, b):
    elem, s = lg_glue(a, b)
    lhs = {}
    for tgt, coeff in lg_boundary(elem):
        lhs[tgt] = lhs.get(tgt, 0) + s * coeff
    lhs = {k: v for k, v in lhs.items() if v}
    da = dict(lg_boundary(a))
    db = dict(lg_boundary(b))
    rhs = _glue_chain(da, {b: 1})
    for tgt, coeff in _glue_chain({a: 1}, db).items():
        rhs[tgt] = rhs.get(tgt, 0) + (-1) ** a.degree * coeff
    rhs = {k: v for k, v in rhs.items() if v}
    return lhs == rhs


class TestBonnets:
    def test_bonnet_element_degrees(self):
        b2 = bonnet_element(2)
        assert bonnet_degree(b2) == 2
        with_label = [e for e in gen_cobar_basis(BoundaryProfile.totals(0, 2, 1))
                      if e.degree == 1]
        assert len(with_label) == 1
        assert bonnet_degree(with_label[0]) == 3

    def test_decompose_reconstructs(self):
        for k in (1, 2, 3):
            for elem in gen_cobar_basis(BoundaryProfile.totals(0, k, 1)):
                open_part, core, sign = bonnet_decompose(elem)
                glued, s = lg_glue(open_part, core)
                assert glued == elem
                assert s == sign

    def test_unique_normal_form(self):
        # distinct elements decompose to distinct (open, core) pairs
        seen = {}
        for elem in gen_cobar_basis(BoundaryProfile.totals(0, 3, 1)):
            open_part, core, _ = bonnet_decompose(elem)
            key = (open_part, core)
            assert key not in seen
            seen[key] = elem

    def test_filtration_strictly_decreases(self):
        # on pure bonnets, every boundary term has lower bonnet degree
        checked = 0
        for k in (1, 2, 3, 4):
            for elem in gen_cobar_basis(BoundaryProfile.totals(0, k, 1)):
                if elem.graph.n_vertices != len(elem.graph.in_labels) + 1:
                    continue  # not a pure bonnet graph
                n0 = bonnet_degree(elem)
                for tgt, _ in lg_boundary(elem):
                    checked += 1
                    assert bonnet_degree(tgt) < n0
        assert checked > 0
