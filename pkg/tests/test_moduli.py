"""Cell enumeration, boundary, homology, and gluing for the X_v complexes."""

import pytest

from outerops.graphs import BoundaryProfile, GraphError
from outerops.moduli import (
    ForestedCell, bonnet_graph, cell_boundary, enumerate_cells, glue_cells,
    identity_cell, small_profiles, xv_complex,
)


def cells_by_dim(v):
    out = {}
    for c in enumerate_cells(v):
        out.setdefault(c.dim, []).append(c)
    return out


class TestEnumeration:
    def test_v110_single_cell(self):
        cells = enumerate_cells(BoundaryProfile.totals(1, 1, 0))
        assert len(cells) == 1
        assert cells[0].dim == 0
        assert cells[0].graph.genus() == 1

    def test_v040_seven_cells(self):
        by_dim = cells_by_dim(BoundaryProfile.totals(0, 4, 0))
        assert {d: len(cs) for d, cs in by_dim.items()} == {0: 4, 1: 3}

    def test_v030_point(self):
        assert len(enumerate_cells(BoundaryProfile.totals(0, 3, 0))) == 1

    def test_degenerate_profiles_empty(self):
        assert enumerate_cells(BoundaryProfile.totals(0, 2, 0)) == []
        assert enumerate_cells(BoundaryProfile.totals(0, 0, 1)) == []

    def test_no_boundary_rejected(self):
        with pytest.raises(GraphError):
            enumerate_cells(BoundaryProfile.totals(2, 0, 0))

    def test_torus_profile(self):
        by_dim = cells_by_dim(BoundaryProfile.totals(0, 2, 1))
        assert {d: len(cs) for d, cs in by_dim.items()} == {0: 2, 1: 1}


class TestBoundary:
    def test_empty_forest_boundary_zero(self):
        cells = enumerate_cells(BoundaryProfile.totals(0, 4, 0))
        for c in cells:
            if c.dim == 0:
                assert cell_boundary(c) == []

    def test_two_face_types(self):
        cells = enumerate_cells(BoundaryProfile.totals(0, 4, 0))
        one = [c for c in cells if c.dim == 1][0]
        terms = cell_boundary(one)
        # collapse face lands on the corolla, removal face on the tree itself
        assert len(terms) == 2
        assert {abs(c) for _, c in terms} == {1}
        shapes = {t.graph.n_vertices for t, _ in terms}
        assert shapes == {5, 6}  # 4-corolla has 5 vertices, two-vertex tree 6

    @pytest.mark.parametrize("gte", [(0, 4, 0), (0, 5, 0), (1, 2, 0), (0, 2, 1),
                                     (1, 0, 1), (0, 1, 2)])
    def test_dd_zero(self, gte):
        cx = xv_complex(BoundaryProfile.totals(*gte))
        assert cx.verify_dd_zero().ok

    def test_face_admissibility_closure(self):
        for gte in [(0, 5, 0), (1, 2, 0), (0, 3, 1)]:
            cx = xv_complex(BoundaryProfile.totals(*gte))
            for d in cx.degrees():
                for cell in cx.basis[d]:
                    for tgt, _ in cell_boundary(cell):
                        assert tgt.dim == cell.dim - 1


class TestHomology:
    @pytest.mark.parametrize("gte,expected", [
        ((0, 3, 0), [(0, 1)]),
        ((0, 4, 0), [(0, 1), (1, 0)]),
        ((1, 1, 0), [(0, 1)]),
        ((0, 1, 1), [(0, 1)]),
    ])
    def test_golden(self, gte, expected):
        assert xv_complex(BoundaryProfile.totals(*gte)).betti() == expected

    def test_euler(self):
        for gte in [(0, 5, 0), (1, 2, 0), (0, 2, 1), (1, 1, 1)]:
            cx = xv_complex(BoundaryProfile.totals(*gte))
            assert cx.euler_characteristic() == cx.euler_from_betti()


class TestProfiles:
    def test_inventory(self):
        profiles = small_profiles(6)
        assert BoundaryProfile.totals(0, 6, 0) in profiles
        assert BoundaryProfile.totals(2, 2, 0) in profiles
        assert BoundaryProfile.totals(0, 1, 1) in profiles
        assert all(p.weight() <= 6 and p.e + p.t >= 1 for p in profiles)


def corolla_cell(e_in, e_out):
    v = BoundaryProfile(0, e_in, e_out, 0, 0)
    cells = enumerate_cells(v)
    zero = [c for c in cells if c.dim == 0 and c.graph.n_vertices == e_in + e_out + 1]
    return zero[0]


class TestGlue:
    def test_corolla_corolla(self):
        a = corolla_cell(2, 1)
        b = corolla_cell(1, 2)
        glued, sign = glue_cells(a, b)
        assert sign in (1, -1)
        assert glued.graph.n_vertices == 2 + 4  # two internal + four leaves
        assert glued.graph.profile() == BoundaryProfile(0, 2, 2, 0, 0)

    def test_identity_unit(self):
        a = corolla_cell(2, 1)
        glued, sign = glue_cells(a, identity_cell())
        assert glued == a and sign == 1

    def test_profile_mismatch(self):
        a = corolla_cell(2, 1)
        with pytest.raises(GraphError):
            glue_cells(a, a)

    def test_genus_bump_on_double_gluing(self):
        a = corolla_cell(2, 2)
        b = corolla_cell(2, 2)
        glued, _ = glue_cells(a, b)
        assert glued.graph.genus() == 1

    def test_derivation(self):
        # d(a.b) = da.b + (-1)^{dim a} a.db over all composable small pairs
        left = enumerate_cells(BoundaryProfile(0, 2, 1, 0, 0))
        right = enumerate_cells(BoundaryProfile(0, 1, 2, 0, 0))
        checked = 0
        for a in left:
            for b in right:
                if a.dim > 2 or b.dim > 2:
                    continue
                checked += 1
                assert _derivation_holds(a, b)
        assert checked > 0

    def test_derivation_multi_edge(self):
        left = enumerate_cells(BoundaryProfile(0, 2, 2, 0, 0))
        right = enumerate_cells(BoundaryProfile(0, 2, 1, 0, 0))
        pairs = [(a, b) for a in left for b in right
                 if a.dim <= 2 and b.dim <= 2]
        assert pairs
        for a, b in pairs:
            assert _derivation_holds(a, b)


def _glue_chain(chain_a, chain_b):
    out = {}
    for a, ca in chain_a.items():
        for b, cb in chain_b.items():
            cell, s = glue_cells(a, b)
            out[cell] = out.get(cell, 0) + ca * cb * s
    return {k: v for k, v in out.items() if v}


def _derivation_holds(a, b):
    lhs = {}
    cell, s = glue_cells(a, b)
    for tgt, coeff in cell_boundary(cell):
        lhs[tgt] = lhs.get(tgt, 0) + s * coeff
    lhs = {k: v for k, v in lhs.items() if v}
    da = {t: c for t, c in cell_boundary(a)}
    db = {t: c for t, c in cell_boundary(b)}
    rhs = _glue_chain(da, {b: 1})
    for tgt, coeff in _glue_chain({a: 1}, db).items():
        rhs[tgt] = rhs.get(tgt, 0) + (-1) ** a.dim * coeff
    rhs = {k: v for k, v in rhs.items() if v}
    return lhs == rhs


class TestBonnets:
    def test_b1(self):
        g = bonnet_graph(1)
        assert g.genus() == 1
        assert len(g.in_labels) == 1
        assert g.profile() == BoundaryProfile(0, 1, 0, 1, 0)

    def test_b0_flagged(self):
        g = bonnet_graph(0)
        assert g.n_vertices == 1
        assert g.special
        # its unique cell has no forest edges, so its boundary vanishes
        cell = ForestedCell(g, ())
        assert cell_boundary(cell) == []

    def test_b3(self):
        g = bonnet_graph(3)
        assert g.genus() == 1
        assert len(g.in_labels) == 3
        u = g.vertex_of[g.edges[g.tin_labels[0]][0]]
        assert g.valence(u) == 5
