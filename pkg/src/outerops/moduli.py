"""Forested-graph cube complexes computing the rational homology of X_v.

Cells are pairs [G, F] of a boundary-labelled graph of profile
v = (g, e, t) and an admissible forest, of dimension |E(F)|.  The
boundary operator has two face types per forest edge: collapsing the
edge in both graph and forest, and removing it from the forest; both
carry the orientation sign of deleting the edge from the ordering.
Cells whose stabilizer permutes the forest edges oddly are zero over Q
and never enter the basis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .chain import GradedChainComplex
from .graphs import (
    BoundaryProfile, Graph, GraphError, admissible_forests, automorphism_group,
    build_graph, canonicalize, collapse_edge, edge_map, edge_permutation,
    graph_literal, permutation_parity, reorder_sign,
)
from .linalg import SparseMatrix
from .trees import all_trees, is_leaf, leaves


# -- graph enumeration -------------------------------------------------------

def _tree_to_graph(tree, e_in, e_out):
    """Convert a rooted tree over legs 1..e-1 (root = leg 0) to a Graph."""
    pairing = {}
    vertex_of = {}
    half_counter = itertools.count()
    vertex_counter = itertools.count()
    leg_half = {}

    def new_half():
        return next(half_counter)

    def walk(t, up_half):
        v = next(vertex_counter)
        down = new_half()
        pairing[up_half] = down
        pairing[down] = up_half
        vertex_of[down] = ("node", v)
        for c in t:
            h = new_half()
            vertex_of[h] = ("node", v)
            if is_leaf(c):
                leg_half[c] = h
            else:
                walk(c, h)

    root_leg = new_half()
    vertex_of[root_leg] = ("leaf", 0)
    walk(tree, root_leg)
    leg_half[0] = root_leg
    # attach leaf vertices for legs 1..e-1
    for leg in sorted(leg_half):
        if leg == 0:
            continue
        h = new_half()
        vertex_of[h] = ("leaf", leg)
        pairing[h] = leg_half[leg]
        pairing[leg_half[leg]] = h
        leg_half[leg] = h  # remember the leaf half for labelling

    n = len(vertex_of)
    pair_list = [pairing[h] for h in range(n)]
    vnames = {}
    vof = []
    for h in range(n):
        v = vertex_of[h]
        vnames.setdefault(v, len(vnames))
        vof.append(vnames[v])
    g = Graph(pair_list, vof)
    # find edge of each leg and distribute in/out labels: legs 0..e_in-1
    # are incoming, the rest outgoing
    def leg_edge(leg):
        h = root_leg if leg == 0 else leg_half[leg]
        return g.edge_index(h)

    e = e_in + e_out
    in_edges = tuple(leg_edge(i) for i in range(e_in))
    out_edges = tuple(leg_edge(i) for i in range(e_in, e))
    return build_graph(pair_list, vof, in_edges, out_edges)


def _interval_graph(e_in, e_out):
    pairing = [1, 0]
    vof = [0, 1]
    if e_in == 1 and e_out == 0:
        return build_graph(pairing, vof, in_labels=(0,))
    if e_in == 0 and e_out == 1:
        return build_graph(pairing, vof, out_labels=(0,))
    # identity interval: the single edge carries both labels
    return build_graph(pairing, vof, in_labels=(0,), out_labels=(0,))


def _genus_zero_graphs(v):
    e = v.e
    if e == 1:
        return [canonicalize(_interval_graph(v.e_in, v.e_out))[0]]
    graphs = []
    for t in all_trees(frozenset(range(1, e))):
        if is_leaf(t):
            continue
        graphs.append(canonicalize(_tree_to_graph(t, v.e_in, v.e_out))[0])
    return graphs


def _matchings(slots):
    """Perfect matchings of index list `slots` as lists of index pairs."""
    if not slots:
        yield []
        return
    first = slots[0]
    for i in range(1, len(slots)):
        rest = slots[1:i] + slots[i + 1:]
        for m in _matchings(rest):
            yield [(first, slots[i])] + m


def _compositions(total, parts, minimum):
    """All tuples of `parts` integers >= minimum summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(minimum[0], total + 1):
        for rest in _compositions(total - first, parts - 1, minimum[1:]):
            yield (first,) + rest


def _positive_genus_graphs(v):
    gamma = v.g + v.t
    e = v.e
    found = {}
    for e_int in range(gamma, 3 * (gamma - 1) + e + 1):
        v_int = 1 - gamma + e_int
        if v_int < 1:
            continue
        for batt in itertools.product(range(v_int), repeat=e):
            bcount = [batt.count(j) for j in range(v_int)]
            mins = [max(0, 3 - b) for b in bcount]
            if sum(mins) > 2 * e_int:
                continue
            for dseq in _compositions(2 * e_int, v_int, mins):
                slots = []
                for j, d in enumerate(dseq):
                    slots.extend([j] * d)
                for match in _matchings(list(range(len(slots)))):
                    g = _assemble(v, batt, slots, match)
                    if g is None:
                        continue
                    for marked in _mark_tori(g, v):
                        canon, _ = canonicalize(marked)
                        found[canon.key()] = canon
    return sorted(found.values(), key=graph_literal)


def _assemble(v, batt, slots, match):
    """Build the unmarked graph; None if disconnected."""
    e = v.e
    # halves 0..2e-1: boundary edge i is (2i at internal vertex, 2i+1 at leaf)
    n = 2 * e + len(slots)
    pairing = [0] * n
    vof = [0] * n
    for i in range(e):
        pairing[2 * i] = 2 * i + 1
        pairing[2 * i + 1] = 2 * i
        vof[2 * i] = batt[i]
        vof[2 * i + 1] = ("leaf", i)  # unique leaf vertex per boundary edge
    for k, vtx in enumerate(slots):
        vof[2 * e + k] = vtx
    for a, b in match:
        pairing[2 * e + a] = 2 * e + b
        pairing[2 * e + b] = 2 * e + a
    try:
        g = build_graph(pairing, vof,
                        in_labels=tuple(g_edge(pairing, 2 * i) for i in range(v.e_in)),
                        out_labels=tuple(g_edge(pairing, 2 * i) for i in range(v.e_in, e)))
    except GraphError:
        return None
    if not g.is_connected():
        return None
    return g


def g_edge(pairing, half):
    """Edge index of `half` in the edge list sorted by smaller half."""
    pairs = sorted((h, p) for h, p in enumerate(pairing) if h < p)
    a, b = min(half, pairing[half]), max(half, pairing[half])
    return pairs.index((a, b))


def _mark_tori(g, v):
    """All ways to mark t distinct loops (distinct vertices) with torus labels."""
    t = v.t
    if t == 0:
        yield g
        return
    loops = [e for e in range(len(g.edges)) if g.is_loop(e)]
    for combo in itertools.permutations(loops, t):
        vertices = [g.vertex_of[g.edges[e][0]] for e in combo]
        if len(set(vertices)) < t:
            continue
        tin = tuple(combo[: v.t_in])
        tout = tuple(combo[v.t_in:])
        try:
            yield build_graph(g.pairing, g.vertex_of, g.in_labels, g.out_labels,
                              tin, tout)
        except GraphError:
            continue


_profile_cache = {}


def profile_graphs(v):
    """Canonical representatives of all graphs of profile v, deduplicated."""
    if v.e + v.t == 0:
        raise GraphError("profile has no boundary; the moduli space is empty")
    if v not in _profile_cache:
        if v.g + v.t == 0:
            _profile_cache[v] = _genus_zero_graphs(v)
        else:
            _profile_cache[v] = _positive_genus_graphs(v)
    return list(_profile_cache[v])


# -- cells -------------------------------------------------------------------

@dataclass(frozen=True)
class ForestedCell:
    """A cube [G, F]: canonical graph, orbit-minimal forest, sorted edges."""

    graph: Graph
    forest: tuple

    @property
    def dim(self):
        return len(self.forest)

    def literal(self):
        return f"{graph_literal(self.graph)} | F={list(self.forest)} | dim={self.dim}"

    def __repr__(self):
        return self.literal()


def forest_orbit(g, forest):
    """Minimal representative of the forest under Aut(g), with witnesses."""
    best = None
    witnesses = []
    for aut in automorphism_group(g):
        perm = edge_permutation(g, aut)
        image = tuple(sorted(perm[e] for e in forest))
        if best is None or image < best:
            best = image
            witnesses = [perm]
        elif image == best:
            witnesses.append(perm)
    return best, witnesses


def forest_stabilizer_odd(g, forest):
    """True when some automorphism fixes the forest setwise with odd parity."""
    fs = frozenset(forest)
    order = sorted(fs)
    pos = {e: i for i, e in enumerate(order)}
    for aut in automorphism_group(g):
        perm = edge_permutation(g, aut)
        if frozenset(perm[e] for e in fs) != fs:
            continue
        parity = permutation_parity([pos[perm[e]] for e in order])
        if parity == -1:
            return True
    return False


def enumerate_cells(v):
    """All surviving cells [G, F] of profile v, sorted by (dim, literal)."""
    cells = {}
    for g in profile_graphs(v):
        for forest in admissible_forests(g):
            rep, _ = forest_orbit(g, forest)
            key = (g.key(), rep)
            if key in cells:
                continue
            if forest_stabilizer_odd(g, rep):
                cells[key] = None
            else:
                cells[key] = ForestedCell(g, rep)
    out = [c for c in cells.values() if c is not None]
    out.sort(key=lambda c: (c.dim, c.literal()))
    return out


def _cell_term(g, ordering):
    """Normalize (canonical graph, transported edge ordering) to a signed cell.

    Returns (cell, sign) or None when the target is a zero cell.
    """
    rep, witnesses = forest_orbit(g, frozenset(ordering))
    if forest_stabilizer_odd(g, rep):
        return None
    perm = witnesses[0]
    transported = [perm[e] for e in ordering]
    sign = reorder_sign(transported, list(rep))
    return ForestedCell(g, rep), sign


def cell_boundary(cell):
    """Signed boundary chain: collapse-edge and remove-edge faces."""
    g = cell.graph
    order = list(cell.forest)
    terms = {}

    def add(term, coeff):
        if term is None:
            return
        tgt, s = term
        terms[tgt] = terms.get(tgt, 0) + coeff * s

    for i, e in enumerate(order):
        sign0 = (-1) ** i
        rest = [f for f in order if f != e]
        # remove the edge from the forest
        add(_cell_term(g, rest), sign0)
        # collapse the edge in graph and forest
        h, emap = collapse_edge(g, e)
        hc, halfmap = canonicalize(h)
        emap2 = edge_map(h, hc, halfmap)
        add(_cell_term(hc, [emap2[emap[f]] for f in rest]), sign0)

    return sorted(((c, v) for c, v in terms.items() if v != 0),
                  key=lambda t: t[0].literal())


def xv_complex(v):
    """The cube complex of X_v as a graded chain complex over Q."""
    cells = enumerate_cells(v)
    basis = {}
    for c in cells:
        basis.setdefault(c.dim, []).append(c)
    index = {d: {c: i for i, c in enumerate(cs)} for d, cs in basis.items()}
    diffs = {}
    for d, cs in basis.items():
        if d == 0:
            continue
        entries = {}
        for col, c in enumerate(cs):
            for tgt, coeff in cell_boundary(c):
                row = index[d - 1][tgt]
                entries[(row, col)] = entries.get((row, col), 0) + coeff
        diffs[d] = SparseMatrix(len(basis.get(d - 1, ())), len(cs), entries)
    return GradedChainComplex(basis, diffs)


# -- gluing ------------------------------------------------------------------

def glue_cells(a, b):
    """Compose cells along matching boundary: out(a) glued to in(b).

    Returns (cell, sign): the glued cell with the orientation carried by
    concatenating a's forest ordering with b's.  Torus boundaries must
    not participate (the cellular composition is the open one).
    """
    ga, gb = a.graph, b.graph
    pa, pb = ga.profile(), gb.profile()
    if pa.e_out != pb.e_in or pa.t_out != pb.t_in:
        raise GraphError(f"profiles do not compose: out {pa} vs in {pb}")
    if pa.t_out != 0:
        raise GraphError("torus gluing is not part of the open composition")

    off = ga.n
    pairing = list(ga.pairing) + [h + off for h in gb.pairing]
    vof = list(ga.vertex_of) + [v + ga.n_vertices for v in gb.vertex_of]
    dead = set()
    for k in range(pa.e_out):
        ea = ga.edges[ga.out_labels[k]]
        eb = gb.edges[gb.in_labels[k]]
        # keep the half at an internal vertex when there is one
        ka, da = ea
        if ga.valence(ga.vertex_of[ka]) == 1 and ga.valence(ga.vertex_of[da]) > 1:
            ka, da = da, ka
        kb, db = eb
        if gb.valence(gb.vertex_of[kb]) == 1 and gb.valence(gb.vertex_of[db]) > 1:
            kb, db = db, kb
        kb, db = kb + off, db + off
        pairing[ka] = kb
        pairing[kb] = ka
        dead.update((da, db))

    keep = [h for h in range(len(pairing)) if h not in dead]
    newidx = {h: i for i, h in enumerate(keep)}
    pairing2 = [newidx[pairing[h]] for h in keep]
    vof2 = [vof[h] for h in keep]

    def new_edge(old_graph, offset, e):
        h1, h2 = old_graph.edges[e]
        h1, h2 = h1 + offset, h2 + offset
        if h1 in dead:
            h1 = pairing[h2] if h2 not in dead else None
        if h2 in dead:
            h2 = pairing[h1]
        n1, n2 = newidx[h1], newidx[h2]
        return (min(n1, n2), max(n1, n2))

    raw = Graph(pairing2, vof2)
    def eidx(pair):
        return raw._eidx[pair]

    glued = build_graph(
        pairing2, vof2,
        in_labels=tuple(eidx(new_edge(ga, 0, e)) for e in ga.in_labels),
        out_labels=tuple(eidx(new_edge(gb, off, e)) for e in gb.out_labels),
        tin_labels=tuple(eidx(new_edge(ga, 0, e)) for e in ga.tin_labels)
        + tuple(eidx(new_edge(gb, off, e)) for e in gb.tin_labels),
        tout_labels=tuple(eidx(new_edge(ga, 0, e)) for e in ga.tout_labels)
        + tuple(eidx(new_edge(gb, off, e)) for e in gb.tout_labels),
    )
    ordering = [eidx(new_edge(ga, 0, e)) for e in a.forest] + \
               [eidx(new_edge(gb, off, e)) for e in b.forest]
    canon, halfmap = canonicalize(glued)
    emap = edge_map(glued, canon, halfmap)
    result = _cell_term(canon, [emap[e] for e in ordering])
    if result is None:
        raise GraphError("glued cell vanishes by the antisymmetry relation")
    return result


def identity_cell():
    """The degenerate interval cell acting as a unit for one glued edge."""
    return ForestedCell(canonicalize(_interval_graph(1, 1))[0], ())


# -- bonnets -----------------------------------------------------------------

def bonnet_graph(n):
    """The bonnet B(n): one vertex with a marked loop and n boundary edges.

    B(0) is the bare marked loop, flagged as a permitted valence-2 vertex.
    """
    if n < 0:
        raise GraphError("bonnet size must be nonnegative")
    pairing = [1, 0]
    vof = [0, 0]
    for i in range(n):
        a, b = 2 + 2 * i, 3 + 2 * i
        pairing.extend([b, a])
        vof.extend([0, 1 + i])
    g = Graph(pairing, vof)
    stems = tuple(g.edge_index(2 + 2 * i) for i in range(n))
    loop = g.edge_index(0)
    special = frozenset({0}) if n == 0 else frozenset()
    return build_graph(pairing, vof, in_labels=stems, tin_labels=(loop,),
                       special=special)


# -- profile inventory -------------------------------------------------------

def small_profiles(max_weight=6):
    """All admissible profiles (g,e,t), all-incoming, with e+2g+2t <= max_weight."""
    out = []
    for g in range(max_weight // 2 + 1):
        for t in range(max_weight // 2 + 1):
            for e in range(max_weight + 1):
                if e + t == 0:
                    continue
                p = BoundaryProfile.totals(g, e, t)
                if p.weight() <= max_weight:
                    out.append(p)
    return sorted(out, key=lambda p: (p.weight(), p.g, p.t, p.e))
