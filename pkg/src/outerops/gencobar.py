"""The generalized Cobar complex of Bar(Comm) on profile graphs.

A basis element is a boundary-labelled graph of profile v with each
vertex labelled by a Bar(Comm) element on its half-edge legs, i.e. by
a tree with those legs.  Labels are stored as split sets: an internal
edge of a label tree is recorded as the set of legs on its far side
(normalized to the side not containing the smallest leg).  The
flattened homological degree is the total number of label edges.

The differential is the sum of the Bar part, which contracts a label
edge, and the Cobar part, which cuts a label tree at an edge and
expands the vertex into two vertices joined by a new graph edge.  At a
vertex carrying a marked torus loop, admissible labels keep the two
loop legs on one label vertex; cuts preserve this, so the marked loop
never degenerates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chain import GradedChainComplex
from .graphs import (
    Graph, GraphError, automorphism_group, build_graph, canonicalize,
    edge_map, graph_literal, permutation_parity, reorder_sign,
)
from .linalg import SparseMatrix
from .moduli import ForestedCell, profile_graphs
from .trees import all_trees, internal_edges, is_leaf, tree_from_splits


def normalize_split(legs, side):
    """Store the side of a leg bipartition not containing the smallest leg."""
    side = frozenset(side)
    if min(legs) in side:
        side = frozenset(legs) - side
    return side


def vertex_label_options(legs, cohabit=None):
    """All Bar(Comm) labels on a leg set, as split sets.

    `cohabit` is an optional pair of legs that no split may separate
    (the two halves of a marked torus loop).
    """
    legs = frozenset(legs)
    if len(legs) <= 1:
        return [frozenset()]
    root = min(legs)
    options = []
    for t in all_trees(legs - {root}):
        spl = frozenset() if is_leaf(t) else frozenset(internal_edges(t))
        if cohabit is not None:
            a, b = cohabit
            if any(len(s & {a, b}) == 1 for s in spl):
                continue
        options.append(spl)
    return sorted(set(options), key=_splits_key)


def _splits_key(splits):
    return tuple(sorted(tuple(sorted(s)) for s in splits))


@dataclass(frozen=True)
class LabelledGraph:
    """Canonical graph plus per-vertex label splits; orbit-minimal."""

    graph: Graph
    labels: tuple  # labels[v] = frozenset of splits (frozensets of legs)

    @property
    def degree(self):
        return sum(len(s) for s in self.labels)

    def label_edges(self):
        """Global canonical ordering of label edges as (vertex, split) pairs."""
        out = []
        for v, spl in enumerate(self.labels):
            for s in sorted(spl, key=lambda s: tuple(sorted(s))):
                out.append((v, s))
        return out

    def literal(self):
        labels = "; ".join(
            f"v{v}:" + ("corolla" if not spl else
                        "|".join(",".join(map(str, sorted(s)))
                                 for s in sorted(spl, key=lambda s: tuple(sorted(s)))))
            for v, spl in enumerate(self.labels) if len(self.graph.vertices[v]) > 1
        )
        return f"{graph_literal(self.graph)} | L[{labels}]"

    def __repr__(self):
        return self.literal()


def _vertex_image(g, aut, v):
    return g.vertex_of[aut[g.vertices[v][0]]]


def _transport_labels(g, aut, labels):
    out = [frozenset()] * g.n_vertices
    for v, spl in enumerate(labels):
        w = _vertex_image(g, aut, v)
        legs_w = g.vertices[w]
        out[w] = frozenset(
            normalize_split(legs_w, frozenset(aut[h] for h in s)) for s in spl
        )
    return tuple(out)


def _edge_image(g, aut, edge):
    v, s = edge
    w = _vertex_image(g, aut, v)
    return (w, normalize_split(g.vertices[w], frozenset(aut[h] for h in s)))


def lg_term(g, labels, tracked=None):
    """Orbit-minimal labelled graph with transported sign, or None if zero.

    `g` must be canonical; `labels` lives on g's vertices; `tracked` is
    the ordered list of (vertex, split) label edges carrying the
    orientation (None when the caller does not need the sign).
    Returns (LabelledGraph, sign).
    """
    labels = tuple(frozenset(s) for s in labels)
    best = None
    witnesses = []
    for aut in automorphism_group(g):
        cand = _transport_labels(g, aut, labels)
        enc = tuple(_splits_key(s) for s in cand)
        if best is None or enc < best[0]:
            best = (enc, cand)
            witnesses = [aut]
        elif enc == best[0]:
            witnesses.append(aut)
    enc, cand = best
    elem = LabelledGraph(g, cand)
    order = elem.label_edges()
    pos = {e: i for i, e in enumerate(order)}
    # stabilizer parity: automorphisms fixing the minimal labels
    for aut in automorphism_group(g):
        if _transport_labels(g, aut, cand) != cand:
            continue
        parity = permutation_parity([pos[_edge_image(g, aut, e)] for e in order])
        if parity == -1:
            return None
    if tracked is None:
        return elem, 1
    sigma = witnesses[0]
    transported = [_edge_image(g, sigma, e) for e in tracked]
    sign = reorder_sign(transported, order)
    return elem, sign


def gen_cobar_basis(v):
    """All surviving Bar(Comm)-labelled graphs of profile v, by degree."""
    found = {}
    for g in profile_graphs(v):
        marked = {}
        for e in g.tin_labels + g.tout_labels:
            a, b = g.edges[e]
            marked[g.vertex_of[a]] = (a, b)
        per_vertex = []
        for w in range(g.n_vertices):
            per_vertex.append(
                vertex_label_options(g.vertices[w], cohabit=marked.get(w))
            )
        stack = [()]
        for opts in per_vertex:
            stack = [s + (o,) for s in stack for o in opts]
        for labels in stack:
            term = lg_term(g, labels)
            if term is None:
                continue
            elem, _ = term
            found[(elem.graph.key(), tuple(_splits_key(s) for s in elem.labels))] = elem
    out = list(found.values())
    out.sort(key=lambda e: (e.degree, e.literal()))
    return out


def _cut(g, labels, v, split):
    """Expand vertex v along a label split; returns (graph, labels, edge map).

    The new graph gains half-edges h1 (kept at v) and h2 (on the new
    vertex, which takes the legs of `split`); label edges map across
    the cut.  `edge map` sends each surviving (vertex, split) of the
    input to its image.
    """
    n = g.n
    h1, h2 = n, n + 1
    pairing = list(g.pairing) + [h2, h1]
    new_vertex = g.n_vertices
    vof = list(g.vertex_of) + [g.vertex_of[g.vertices[v][0]], new_vertex]
    vof[h1] = vof[g.vertices[v][0]]
    for h in split:
        vof[h] = new_vertex
    vof[h2] = new_vertex

    legs_v = (frozenset(g.vertices[v]) - split) | {h1}
    legs_new = split | {h2}
    new_labels = [set() for _ in range(new_vertex + 1)]
    emap = {}
    for w, spl in enumerate(labels):
        for s in spl:
            if w != v:
                new_labels[w].add(s)
                emap[(w, s)] = (w, s)
            elif s == split:
                continue
            elif s < split:
                ns = normalize_split(legs_new, s)
                new_labels[new_vertex].add(ns)
                emap[(w, s)] = (new_vertex, ns)
            elif split < s:
                ns = normalize_split(legs_v, (s - split) | {h1})
                new_labels[v].add(ns)
                emap[(w, s)] = (v, ns)
            else:
                ns = normalize_split(legs_v, s)
                new_labels[v].add(ns)
                emap[(w, s)] = (v, ns)

    # boundary and torus labels keep their edge indices: the new edge's
    # smaller half is n, beyond every existing half, so it sorts last
    out = build_graph(pairing, vof, g.in_labels, g.out_labels,
                      g.tin_labels, g.tout_labels, g.special)

    # the built graph renumbers vertices by smallest half-edge; remap
    def out_vertex(w):
        if w == new_vertex:
            return out.vertex_of[h2]
        if w == v:
            return out.vertex_of[h1]
        return out.vertex_of[g.vertices[w][0]]

    final_labels = [frozenset()] * out.n_vertices
    for w, spl in enumerate(new_labels):
        if spl:
            final_labels[out_vertex(w)] = frozenset(spl)
    final_emap = {src: (out_vertex(w), s) for src, (w, s) in emap.items()}
    return out, tuple(final_labels), final_emap


def lg_boundary(elem):
    """Signed boundary chain of a labelled graph: Bar contraction + Cobar cut."""
    g = elem.graph
    order = elem.label_edges()
    terms = {}

    def add(term, coeff):
        if term is None:
            return
        tgt, s = term
        terms[tgt] = terms.get(tgt, 0) + coeff * s

    for i, (v, split) in enumerate(order):
        sign0 = (-1) ** i
        rest = [e for e in order if e != (v, split)]
        # Bar part: contract the label edge
        labels2 = list(elem.labels)
        labels2[v] = labels2[v] - {split}
        add(lg_term(g, labels2, rest), sign0)
        # Cobar part: cut the label and expand the vertex
        cut_g, cut_labels, emap = _cut(g, elem.labels, v, split)
        canon, halfmap = canonicalize(cut_g)
        aut_like = halfmap  # half-edge map cut_g -> canon
        labels3 = [frozenset()] * canon.n_vertices
        for w, spl in enumerate(cut_labels):
            if not spl:
                continue
            wn = canon.vertex_of[aut_like[cut_g.vertices[w][0]]]
            labels3[wn] = frozenset(
                normalize_split(canon.vertices[wn],
                                frozenset(aut_like[h] for h in s))
                for s in spl
            )
        tracked = []
        for e in rest:
            w, s = emap[e]
            wn = canon.vertex_of[aut_like[cut_g.vertices[w][0]]]
            tracked.append(
                (wn, normalize_split(canon.vertices[wn],
                                     frozenset(aut_like[h] for h in s)))
            )
        add(lg_term(canon, labels3, tracked), sign0)

    return sorted(((t, c) for t, c in terms.items() if c != 0),
                  key=lambda t: t[0].literal())


def generalized_cobar(v):
    """G_v(Bar(Comm)) as a graded chain complex with the flattened degree."""
    basis = {}
    for elem in gen_cobar_basis(v):
        basis.setdefault(elem.degree, []).append(elem)
    index = {d: {e: i for i, e in enumerate(es)} for d, es in basis.items()}
    diffs = {}
    for d, es in basis.items():
        if d == 0:
            continue
        entries = {}
        for col, e in enumerate(es):
            for tgt, coeff in lg_boundary(e):
                row = index[d - 1][tgt]
                entries[(row, col)] = entries.get((row, col), 0) + coeff
        diffs[d] = SparseMatrix(len(basis.get(d - 1, ())), len(es), entries)
    return GradedChainComplex(basis, diffs)


# -- the explicit isomorphism with the forested-cell complex -----------------

def forest_to_cobar(cell):
    """Blow down a forested cell to a labelled graph, with orientation sign.

    Collapsing the forest yields the graph; each forest component
    becomes the label tree of the merged vertex, its edges turning into
    label splits.  Returns (LabelledGraph, sign) or None when the image
    vanishes (which cannot happen for cells surviving enumeration).
    """
    g = cell.graph
    forest = list(cell.forest)
    fset = set(forest)
    # components of the forest
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in forest:
        a, b = g.edges[e]
        ra, rb = find(g.vertex_of[a]), find(g.vertex_of[b])
        parent[ra] = rb

    keep = [h for h in range(g.n) if g.edge_index(h) not in fset]
    newidx = {h: i for i, h in enumerate(keep)}
    pairing = [newidx[g.pairing[h]] for h in keep]
    vof = [find(g.vertex_of[h]) for h in keep]

    def blown_edge(e):
        a, b = g.edges[e]
        na, nb = newidx[a], newidx[b]
        return (min(na, nb), max(na, nb))

    raw = Graph(pairing, vof)
    collapsed = build_graph(
        pairing, vof,
        tuple(raw._eidx[blown_edge(e)] for e in g.in_labels),
        tuple(raw._eidx[blown_edge(e)] for e in g.out_labels),
        tuple(raw._eidx[blown_edge(e)] for e in g.tin_labels),
        tuple(raw._eidx[blown_edge(e)] for e in g.tout_labels),
    )

    # label split of each forest edge: legs on one side of the component cut
    def split_of(e):
        a, b = g.edges[e]
        comp = find(g.vertex_of[a])
        # vertices of the component, connected without crossing e
        side = {g.vertex_of[a]}
        grew = True
        while grew:
            grew = False
            for f in forest:
                if f == e:
                    continue
                x, y = (g.vertex_of[h] for h in g.edges[f])
                if (x in side) != (y in side):
                    side.update((x, y))
                    grew = True
        vtx = collapsed.vertex_of[newidx[next(
            h for h in keep if find(g.vertex_of[h]) == comp
        )]]
        legs = collapsed.vertices[vtx]
        side_legs = frozenset(
            newidx[h] for h in keep
            if g.vertex_of[h] in side and find(g.vertex_of[h]) == comp
        )
        return vtx, normalize_split(legs, side_legs)

    labels = [set() for _ in range(collapsed.n_vertices)]
    tracked = []
    for e in forest:
        vtx, s = split_of(e)
        labels[vtx].add(s)
        tracked.append((vtx, s))

    canon, halfmap = canonicalize(collapsed)
    labels2 = [frozenset()] * canon.n_vertices
    for w, spl in enumerate(labels):
        if not spl:
            continue
        wn = canon.vertex_of[halfmap[collapsed.vertices[w][0]]]
        labels2[wn] = frozenset(
            normalize_split(canon.vertices[wn], frozenset(halfmap[h] for h in s))
            for s in spl
        )
    tracked2 = [
        (canon.vertex_of[halfmap[collapsed.vertices[w][0]]],
         normalize_split(canon.vertices[canon.vertex_of[halfmap[collapsed.vertices[w][0]]]],
                         frozenset(halfmap[h] for h in s)))
        for w, s in tracked
    ]
    return lg_term(canon, labels2, tracked2)


@dataclass
class IsoReport:
    """Outcome of the foresttocobar verification for one profile."""

    profile: object
    ok: bool
    degree_counts: dict
    mismatches: list

    def __bool__(self):
        return self.ok


def forest_cobar_iso(v, xv=None, gc=None):
    """Verify the explicit degreewise bijection [G,F] <-> labelled graph.

    Checks that the blow-down map is a basis bijection in every degree
    and that it intertwines the two differentials, signs included.
    """
    from .moduli import cell_boundary, xv_complex

    xv = xv if xv is not None else xv_complex(v)
    gc = gc if gc is not None else generalized_cobar(v)
    mismatches = []
    phi = {}
    for d in xv.degrees():
        for cell in xv.basis[d]:
            term = forest_to_cobar(cell)
            if term is None:
                mismatches.append(("vanishing image", cell.literal()))
                continue
            phi[cell] = term

    for d in sorted(set(xv.degrees()) | set(gc.degrees())):
        cells = xv.basis.get(d, [])
        lgs = set(gc.basis.get(d, []))
        images = {phi[c][0] for c in cells if c in phi}
        if len(images) != len(cells) or images != lgs:
            mismatches.append(("degree mismatch", d, len(cells), len(lgs)))

    for cell, (lg, eps) in sorted(phi.items(), key=lambda kv: kv[0].literal()):
        lhs = {}
        for tgt, coeff in cell_boundary(cell):
            img, s = phi[tgt]
            lhs[img] = lhs.get(img, 0) + coeff * s
        rhs = {}
        for tgt, coeff in lg_boundary(lg):
            rhs[tgt] = rhs.get(tgt, 0) + eps * coeff
        lhs = {k: v for k, v in lhs.items() if v != 0}
        rhs = {k: v for k, v in rhs.items() if v != 0}
        if lhs != rhs:
            mismatches.append(("differential mismatch", cell.literal()))

    counts = {d: (len(xv.basis.get(d, [])), len(gc.basis.get(d, [])))
              for d in sorted(set(xv.degrees()) | set(gc.degrees()))}
    return IsoReport(profile=v, ok=not mismatches, degree_counts=counts,
                     mismatches=mismatches)


# -- operadic view: Cobar(Bar(Comm)) ----------------------------------------

def cobar_bar_profile(n):
    from .graphs import BoundaryProfile

    return BoundaryProfile(0, n, 1, 0, 0)


def cobar_bar_complex(n):
    """Cobar(Bar(Comm))(n) with the flattened grading.

    Realized as the generalized Cobar complex on trees with n incoming
    and one outgoing boundary edge.
    """
    if n < 2:
        raise ValueError("cobar_bar_complex needs arity n >= 2")
    return generalized_cobar(cobar_bar_profile(n))


UNIT = "unit"  # arity-1 identity for grafting


def disjoint_union(elems):
    """Disjoint union of labelled graphs; boundary labels concatenate."""
    pairing = []
    vof = []
    labels = []
    in_edges = []
    out_edges = []
    tin_edges = []
    tout_edges = []
    tracked = []
    half_off = 0
    vert_off = 0
    parts = []
    for elem in elems:
        g = elem.graph
        pairing.extend(h + half_off for h in g.pairing)
        vof.extend(v + vert_off for v in g.vertex_of)
        parts.append((g, half_off))
        half_off += g.n
        vert_off += g.n_vertices
    raw = Graph(pairing, vof)

    def emap(g, off, e):
        a, b = g.edges[e]
        return raw._eidx[(a + off, b + off)]

    for (g, off), elem in zip(parts, elems):
        in_edges.extend(emap(g, off, e) for e in g.in_labels)
        out_edges.extend(emap(g, off, e) for e in g.out_labels)
        tin_edges.extend(emap(g, off, e) for e in g.tin_labels)
        tout_edges.extend(emap(g, off, e) for e in g.tout_labels)
    union = build_graph(pairing, vof, tuple(in_edges), tuple(out_edges),
                        tuple(tin_edges), tuple(tout_edges))
    labels = [frozenset()] * union.n_vertices
    for (g, off), elem in zip(parts, elems):
        for v, spl in enumerate(elem.labels):
            if not spl:
                continue
            vn = union.vertex_of[g.vertices[v][0] + off]
            labels[vn] = frozenset(
                normalize_split(union.vertices[vn],
                                frozenset(h + off for h in s))
                for s in spl
            )
        for v, s in elem.label_edges():
            vn = union.vertex_of[g.vertices[v][0] + off]
            tracked.append((vn, normalize_split(union.vertices[vn],
                                                frozenset(h + off for h in s))))
    return union, tuple(labels), tracked


def lg_glue(a, b):
    """Glue the sphere out-boundary of a to the sphere in-boundary of b.

    Returns (element, sign); the orientation concatenates a's label
    edges before b's.  Torus boundary never participates in the open
    composition: a must have no outgoing tori, while tori of b pass
    through to the result untouched (the bimodule action on the torus
    sector).
    """
    ga, gb = a.graph, b.graph
    if len(ga.out_labels) != len(gb.in_labels):
        raise GraphError("outs of the left factor must match ins of the right")
    if ga.tout_labels:
        raise GraphError("torus gluing is not part of the open composition")
    union, labels, tracked = disjoint_union([a, b])
    # out labels of a occupy the first len(a.out) out slots; ins of b follow a's
    na_in = len(ga.in_labels)
    glue_pairs = list(zip(union.out_labels[: len(ga.out_labels)],
                          union.in_labels[na_in:]))
    dead = set()
    pairing = list(union.pairing)
    for ea, eb in glue_pairs:
        ka, da = union.edges[ea]
        if union.valence(union.vertex_of[ka]) == 1 and union.valence(union.vertex_of[da]) > 1:
            ka, da = da, ka
        kb, db = union.edges[eb]
        if union.valence(union.vertex_of[kb]) == 1 and union.valence(union.vertex_of[db]) > 1:
            kb, db = db, kb
        pairing[ka] = kb
        pairing[kb] = ka
        dead.update((da, db))
    keep = [h for h in range(union.n) if h not in dead]
    newidx = {h: i for i, h in enumerate(keep)}
    pairing2 = [newidx[pairing[h]] for h in keep]
    vof2 = [union.vertex_of[h] for h in keep]
    raw = Graph(pairing2, vof2)

    glued_edge_ids = {union.edges[ea] for ea, eb in glue_pairs}
    glued_edge_ids |= {union.edges[eb] for ea, eb in glue_pairs}

    def surviving_edge(e):
        h1, h2 = union.edges[e]
        if h1 in dead and h2 in dead:
            raise GraphError("edge consumed twice in gluing")
        if h1 in dead:
            h1 = pairing[h2]
        if h2 in dead:
            h2 = pairing[h1]
        n1, n2 = newidx[h1], newidx[h2]
        return raw._eidx[(min(n1, n2), max(n1, n2))]

    glued = build_graph(
        pairing2, vof2,
        tuple(surviving_edge(e) for e in union.in_labels[:na_in]),
        tuple(surviving_edge(e) for e in union.out_labels[len(ga.out_labels):]),
        tuple(surviving_edge(e) for e in union.tin_labels),
        tuple(surviving_edge(e) for e in union.tout_labels),
    )
    labels2 = [frozenset()] * glued.n_vertices
    for v, spl in enumerate(labels):
        if not spl:
            continue
        h0 = next(h for h in union.vertices[v] if h not in dead)
        vn = glued.vertex_of[newidx[h0]]
        labels2[vn] = frozenset(
            normalize_split(glued.vertices[vn],
                            frozenset(newidx[h] for h in s))
            for s in spl
        )
    tracked2 = []
    for v, s in tracked:
        h0 = next(h for h in union.vertices[v] if h not in dead)
        vn = glued.vertex_of[newidx[h0]]
        tracked2.append((vn, normalize_split(glued.vertices[vn],
                                             frozenset(newidx[h] for h in s))))
    canon, halfmap = canonicalize(glued)
    labels3 = [frozenset()] * canon.n_vertices
    for v, spl in enumerate(labels2):
        if not spl:
            continue
        vn = canon.vertex_of[halfmap[glued.vertices[v][0]]]
        labels3[vn] = frozenset(
            normalize_split(canon.vertices[vn], frozenset(halfmap[h] for h in s))
            for s in spl
        )
    tracked3 = [
        (canon.vertex_of[halfmap[glued.vertices[v][0]]],
         normalize_split(canon.vertices[canon.vertex_of[halfmap[glued.vertices[v][0]]]],
                         frozenset(halfmap[h] for h in s)))
        for v, s in tracked2
    ]
    term = lg_term(canon, labels3, tracked3)
    if term is None:
        raise GraphError("glued element vanishes by the antisymmetry relation")
    return term


def unit_element():
    """The arity-1 identity: the interval with one in and one out label."""
    from .moduli import _interval_graph

    g, _ = canonicalize(_interval_graph(1, 1))
    return LabelledGraph(g, (frozenset(), frozenset()))


# -- bonnets ------------------------------------------------------------------

def bonnet_element(n, splits=frozenset()):
    """The labelled bonnet: B(n) with the given label at the loop vertex.

    Splits refer to the bonnet graph's legs: loop halves 0 and 1, stem
    halves 2, 4, ..., 2n at the loop vertex.
    """
    from .moduli import bonnet_graph

    g = bonnet_graph(n)
    canon, halfmap = canonicalize(g)
    u = canon.vertex_of[halfmap[0]]
    labels = [frozenset()] * canon.n_vertices
    labels[u] = frozenset(
        normalize_split(canon.vertices[u], frozenset(halfmap[h] for h in s))
        for s in splits
    )
    term = lg_term(canon, labels)
    if term is None:
        raise GraphError("bonnet label vanishes by antisymmetry")
    return term[0]


def bonnet_vertex(elem):
    """The vertex carrying the unique marked torus loop."""
    g = elem.graph
    marks = g.tin_labels + g.tout_labels
    if len(marks) != 1:
        raise GraphError("bonnet operations need exactly one boundary torus")
    a, _ = g.edges[marks[0]]
    return g.vertex_of[a]


def bonnet_degree(elem):
    """Filtration degree: stem count plus label degree of the bonnet core."""
    g = elem.graph
    u = bonnet_vertex(elem)
    stems = len(g.vertices[u]) - 2
    return stems + len(elem.labels[u])


def bonnet_decompose(elem):
    """Split an element of G_(0,k,1) as (open part, bonnet core, sign).

    The open part keeps the incoming boundary and acquires one outgoing
    stub per bonnet stem; the core is the labelled bonnet B(n).  The
    element reassembles as lg_glue(open, core) up to the returned sign;
    this realizes the free generation of the torus sector by bonnets.
    """
    from .moduli import bonnet_graph

    g = elem.graph
    if g.out_labels or g.tout_labels or len(g.tin_labels) != 1:
        raise GraphError("bonnet_decompose expects an all-incoming (0,k,1) element")
    u = bonnet_vertex(elem)
    loop_edge = g.tin_labels[0]
    la, lb = g.edges[loop_edge]
    stems = [h for h in g.vertices[u] if h not in (la, lb)]
    stems.sort()
    n = len(stems)

    # core: bonnet graph with the label of u transported onto its legs
    core_graph = bonnet_graph(n)
    leg_map = {la: 0, lb: 1}
    for i, s in enumerate(stems):
        leg_map[s] = 2 + 2 * i
    core_canon, core_halfmap = canonicalize(core_graph)
    cu = core_canon.vertex_of[core_halfmap[0]]
    core_labels = [frozenset()] * core_canon.n_vertices
    core_tracked = []
    u_splits = sorted(elem.labels[u], key=lambda s: tuple(sorted(s)))
    core_labels[cu] = frozenset(
        normalize_split(core_canon.vertices[cu],
                        frozenset(core_halfmap[leg_map[h]] for h in s))
        for s in u_splits
    )
    for s in u_splits:
        core_tracked.append(
            (cu, normalize_split(core_canon.vertices[cu],
                                 frozenset(core_halfmap[leg_map[h]] for h in s)))
        )
    core_term = lg_term(core_canon, core_labels, core_tracked)
    if core_term is None:
        raise GraphError("bonnet core vanishes by antisymmetry")
    core, core_sign = core_term

    # open part: delete the loop and replace u by fresh leaves on each stem
    keep = [h for h in range(g.n) if h not in (la, lb)]
    newidx = {h: i for i, h in enumerate(keep)}
    pairing = [newidx[g.pairing[h]] for h in keep]
    vof = []
    for h in keep:
        if h in stems:
            vof.append(("stub", h))
        else:
            vof.append(g.vertex_of[h])
    raw = Graph(pairing, vof)

    def open_edge(e):
        x, y = g.edges[e]
        return raw._eidx[(min(newidx[x], newidx[y]), max(newidx[x], newidx[y]))]

    open_graph = build_graph(
        pairing, vof,
        in_labels=tuple(open_edge(e) for e in g.in_labels),
        out_labels=tuple(open_edge(g.edge_index(s)) for s in stems),
    )
    open_labels = [frozenset()] * open_graph.n_vertices
    open_tracked = []
    for w, spl in enumerate(elem.labels):
        if w == u or not spl:
            continue
        h0 = g.vertices[w][0]
        wn = open_graph.vertex_of[newidx[h0]]
        open_labels[wn] = frozenset(
            normalize_split(open_graph.vertices[wn],
                            frozenset(newidx[h] for h in s))
            for s in spl
        )
    for w, s in elem.label_edges():
        if w == u:
            continue
        h0 = g.vertices[w][0]
        wn = open_graph.vertex_of[newidx[h0]]
        open_tracked.append(
            (wn, normalize_split(open_graph.vertices[wn],
                                 frozenset(newidx[h] for h in s)))
        )
    canon, halfmap = canonicalize(open_graph)
    labels2 = [frozenset()] * canon.n_vertices
    for w, spl in enumerate(open_labels):
        if not spl:
            continue
        wn = canon.vertex_of[halfmap[open_graph.vertices[w][0]]]
        labels2[wn] = frozenset(
            normalize_split(canon.vertices[wn], frozenset(halfmap[h] for h in s))
            for s in spl
        )
    tracked2 = [
        (canon.vertex_of[halfmap[open_graph.vertices[w][0]]],
         normalize_split(canon.vertices[canon.vertex_of[halfmap[open_graph.vertices[w][0]]]],
                         frozenset(halfmap[h] for h in s)))
        for w, s in open_tracked
    ]
    open_term = lg_term(canon, labels2, tracked2)
    if open_term is None:
        raise GraphError("open part vanishes by antisymmetry")
    open_elem, open_sign = open_term

    # elem's canonical ordering vs (open edges, core edges): the glue
    # convention concatenates the left factor's edges first
    concat = [e for e in elem.label_edges() if e[0] != u] + \
             [e for e in elem.label_edges() if e[0] == u]
    base_sign = reorder_sign(concat, elem.label_edges())
    return open_elem, core, base_sign * open_sign * core_sign


def graft(outer, inputs):
    """Operadic composition: root of input i grafted to leaf i of outer.

    `outer` has arity k = number of in labels; each input is a labelled
    tree with one out label.  Inputs equal to UNIT leave their slot
    untouched.  The orientation concatenates input label edges in slot
    order, then the outer element's.  Returns (element, sign).
    """
    k = len(outer.graph.in_labels)
    if len(inputs) != k:
        raise GraphError(f"graft expects {k} inputs, got {len(inputs)}")
    resolved = [unit_element() if x == UNIT else x for x in inputs]
    for x in resolved:
        if len(x.graph.out_labels) != 1:
            raise GraphError("graft inputs must have exactly one outgoing edge")
    # glue the union of inputs (outs in slot order) onto the outer element
    union, labels, tracked = disjoint_union(resolved)
    return lg_glue_with_tracked(LabelledGraph(union, tuple(labels)), tracked, outer)


def lg_glue_with_tracked(a, a_tracked, b):
    """lg_glue for a possibly non-canonical left factor with explicit tracking."""
    canon, halfmap = canonicalize(a.graph)
    labels = [frozenset()] * canon.n_vertices
    for v, spl in enumerate(a.labels):
        if not spl:
            continue
        vn = canon.vertex_of[halfmap[a.graph.vertices[v][0]]]
        labels[vn] = frozenset(
            normalize_split(canon.vertices[vn], frozenset(halfmap[h] for h in s))
            for s in spl
        )
    tracked = [
        (canon.vertex_of[halfmap[a.graph.vertices[v][0]]],
         normalize_split(canon.vertices[canon.vertex_of[halfmap[a.graph.vertices[v][0]]]],
                         frozenset(halfmap[h] for h in s)))
        for v, s in a_tracked
    ]
    base = lg_term(canon, labels, tracked)
    if base is None:
        raise GraphError("left factor vanishes")
    elem, sign = base
    glued, s2 = lg_glue(elem, b)
    return glued, sign * s2
