"""Half-edge graphs with boundary labels, collapse, and canonical forms.

A graph is a finite set of half-edges partitioned in two ways: into
edges (unordered pairs under a fixed-point-free involution) and into
vertices.  Boundary edges are those meeting a valence-1 vertex and
carry in/out labels; single-edge loops can be marked as boundary tori
(balloons), with the loop's vertex as base vertex.  Vertices have
valence 1 or >= 3 unless explicitly flagged (trivial bonnet B(0)).
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryProfile:
    """Profile v = (g, e, t): genus plus labelled sphere/torus boundary counts."""

    g: int
    e_in: int
    e_out: int
    t_in: int
    t_out: int

    def __post_init__(self):
        if min(self.g, self.e_in, self.e_out, self.t_in, self.t_out) < 0:
            raise GraphError("profile counts must be nonnegative")

    @classmethod
    def totals(cls, g, e, t):
        """All-incoming profile with e sphere and t torus boundaries."""
        return cls(g, e, 0, t, 0)

    @property
    def e(self):
        return self.e_in + self.e_out

    @property
    def t(self):
        return self.t_in + self.t_out

    def weight(self):
        return self.e + 2 * self.g + 2 * self.t

    def __str__(self):
        return f"({self.g},{self.e},{self.t})"


class Graph:
    """Immutable half-edge graph.

    half-edges are 0..n-1; `pairing` is the edge involution; `vertex_of`
    sends a half-edge to its vertex id.  Vertex ids are normalized so
    that vertices are numbered in order of their smallest half-edge.
    Labels (`in_labels`, `out_labels`, `tin_labels`, `tout_labels`) are
    tuples of edge indices into `edges`.
    """

    __slots__ = (
        "n", "pairing", "vertex_of", "n_vertices", "vertices", "edges",
        "in_labels", "out_labels", "tin_labels", "tout_labels", "special",
        "_key", "_hash", "_eidx",
    )

    def __init__(self, pairing, vertex_of, in_labels=(), out_labels=(),
                 tin_labels=(), tout_labels=(), special=frozenset()):
        n = len(pairing)
        pairing = tuple(pairing)
        raw_vertex_of = tuple(vertex_of)
        if len(raw_vertex_of) != n:
            raise GraphError("pairing and vertex partition cover different sets")

        # normalize vertex numbering by smallest half-edge
        blocks = {}
        for h, v in enumerate(raw_vertex_of):
            blocks.setdefault(v, []).append(h)
        order = sorted(blocks, key=lambda v: blocks[v][0])
        renum = {v: i for i, v in enumerate(order)}
        self.n = n
        self.pairing = pairing
        self.vertex_of = tuple(renum[v] for v in raw_vertex_of)
        self.n_vertices = len(order)
        self.vertices = tuple(tuple(blocks[v]) for v in order)
        self.edges = tuple(
            sorted((h, pairing[h]) for h in range(n) if h < pairing[h])
        )
        self._eidx = {e: i for i, e in enumerate(self.edges)}
        self.in_labels = tuple(in_labels)
        self.out_labels = tuple(out_labels)
        self.tin_labels = tuple(tin_labels)
        self.tout_labels = tuple(tout_labels)
        # special is given in normalized vertex ids; build_graph() remaps raw ids
        self.special = frozenset(special)
        self._key = (
            self.n, self.pairing, self.vertex_of, self.in_labels,
            self.out_labels, self.tin_labels, self.tout_labels,
            tuple(sorted(self.special)),
        )
        self._hash = hash(self._key)

    # -- identity ----------------------------------------------------------
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, Graph) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return graph_literal(self)

    # -- basic structure ----------------------------------------------------
    def edge_index(self, half):
        """Index into `edges` of the edge containing this half-edge."""
        a, b = min(half, self.pairing[half]), max(half, self.pairing[half])
        return self._eidx[(a, b)]

    def valence(self, v):
        return len(self.vertices[v])

    def is_loop(self, e):
        a, b = self.edges[e]
        return self.vertex_of[a] == self.vertex_of[b]

    def boundary_edges(self):
        """Edges meeting a valence-1 vertex."""
        out = []
        for i, (a, b) in enumerate(self.edges):
            if self.valence(self.vertex_of[a]) == 1 or self.valence(self.vertex_of[b]) == 1:
                out.append(i)
        return out

    def internal_edges(self):
        bd = set(self.boundary_edges())
        return [i for i in range(len(self.edges)) if i not in bd]

    def n_components(self):
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            ra, rb = find(self.vertex_of[a]), find(self.vertex_of[b])
            if ra != rb:
                parent[ra] = rb
        return len({find(v) for v in range(self.n_vertices)})

    def is_connected(self):
        return self.n_vertices == 0 or self.n_components() == 1

    def genus(self):
        """Rank of H_1 of the realization: |E| - |V| + #components."""
        return len(self.edges) - self.n_vertices + self.n_components()

    def torus_base_vertices(self):
        """Base vertex of each marked torus loop, in label order (tin then tout)."""
        bases = []
        for e in self.tin_labels + self.tout_labels:
            a, _ = self.edges[e]
            bases.append(self.vertex_of[a])
        return bases

    def profile(self):
        """BoundaryProfile of this graph (genus excludes marked torus loops)."""
        t_in, t_out = len(self.tin_labels), len(self.tout_labels)
        return BoundaryProfile(
            self.genus() - t_in - t_out,
            len(self.in_labels), len(self.out_labels), t_in, t_out,
        )


def build_graph(pairing, vertex_of, in_labels=(), out_labels=(),
                tin_labels=(), tout_labels=(), special=frozenset()):
    """Construct and validate a Graph; raises GraphError on bad data."""
    n = len(pairing)
    for h in range(n):
        p = pairing[h]
        if not 0 <= p < n or p == h:
            raise GraphError(f"pairing has a fixed point or escapes range at {h}")
        if pairing[p] != h:
            raise GraphError(f"pairing is not an involution at {h}")
    if len(vertex_of) != n:
        raise GraphError("vertex partition does not cover the half-edge set")
    g = Graph(pairing, vertex_of, in_labels, out_labels, tin_labels, tout_labels)
    # remap special vertex ids through the normalization
    if special:
        blocks = {}
        for h, v in enumerate(vertex_of):
            blocks.setdefault(v, []).append(h)
        norm_special = frozenset(g.vertex_of[blocks[v][0]] for v in special)
        g = Graph(pairing, vertex_of, in_labels, out_labels, tin_labels,
                  tout_labels, norm_special)

    for v in range(g.n_vertices):
        val = g.valence(v)
        if val == 2 and v in g.special:
            continue
        if val != 1 and val < 3:
            raise GraphError(
                f"vertex {v} has valence {val}; must be 1 or >= 3 (or flagged)"
            )

    bd = set(g.boundary_edges())
    sphere = list(g.in_labels) + list(g.out_labels)
    for e in sphere:
        if not 0 <= e < len(g.edges) or e not in bd:
            raise GraphError(f"label on edge {e} which is not a boundary edge")
    # in/out may share an edge only for the degenerate identity interval
    overlap = set(g.in_labels) & set(g.out_labels)
    for e in overlap:
        a, b = g.edges[e]
        if not (g.valence(g.vertex_of[a]) == 1 and g.valence(g.vertex_of[b]) == 1):
            raise GraphError("in/out labels overlap on a non-interval edge")
    if len(set(g.in_labels)) != len(g.in_labels) or len(set(g.out_labels)) != len(g.out_labels):
        raise GraphError("duplicate boundary labels")

    marks = list(g.tin_labels) + list(g.tout_labels)
    if len(set(marks)) != len(marks):
        raise GraphError("duplicate torus marks")
    for e in marks:
        if not 0 <= e < len(g.edges) or not g.is_loop(e):
            raise GraphError(f"torus mark {e} is not a single-edge cycle")
        if e in bd or e in sphere:
            raise GraphError(f"torus mark {e} collides with boundary labels")
    return g


# -- relabelling and canonical form ---------------------------------------

def relabel(g, mapping):
    """Relabel half-edges by `mapping` (old -> new); returns a new Graph."""
    n = g.n
    pairing = [0] * n
    vertex_of = [0] * n
    for h in range(n):
        pairing[mapping[h]] = mapping[g.pairing[h]]
        vertex_of[mapping[h]] = g.vertex_of[h]
    new_edges = sorted((h, pairing[h]) for h in range(n) if h < pairing[h])
    eidx = {e: i for i, e in enumerate(new_edges)}

    def emap(e):
        a, b = g.edges[e]
        na, nb = mapping[a], mapping[b]
        return eidx[(min(na, nb), max(na, nb))]

    # vertex ids in the new graph follow smallest-new-half normalization,
    # so map the special set through a representative half-edge
    special_new = set()
    for v in special_vertices(g):
        h = g.vertices[v][0]
        special_new.add(mapping[h])
    out = Graph(
        pairing, vertex_of,
        tuple(emap(e) for e in g.in_labels),
        tuple(emap(e) for e in g.out_labels),
        tuple(emap(e) for e in g.tin_labels),
        tuple(emap(e) for e in g.tout_labels),
    )
    if special_new:
        sp = frozenset(out.vertex_of[h] for h in special_new)
        out = Graph(pairing, vertex_of, out.in_labels, out.out_labels,
                    out.tin_labels, out.tout_labels, sp)
    return out


def special_vertices(g):
    return g.special


def _initial_colors(g):
    roles = {}
    for i, e in enumerate(g.in_labels):
        roles[e] = (0, i)
    for i, e in enumerate(g.out_labels):
        roles.setdefault(e, (1, i))
        if e in g.in_labels:
            # identity interval: fold both labels into the role
            roles[e] = (5, g.in_labels.index(e), i)
    for i, e in enumerate(g.tin_labels):
        roles[e] = (2, i)
    for i, e in enumerate(g.tout_labels):
        roles[e] = (3, i)
    colors = []
    for h in range(g.n):
        e = g.edge_index(h)
        role = roles.get(e, (4, 0))
        v = g.vertex_of[h]
        colors.append((
            role if len(role) == 3 else role + (0,),
            g.valence(v),
            1 if v in g.special else 0,
            g.valence(g.vertex_of[g.pairing[h]]),
            1 if g.is_loop(e) else 0,
        ))
    return _densify(colors)


def _densify(colors):
    table = {c: i for i, c in enumerate(sorted(set(colors)))}
    return [table[c] for c in colors]


def _refine(g, colors):
    while True:
        keys = []
        for h in range(g.n):
            v = g.vertex_of[h]
            near = tuple(sorted(colors[x] for x in g.vertices[v] if x != h))
            keys.append((colors[h], colors[g.pairing[h]], near))
        new = _densify(keys)
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def _certificate(g, mapping):
    n = g.n
    pairing = [0] * n
    vof = [0] * n
    for h in range(n):
        pairing[mapping[h]] = mapping[g.pairing[h]]
        vof[mapping[h]] = g.vertex_of[h]
    # renumber vertices by first occurrence in new ordering
    seen = {}
    vertex_of = []
    for h in range(n):
        v = vof[h]
        if v not in seen:
            seen[v] = len(seen)
        vertex_of.append(seen[v])
    new_edges = sorted((h, pairing[h]) for h in range(n) if h < pairing[h])
    eidx = {e: i for i, e in enumerate(new_edges)}

    def emap(e):
        a, b = g.edges[e]
        na, nb = mapping[a], mapping[b]
        return eidx[(min(na, nb), max(na, nb))]

    return (
        n, tuple(pairing), tuple(vertex_of),
        tuple(emap(e) for e in g.in_labels),
        tuple(emap(e) for e in g.out_labels),
        tuple(emap(e) for e in g.tin_labels),
        tuple(emap(e) for e in g.tout_labels),
        tuple(sorted(seen[g.vertex_of[g.vertices[s][0]]] for s in g.special)),
    )


_canon_cache = {}


def _search(g, colors, best):
    """Backtracking refinement; collects all maps with the minimal certificate."""
    colors = _refine(g, colors)
    cells = {}
    for h, c in enumerate(colors):
        cells.setdefault(c, []).append(h)
    target = None
    for c in sorted(cells):
        if len(cells[c]) > 1:
            target = cells[c]
            break
    if target is None:
        order = sorted(range(g.n), key=lambda h: colors[h])
        mapping = [0] * g.n
        for new, old in enumerate(order):
            mapping[old] = new
        cert = _certificate(g, mapping)
        if best["cert"] is None or cert < best["cert"]:
            best["cert"] = cert
            best["maps"] = [tuple(mapping)]
        elif cert == best["cert"]:
            best["maps"].append(tuple(mapping))
        return
    fresh = max(colors) + 1
    for h in target:
        branched = list(colors)
        branched[h] = fresh
        _search(g, branched, best)


def canonicalize(g):
    """Canonical representative of the labelled-isomorphism class.

    Returns (canonical graph, mapping) where mapping sends the input's
    half-edges to the canonical ones.  Two graphs are isomorphic (with
    matching boundary and torus labels) iff canonical graphs are equal.
    """
    cached = _canon_cache.get(g.key())
    if cached is None:
        best = {"cert": None, "maps": []}
        _search(g, _initial_colors(g), best)
        m0 = best["maps"][0]
        canon = relabel(g, m0)
        inv0 = [0] * g.n
        for h in range(g.n):
            inv0[m0[h]] = h
        auts = sorted(
            {tuple(m[inv0[h]] for h in range(g.n)) for m in best["maps"]}
        )
        cached = (canon, m0, auts)
        _canon_cache[g.key()] = cached
    canon, m0, _ = cached
    return canon, m0


def automorphism_group(g):
    """All boundary-label-preserving automorphisms, as half-edge permutations.

    The graph must already be in canonical form (anything returned by
    canonicalize); the identity is always included.
    """
    cached = _canon_cache.get(g.key())
    if cached is None:
        canonicalize(g)
        cached = _canon_cache[g.key()]
    canon, m0, auts = cached
    if canon.key() != g.key():
        raise GraphError("automorphism_group expects a canonical graph")
    return auts


def automorphism_generators(g):
    """Generating set (here: the full group) of label-preserving automorphisms."""
    canon, m0 = canonicalize(g)
    auts = automorphism_group(canon)
    # transport automorphisms of the canonical form back to g
    inv0 = [0] * g.n
    for h in range(g.n):
        inv0[m0[h]] = h
    return sorted({tuple(inv0[a[m0[h]]] for h in range(g.n)) for a in auts})


def edge_permutation(g, aut):
    """The permutation an automorphism induces on edge indices."""
    eidx = {e: i for i, e in enumerate(g.edges)}
    perm = []
    for a, b in g.edges:
        na, nb = aut[a], aut[b]
        perm.append(eidx[(min(na, nb), max(na, nb))])
    return tuple(perm)


def edge_map(src, dst, halfmap):
    """Edge-index map induced by a half-edge map from src onto dst."""
    out = {}
    for i, (a, b) in enumerate(src.edges):
        na, nb = halfmap[a], halfmap[b]
        out[i] = dst._eidx[(min(na, nb), max(na, nb))]
    return out


# -- collapse -------------------------------------------------------------

def collapse_edge(g, e):
    """Collapse internal non-loop edge e; returns (Graph, edge index map)."""
    a, b = g.edges[e]
    x, y = g.vertex_of[a], g.vertex_of[b]
    if x == y:
        raise GraphError(f"edge {e} is a loop and cannot be collapsed")
    if e in g.boundary_edges():
        raise GraphError(f"edge {e} is a boundary edge and cannot be collapsed")
    keep = [h for h in range(g.n) if h not in (a, b)]
    newidx = {h: i for i, h in enumerate(keep)}
    pairing = [newidx[g.pairing[h]] for h in keep]
    merged = min(x, y)
    vertex_of = []
    for h in keep:
        v = g.vertex_of[h]
        vertex_of.append(merged if v in (x, y) else v)
    new_edges = sorted((h, pairing[h]) for h in range(len(keep)) if h < pairing[h])
    eidx = {edge: i for i, edge in enumerate(new_edges)}

    edge_map = {}
    for i, (u, v) in enumerate(g.edges):
        if i == e:
            continue
        nu, nv = newidx[u], newidx[v]
        edge_map[i] = eidx[(min(nu, nv), max(nu, nv))]

    special = set()
    for s in g.special:
        for h in g.vertices[s]:
            if h in newidx:
                special.add(h)
                break
    out = Graph(
        pairing, vertex_of,
        tuple(edge_map[i] for i in g.in_labels),
        tuple(edge_map[i] for i in g.out_labels),
        tuple(edge_map[i] for i in g.tin_labels),
        tuple(edge_map[i] for i in g.tout_labels),
    )
    if special:
        sp = frozenset(out.vertex_of[newidx[h]] for h in special)
        out = Graph(pairing, vertex_of, out.in_labels, out.out_labels,
                    out.tin_labels, out.tout_labels, sp)
    return out, edge_map


def collapse_forest(g, forest):
    """Collapse every edge of an admissible forest; order-independent."""
    current = g
    remaining = set(forest)
    while remaining:
        e = min(remaining)
        remaining.discard(e)
        current, emap = collapse_edge(current, e)
        remaining = {emap[f] for f in remaining}
    return current


# -- forests ---------------------------------------------------------------

def _forest_components(g, forest):
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    acyclic = True
    for e in forest:
        a, b = g.edges[e]
        ra, rb = find(g.vertex_of[a]), find(g.vertex_of[b])
        if ra == rb:
            acyclic = False
            break
        parent[ra] = rb
    return acyclic, find


def is_admissible_forest(g, forest):
    """Forest rules: acyclic, no boundary or loop edges, torus bases separated."""
    bd = set(g.boundary_edges())
    for e in forest:
        if e in bd or g.is_loop(e):
            return False
    acyclic, find = _forest_components(g, forest)
    if not acyclic:
        return False
    bases = g.torus_base_vertices()
    roots = [find(v) for v in bases]
    return len(roots) == len(set(roots))


def admissible_forests(g):
    """All admissible forests (as frozensets of edge indices), by size."""
    bd = set(g.boundary_edges())
    candidates = [e for e in range(len(g.edges))
                  if e not in bd and not g.is_loop(e)]
    out = []
    for mask in range(1 << len(candidates)):
        forest = frozenset(candidates[i] for i in range(len(candidates))
                           if mask >> i & 1)
        if is_admissible_forest(g, forest):
            out.append(forest)
    out.sort(key=lambda f: (len(f), tuple(sorted(f))))
    return out


# -- orientations -----------------------------------------------------------

@dataclass(frozen=True)
class OrientationSign:
    """An edge ordering with a sign relative to the canonical (sorted) order."""

    ordering: tuple
    sign: int

    def normalized(self):
        target = tuple(sorted(self.ordering))
        return OrientationSign(target, self.sign * reorder_sign(self.ordering, target))


def permutation_parity(perm):
    """Sign of a permutation given as a sequence of images of 0..n-1."""
    perm = list(perm)
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def reorder_sign(seq, target):
    """Sign of the permutation rearranging `seq` into `target` (same items)."""
    seq, target = list(seq), list(target)
    pos = {item: i for i, item in enumerate(target)}
    if len(pos) != len(target) or len(seq) != len(target) or any(
        item not in pos for item in seq
    ) or len(set(map(pos.get, seq))) != len(seq):
        raise GraphError("reorder_sign arguments are not permutations of each other")
    return permutation_parity([pos[item] for item in seq])


def deletion_sign(ordering, e):
    """Remove e from an ordering with the sign (-1)^position.

    Realizes the orientation map that deletes one wedge factor.
    """
    ordering = tuple(ordering)
    if e not in ordering:
        raise GraphError(f"edge {e} not present in ordering")
    i = ordering.index(e)
    rest = ordering[:i] + ordering[i + 1:]
    return rest, (-1) ** i


def forest_sign_after(move, orientation, e):
    """Orientation after a face move (collapse-edge or remove-edge) at e.

    Both face types delete e from the wedge of forest edges, so the
    induced sign is the same for either move.
    """
    if move not in ("collapse-edge", "remove-edge"):
        raise GraphError(f"unknown move {move!r}")
    rest, s = deletion_sign(orientation.ordering, e)
    return OrientationSign(rest, orientation.sign * s)


# -- literals ----------------------------------------------------------------

def graph_literal(g):
    """One-line text form; round-trips through parse_graph_literal."""
    edges = ",".join(f"({a},{b})" for a, b in g.edges)
    verts = ",".join("[" + ",".join(map(str, v)) + "]" for v in g.vertices)

    def lst(xs):
        return "[" + ",".join(map(str, xs)) + "]"

    return (
        f"G{{h={g.n}; E=[{edges}]; V=[{verts}]; in={lst(g.in_labels)}; "
        f"out={lst(g.out_labels)}; tin={lst(g.tin_labels)}; "
        f"tout={lst(g.tout_labels)}; special={lst(sorted(g.special))}}}"
    )


_LIT = re.compile(
    r"G\{h=(?P<n>\d+); E=\[(?P<E>.*?)\]; V=\[(?P<V>.*?)\]; in=\[(?P<i>.*?)\]; "
    r"out=\[(?P<o>.*?)\]; tin=\[(?P<ti>.*?)\]; tout=\[(?P<to>.*?)\]; "
    r"special=\[(?P<s>.*?)\]\}"
)


def parse_graph_literal(text):
    m = _LIT.fullmatch(text.strip())
    if not m:
        raise GraphError(f"malformed graph literal: {text!r}")
    n = int(m.group("n"))
    pairing = [None] * n
    if m.group("E"):
        for pair in re.findall(r"\((\d+),(\d+)\)", m.group("E")):
            a, b = int(pair[0]), int(pair[1])
            pairing[a], pairing[b] = b, a
    vertex_of = [None] * n
    if m.group("V"):
        for v, block in enumerate(re.findall(r"\[([\d,]*)\]", m.group("V"))):
            for h in block.split(","):
                if h:
                    vertex_of[int(h)] = v

    def ints(s):
        return tuple(int(x) for x in s.split(",") if x)

    if any(p is None for p in pairing) or any(v is None for v in vertex_of):
        raise GraphError(f"literal does not cover all half-edges: {text!r}")
    return build_graph(pairing, vertex_of, ints(m.group("i")), ints(m.group("o")),
                       ints(m.group("ti")), ints(m.group("to")),
                       frozenset(ints(m.group("s"))))
