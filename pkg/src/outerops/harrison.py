"""The Torus(A) complex: tensor powers modulo the shuffle ideal.

Tensor words a_1 (x) ... (x) a_n have total degree n + sum |a_i|, so
each letter is suspended and the differential (homotopy-product part
plus internal part, see cinfty.block_sign) has degree -1.  The shuffle
ideal in weight n is spanned by the shuffle products u * v together
with one-letter paddings of the ideal one weight down; the quotient is
presented by a section (the non-pivot words of a row echelon form) and
a reduction map.

The torus sector of the graph complex enters through the bonnet normal
form: an element of G_(0,k,1)(Bar(Comm)) paired with a weight-k word
rewrites to its bonnet core paired with the word obtained by absorbing
the open part into the algebra action.  A corolla label of arity j
acts by the (j-fold) iterated product; labels with internal edges act
by zero (the counit of the resolution), and letters reorder with
Koszul signs on their raw degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .chain import GradedChainComplex
from .cinfty import block_sign, delta_sign, free_differential, interleavings
from .gencobar import bonnet_decompose
from .linalg import SparseMatrix


class TorusError(ValueError):
    pass


def shuffle_product(alg, u, v):
    """Signed sum of interleavings of two tensor words.

    The sign is sign(sigma) times the Koszul sign on raw letter
    degrees, matching the arity-2 shuffle relation on degree-0 letters:
    (a) * (b) = a(x)b - b(x)a.
    """
    u, v = tuple(u), tuple(v)
    word = u + v
    degs = [alg.degrees[i] for i in word]
    out = {}
    for positions in interleavings(len(u), len(v)):
        slots = [None] * len(word)
        for i, pos in enumerate(positions):
            slots[pos] = i
        rest = iter(range(len(u), len(word)))
        for i in range(len(word)):
            if slots[i] is None:
                slots[i] = next(rest)
        sign = 1
        for a in range(len(word)):
            for b in range(a + 1, len(word)):
                if slots[a] > slots[b]:
                    sign *= -((-1) ** (degs[slots[a]] * degs[slots[b]]))
        shuffled = tuple(word[slots[i]] for i in range(len(word)))
        out[shuffled] = out.get(shuffled, Fraction(0)) + sign
    return {w: c for w, c in out.items() if c}


class ShuffleQuotientBasis:
    """Row echelon presentation of the shuffle subspace in one weight.

    `rows` maps a pivot word to a reduced row with pivot coefficient 1;
    `section` lists the non-pivot words, a basis of the quotient;
    `reduce` rewrites any vector as its canonical section representative.
    """

    def __init__(self, weight):
        self.weight = weight
        self.rows = {}
        self.generators = []

    def reduce(self, vec):
        vec = dict(vec)
        while True:
            pivots = [w for w in vec if w in self.rows and vec[w] != 0]
            if not pivots:
                break
            w = min(pivots)
            c = vec[w]
            for ww, cc in self.rows[w].items():
                vec[ww] = vec.get(ww, Fraction(0)) - c * cc
                if vec[ww] == 0:
                    del vec[ww]
        return {w: c for w, c in vec.items() if c}

    def add(self, vec):
        vec = self.reduce(vec)
        if not vec:
            return False
        piv = min(vec)
        c = vec[piv]
        self.rows[piv] = {w: cc / c for w, cc in vec.items()}
        return True

    @property
    def dimension(self):
        return len(self.rows)

    def section(self, alg):
        words = sorted(product(range(alg.dim), repeat=self.weight))
        return [w for w in words if w not in self.rows]

    def contains(self, vec):
        return not self.reduce(vec)


def shuffle_subspace(alg, weight, previous=None):
    """The ideal component in one weight: shuffle products plus paddings.

    `previous` is the component one weight down, used for the closure
    of the ideal under tensoring by letters on either side.
    """
    if weight < 2:
        sub = ShuffleQuotientBasis(weight)
        return sub
    sub = ShuffleQuotientBasis(weight)
    for p in range(1, weight):
        for u in product(range(alg.dim), repeat=p):
            for v in product(range(alg.dim), repeat=weight - p):
                vec = shuffle_product(alg, u, v)
                if vec:
                    sub.generators.append(vec)
                    sub.add(vec)
    if previous is not None:
        for row in list(previous.rows.values()):
            for a in range(alg.dim):
                left = {(a,) + w: c for w, c in row.items()}
                right = {w + (a,): c for w, c in row.items()}
                sub.generators.append(left)
                sub.generators.append(right)
                sub.add(left)
                sub.add(right)
    return sub


def shuffle_subspaces(alg, weight_cap):
    subs = {}
    previous = None
    for n in range(1, weight_cap + 1):
        subs[n] = shuffle_subspace(alg, n, previous)
        previous = subs[n]
    return subs


def min_letter_degree(alg):
    return min(alg.degrees)


def degree_complete(alg, weight_cap, degree):
    """No weight above the cap can contribute to this degree or its neighbors."""
    mu = min_letter_degree(alg)
    if mu < 0:
        return False
    return (weight_cap + 1) * (mu + 1) > degree + 1


def torus_complex(alg, weight_cap):
    """The quotient complex up to a weight cap, with completeness flags.

    Returns (complex, flags) where flags maps each populated total
    degree to True when no weight above the cap can reach the degree or
    its neighbors.  Basis tags are (weight, word) pairs; differentials
    are computed on section representatives and reduced back.
    """
    if weight_cap < 1:
        raise TorusError("weight cap must be at least 1")
    subs = shuffle_subspaces(alg, weight_cap)
    sections = {n: subs[n].section(alg) for n in subs}
    basis = {}
    for n, words in sections.items():
        for w in words:
            basis.setdefault(alg.word_degree(w), []).append((n, w))
    for d in basis:
        basis[d].sort()
    index = {d: {tag: i for i, tag in enumerate(tags)} for d, tags in basis.items()}

    diffs = {}
    for d, tags in basis.items():
        rows = len(basis.get(d - 1, ()))
        entries = {}
        for col, (n, word) in enumerate(tags):
            image = free_differential(alg, word)
            by_weight = {}
            for w, c in image.items():
                by_weight.setdefault(len(w), {})[w] = c
            for m, vec in by_weight.items():
                if m < 1:
                    continue
                reduced = subs[m].reduce(vec) if m in subs else vec
                for w, c in reduced.items():
                    row = index.get(d - 1, {}).get((m, w))
                    if row is None:
                        if c != 0:
                            raise TorusError(
                                f"differential escapes the truncation at {w}"
                            )
                        continue
                    entries[(row, col)] = entries.get((row, col), Fraction(0)) + c
        if entries or rows:
            diffs[d] = SparseMatrix(rows, len(tags), entries)

    cx = GradedChainComplex(basis, diffs)
    flags = {d: degree_complete(alg, weight_cap, d) for d in cx.degrees()}
    return cx, flags


def shuffle_ideal_preserved(alg, weight_cap):
    """Check d(ideal) is contained in the ideal, on every spanning generator.

    This is the well-definedness of the quotient differential and the
    decisive test of the sign conventions.  Returns (ok, witnesses).
    """
    subs = shuffle_subspaces(alg, weight_cap)
    witnesses = []
    for n in range(2, weight_cap + 1):
        for gen in subs[n].generators:
            image = {}
            for word, c in gen.items():
                for w, c2 in free_differential(alg, word, c).items():
                    image[w] = image.get(w, Fraction(0)) + c2
            by_weight = {}
            for w, c in image.items():
                if c:
                    by_weight.setdefault(len(w), {})[w] = c
            for m, vec in by_weight.items():
                if m < 2:
                    # weight-one part must vanish identically modulo nothing:
                    # the ideal has no weight-one component
                    if any(c != 0 for c in subs[1].reduce(vec).values()):
                        witnesses.append((n, gen, m, vec))
                    continue
                if not subs[m].contains(vec):
                    witnesses.append((n, gen, m, vec))
    return not witnesses, witnesses


@dataclass
class BettiRow:
    degree: int
    dim: int
    betti: int
    complete: bool
    weights: list


@dataclass
class BettiReport:
    algebra: str
    weight_cap: int
    rows: list = field(default_factory=list)

    def by_degree(self):
        return {r.degree: r for r in self.rows}

    def complete_rows(self):
        return [r for r in self.rows if r.complete]

    def summary(self):
        lines = [f"Harrison homology of {self.algebra} (weight cap {self.weight_cap})"]
        lines.append("degree  dim  betti  status  weights")
        for r in self.rows:
            status = "complete" if r.complete else "truncated"
            ws = ",".join(map(str, r.weights))
            lines.append(f"{r.degree:6d} {r.dim:4d} {r.betti:6d}  {status}  [{ws}]")
        return "\n".join(lines)


def harrison_betti(alg, weight_cap):
    """Betti numbers of Torus(A) per total degree, flagged complete/truncated."""
    cx, flags = torus_complex(alg, weight_cap)
    betti = dict(cx.betti())
    report = BettiReport(alg.name, weight_cap)
    for d in cx.degrees():
        weights = sorted({n for n, _ in cx.basis[d]})
        report.rows.append(BettiRow(d, cx.dim(d), betti.get(d, 0),
                                    flags[d], weights))
    return report


# -- the bonnet normal form ---------------------------------------------------

def _iterated_product(alg, letters):
    """Left-iterated m_2 of basis letters, as a sparse vector."""
    if not letters:
        raise TorusError("cannot multiply an empty letter block")
    acc = {letters[0]: Fraction(1)}
    for nxt in letters[1:]:
        new = {}
        for mid, c in acc.items():
            for dst, c2 in alg.m(2, (mid, nxt)).items():
                new[dst] = new.get(dst, Fraction(0)) + c * c2
        acc = {k: v for k, v in new.items() if v}
        if not acc:
            return {}
    return acc


def _reorder_sign_raw(degrees, permutation):
    """Koszul sign (raw degrees) of reordering letters by `permutation`.

    `permutation[k]` is the source position of the k-th output letter.
    """
    sign = 1
    for a in range(len(permutation)):
        for b in range(a + 1, len(permutation)):
            if permutation[a] > permutation[b]:
                sign *= (-1) ** (degrees[permutation[a]] * degrees[permutation[b]])
    return sign


def open_action(open_elem, letters, alg):
    """Evaluate an open labelled forest on a tuple of basis letters.

    The open part has k incoming and n outgoing boundary edges; letters
    feed the incoming edges by label position.  Each corolla vertex
    multiplies its inputs with the iterated product; any vertex with a
    nontrivial label kills the term.  Returns a sparse vector on output
    words of length n.
    """
    g = open_elem.graph
    k = len(g.in_labels)
    if len(letters) != k:
        raise TorusError(f"expected {k} letters, got {len(letters)}")

    in_position = {e: i for i, e in enumerate(g.in_labels)}
    out_edges = list(g.out_labels)

    def is_leaf_half(h):
        return g.valence(g.vertex_of[h]) == 1

    def evaluate(half):
        """Plan for the subtree entered along `half`, or None on a dead label.

        Returns (plan, used positions); inputs at each vertex are taken
        in order of the smallest letter position they consume.
        """
        v = g.vertex_of[half]
        if open_elem.labels[v]:
            return None
        entries = []
        for h in g.vertices[v]:
            if h == half:
                continue
            e = g.edge_index(h)
            partner = g.pairing[h]
            if e in in_position and is_leaf_half(partner):
                pos = in_position[e]
                entries.append((pos, ("letter", pos), [pos]))
            else:
                sub = evaluate(partner)
                if sub is None:
                    return None
                plan, used = sub
                entries.append((min(used), plan, used))
        entries.sort(key=lambda t: t[0])
        used = [p for _, _, sub_used in entries for p in sub_used]
        return ("node", [plan for _, plan, _ in entries]), used

    # evaluate the components hanging off each outgoing edge, in order
    plans = []
    order_of_use = []
    for e in out_edges:
        a, b = g.edges[e]
        inner = a if not is_leaf_half(a) else b
        if is_leaf_half(inner):
            # straight-through edge: the component is a bare strand
            pos = in_position.get(e)
            if pos is None:
                raise TorusError("outgoing edge is not connected to an input")
            plans.append(("letter", pos))
            order_of_use.append(pos)
            continue
        result = evaluate(inner)
        if result is None:
            return {}
        plan, used = result
        plans.append(plan)
        order_of_use.extend(used)

    if sorted(order_of_use) != list(range(k)):
        raise TorusError("open part does not consume every input exactly once")

    degs = [alg.degrees[i] for i in letters]
    sign = _reorder_sign_raw(degs, order_of_use)

    def expand(plan):
        """Sparse vector of the plan's value."""
        kind = plan[0]
        if kind == "letter":
            return {letters[plan[1]]: Fraction(1)}
        vectors = [expand(p) for p in plan[1]]
        out = {}
        for combo in product(*[v.items() for v in vectors]):
            block = [c[0] for c in combo]
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            for dst, c2 in _iterated_product(alg, block).items():
                out[dst] = out.get(dst, Fraction(0)) + coeff * c2
        return {kk: vv for kk, vv in out.items() if vv}

    result = {}
    factors = [expand(p) for p in plans]
    for combo in product(*[f.items() for f in factors]):
        word = tuple(c[0] for c in combo)
        coeff = Fraction(sign)
        for _, c in combo:
            coeff *= c
        result[word] = result.get(word, Fraction(0)) + coeff
    return {w: c for w, c in result.items() if c}


def bonnet_representative(elem, letters, alg):
    """Normal form of (labelled graph with one torus) tensor (word).

    Returns (core, word vector): the labelled bonnet B(n) and the image
    of the letters under the open part's action, with the orientation
    sign of the decomposition folded into the coefficients.
    """
    open_elem, core, sign = bonnet_decompose(elem)
    action = open_action(open_elem, tuple(letters), alg)
    return core, {w: sign * c for w, c in action.items()}


def absorb_pendant(elem, wordvec, vertex, alg):
    """Absorb a single pendant corolla vertex into the word.

    `vertex` must have exactly one internal edge and otherwise incoming
    boundary edges; the rewrite applies the iterated product to its
    letters (gathered with raw-degree Koszul signs at the position of
    its first letter) and hands back the smaller element with the
    rewritten word vector.  Realizes one step of the relation
    f^*(g) (x) h ~ g (x) f_*(h).
    """
    from .gencobar import LabelledGraph, lg_term, normalize_split
    from .graphs import Graph, GraphError, build_graph, canonicalize

    g = elem.graph
    legs = g.vertices[vertex]
    internal = [h for h in legs
                if g.valence(g.vertex_of[g.pairing[h]]) != 1
                or g.edge_index(h) not in g.in_labels]
    boundary = [h for h in legs if h not in internal]
    if len(internal) != 1 or not boundary:
        raise TorusError("vertex is not a pendant corolla")
    positions = sorted(g.in_labels.index(g.edge_index(h)) for h in boundary)
    nontrivial = bool(elem.labels[vertex])

    # graph surgery: delete the pendant vertex and its boundary leaves,
    # turn the internal edge into an incoming boundary edge at min(positions)
    stem = internal[0]
    far = g.pairing[stem]
    dead = set()
    for h in boundary:
        dead.add(h)
        dead.add(g.pairing[h])
    dead.add(stem)
    keep = [h for h in range(g.n) if h not in dead]
    newidx = {h: i for i, h in enumerate(keep)}
    n_new = len(keep)
    pairing = [0] * n_new
    vof = []
    for h in keep:
        p = g.pairing[h]
        pairing[newidx[h]] = newidx[p] if p in newidx else n_new  # stub for far
        vof.append(g.vertex_of[h])
    # the far half joins a fresh leaf half
    pairing.append(newidx[far])
    pairing[newidx[far]] = n_new
    vof_far = list(vof) + [("fresh-leaf",)]

    raw = Graph(pairing, vof_far)

    def new_edge(e):
        x, y = g.edges[e]
        nx = newidx.get(x)
        ny = newidx.get(y)
        if nx is None and ny is None:
            raise GraphError("edge vanished in absorption")
        if nx is None:
            nx = raw.pairing[ny]
        if ny is None:
            ny = raw.pairing[nx]
        return raw._eidx[(min(nx, ny), max(nx, ny))]

    stem_edge = raw.edge_index(newidx[far])
    new_in = []
    inserted = False
    for i, e in enumerate(g.in_labels):
        if i in positions:
            if i == positions[0]:
                new_in.append(stem_edge)
                inserted = True
            continue
        new_in.append(new_edge(e))
    if not inserted:
        new_in.append(stem_edge)
    rebuilt = build_graph(
        pairing, vof_far, tuple(new_in),
        tuple(new_edge(e) for e in g.out_labels),
        tuple(new_edge(e) for e in g.tin_labels),
        tuple(new_edge(e) for e in g.tout_labels),
    )
    labels = [frozenset()] * rebuilt.n_vertices
    tracked = []
    for w, spl in enumerate(elem.labels):
        if w == vertex or not spl:
            continue
        h0 = next(h for h in g.vertices[w] if h in newidx)
        wn = rebuilt.vertex_of[newidx[h0]]
        labels[wn] = frozenset(
            normalize_split(rebuilt.vertices[wn], frozenset(newidx[h] for h in s))
            for s in spl
        )
    for w, s in elem.label_edges():
        if w == vertex:
            continue
        h0 = next(h for h in g.vertices[w] if h in newidx)
        wn = rebuilt.vertex_of[newidx[h0]]
        tracked.append((wn, normalize_split(rebuilt.vertices[wn],
                                            frozenset(newidx[h] for h in s))))
    canon, halfmap = canonicalize(rebuilt)
    labels2 = [frozenset()] * canon.n_vertices
    for w, spl in enumerate(labels):
        if not spl:
            continue
        wn = canon.vertex_of[halfmap[rebuilt.vertices[w][0]]]
        labels2[wn] = frozenset(
            normalize_split(canon.vertices[wn], frozenset(halfmap[h] for h in s))
            for s in spl
        )
    tracked2 = [
        (canon.vertex_of[halfmap[rebuilt.vertices[w][0]]],
         normalize_split(canon.vertices[canon.vertex_of[halfmap[rebuilt.vertices[w][0]]]],
                         frozenset(halfmap[h] for h in s)))
        for w, s in tracked
    ]
    term = lg_term(canon, labels2, tracked2)
    if term is None:
        raise GraphError("absorption target vanishes")
    new_elem, gsign = term

    # rewrite the word: gather the letters of `positions` at the first one
    block_src = {g.in_labels.index(g.edge_index(h)): h for h in boundary}
    ordered_positions = sorted(block_src)
    out_vec = {}
    for word, coeff in wordvec.items():
        degs = [alg.degrees[i] for i in word]
        sign = 1
        for p in ordered_positions:
            for q in range(ordered_positions[0], p):
                if q not in positions:
                    sign *= (-1) ** (degs[p] * degs[q])
        block = [word[p] for p in ordered_positions]
        if nontrivial:
            continue
        for dst, c in _iterated_product(alg, block).items():
            new_word = []
            for i in range(len(word)):
                if i == positions[0]:
                    new_word.append(dst)
                elif i in positions:
                    continue
                else:
                    new_word.append(word[i])
            w2 = tuple(new_word)
            out_vec[w2] = out_vec.get(w2, Fraction(0)) + coeff * c * sign * gsign
    return new_elem, {w: c for w, c in out_vec.items() if c}
