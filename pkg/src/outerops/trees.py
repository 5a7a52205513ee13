"""Rooted trees with labelled leaves, and the Bar complex of Comm.

Trees are nested tuples: a leaf is its (hashable, orderable) label, an
internal node is the tuple of its children sorted by smallest leaf.
Internal vertices always have at least two children, so all vertices
of the corresponding graph have valence >= 3.

Since the commutative operad is Q in every arity, a Bar basis element
is just a tree together with an orientation; orientations are kept as
the sorted ordering of internal edges, where an internal edge is named
by the leaf set below it.
"""

from __future__ import annotations

from .chain import GradedChainComplex
from .linalg import SparseMatrix


def is_leaf(tree):
    return not isinstance(tree, tuple)


def min_leaf(tree):
    while isinstance(tree, tuple):
        tree = tree[0]
    return tree


def node(children):
    return tuple(sorted(children, key=min_leaf))


def leaves(tree):
    if is_leaf(tree):
        return frozenset([tree])
    out = frozenset()
    for c in tree:
        out |= leaves(c)
    return out


def _partitions(items):
    """All partitions of a list into nonempty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def all_trees(leafset, _cache={}):
    """All rooted trees on the given leaves with internal valence >= 3."""
    leafset = frozenset(leafset)
    if leafset in _cache:
        return _cache[leafset]
    items = sorted(leafset)
    if len(items) == 1:
        result = [items[0]]
    else:
        result = []
        for part in _partitions(items):
            if len(part) < 2:
                continue
            options = []
            for block in part:
                if len(block) == 1:
                    options.append([block[0]])
                else:
                    options.append([t for t in all_trees(frozenset(block))
                                    if isinstance(t, tuple)])
            stack = [()]
            for opts in options:
                stack = [s + (o,) for s in stack for o in opts]
            for children in stack:
                result.append(node(children))
    result = sorted(set(result), key=tree_sort_key)
    _cache[leafset] = result
    return result


def tree_sort_key(tree):
    if is_leaf(tree):
        return (0, tree)
    return (1, tuple(tree_sort_key(c) for c in tree))


def internal_edges(tree):
    """Internal edges as leaf sets below them, in canonical sorted order."""
    out = []

    def walk(t, is_root):
        if is_leaf(t):
            return
        if not is_root:
            out.append(leaves(t))
        for c in t:
            walk(c, False)

    walk(tree, True)
    return sorted(out, key=lambda s: tuple(sorted(s)))


def degree(tree):
    """Homological degree: the number of internal edges."""
    return len(internal_edges(tree))


def contract(tree, edge):
    """Contract the internal edge named by the leaf set `edge`."""
    if is_leaf(tree):
        raise ValueError("cannot contract inside a leaf")

    def walk(t):
        new_children = []
        for c in t:
            if not is_leaf(c) and leaves(c) == edge:
                new_children.extend(c)
            elif not is_leaf(c) and edge < leaves(c):
                new_children.append(walk(c))
            else:
                new_children.append(c)
        return node(new_children)

    out = walk(tree)
    if out == tree:
        raise ValueError(f"no internal edge with leaf set {sorted(edge)}")
    return out


def splits(tree):
    """Internal edges as a frozenset of leaf-set splits."""
    return frozenset(internal_edges(tree))


def tree_from_splits(leafset, split_set):
    """Rebuild the rooted tree on `leafset` whose internal edges are `split_set`.

    Splits must be proper subsets of the leaf set and pairwise nested or
    disjoint (they always are for trees produced by this module).
    """
    def build(legs, inner):
        maximal = []
        for s in sorted(inner, key=lambda s: (-len(s), tuple(sorted(s)))):
            if not any(s < m for m in maximal):
                maximal.append(s)
        children = []
        covered = set()
        for m in maximal:
            covered |= m
            children.append(build(m, [s for s in inner if s < m]))
        for leaf in sorted(legs - covered):
            children.append(leaf)
        return node(children) if len(children) > 1 else children[0]

    inner = [frozenset(s) for s in split_set]
    if any(not s < frozenset(leafset) or len(s) < 2 for s in inner):
        raise ValueError("splits must be proper sub-leaf-sets of size >= 2")
    return build(frozenset(leafset), inner)


def tree_literal(tree):
    """Nested-parentheses text form, e.g. (1,(2,3),4)."""
    if is_leaf(tree):
        return str(tree)
    return "(" + ",".join(tree_literal(c) for c in tree) + ")"


def parse_tree_literal(text):
    text = text.strip()
    pos = 0

    def parse():
        nonlocal pos
        if text[pos] == "(":
            pos += 1
            children = [parse()]
            while text[pos] == ",":
                pos += 1
                children.append(parse())
            if text[pos] != ")":
                raise ValueError(f"expected ')' at {pos} in {text!r}")
            pos += 1
            return node(children)
        start = pos
        while pos < len(text) and text[pos] not in ",()":
            pos += 1
        return int(text[start:pos])

    out = parse()
    if pos != len(text):
        raise ValueError(f"trailing input at {pos} in {text!r}")
    return out


def bar_complex(n):
    """The Bar complex of Comm in arity n.

    Basis: rooted trees with leaves 1..n; the differential contracts
    internal edges, with sign the position of the edge in the sorted
    edge ordering.  One-vertex trees (corollas) sit in degree 0.
    """
    if n < 2:
        raise ValueError("bar_complex needs arity n >= 2")
    basis = {}
    for t in all_trees(frozenset(range(1, n + 1))):
        basis.setdefault(degree(t), []).append(t)
    index = {d: {t: i for i, t in enumerate(ts)} for d, ts in basis.items()}
    diffs = {}
    for d, ts in basis.items():
        if d == 0:
            continue
        entries = {}
        for col, t in enumerate(ts):
            for i, edge in enumerate(internal_edges(t)):
                target = contract(t, edge)
                row = index[d - 1][target]
                key = (row, col)
                entries[key] = entries.get(key, 0) + (-1) ** i
        diffs[d] = SparseMatrix(len(basis[d - 1]), len(ts), entries)
    return GradedChainComplex(basis, diffs)
