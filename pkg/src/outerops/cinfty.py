"""Cyclic homotopy-commutative algebras given by finite structure constants.

An algebra is a finite graded basis with an internal differential of
degree -1, operations m_k of degree k-2 for 2 <= k <= some cap, and an
invariant pairing.  Validators check the homotopy-associativity
relations, the shuffle (commutativity) relations, and the cyclic
pairing identity on all basis tuples; multilinearity makes basis
tuples sufficient.

Sign conventions.  Tensor words carry the suspended grading (a letter
of degree d contributes d+1), and the structure operations act through
the standard suspended-bar signs: applying m_j to the block after a
prefix costs

    (-1)^(j+1) * (-1)^(sum over prefix of (deg+1))
               * (-1)^(sum_i (j-i)*(deg_i+1) over the block)

while the internal differential at slot i costs the suspended prefix
sign only.  On degree-0 letters this reproduces the textbook signs for
even arities (in particular d(a (x) b) = +m_2(a, b)); the stated
position signs alone do not square to zero on graded input, so the
Koszul completion above is the one this library uses throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import SparseMatrix, rank


class AlgebraError(ValueError):
    pass


# -- signs -------------------------------------------------------------------

def block_sign(prefix_degrees, block_degrees):
    """Sign of applying m_j to `block` after `prefix` inside a tensor word."""
    j = len(block_degrees)
    exp = j + 1
    exp += sum(d + 1 for d in prefix_degrees)
    exp += sum((j - i) * (d + 1) for i, d in enumerate(block_degrees, start=1))
    return -1 if exp % 2 else 1


def delta_sign(prefix_degrees):
    """Sign of the internal differential acting after `prefix`."""
    exp = sum(d + 1 for d in prefix_degrees)
    return -1 if exp % 2 else 1


def interleavings(p, q):
    """Position sets: which slots of a (p+q)-word the first block occupies."""
    from itertools import combinations

    return list(combinations(range(p + q), p))


def shuffle_sign(word_degrees, positions):
    """sign(sigma) times the Koszul sign on raw letter degrees.

    `positions` lists where the first p letters land; the remaining
    letters fill the other slots in order.  An inversion between a
    first-block letter and a second-block letter contributes
    -(-1)^(d1*d2); this makes the arity-2 case the graded-commutativity
    relation m_2(a,b) - (-1)^(|a||b|) m_2(b,a).
    """
    p = len(positions)
    slots = [None] * len(word_degrees)
    for i, pos in enumerate(positions):
        slots[pos] = i
    rest = [i for i in range(len(word_degrees)) if slots[i] is None]
    second = iter(range(p, len(word_degrees)))
    for i in rest:
        slots[i] = next(second)
    sign = 1
    for a in range(len(slots)):
        for b in range(a + 1, len(slots)):
            if slots[a] > slots[b]:
                d1, d2 = word_degrees[slots[b]], word_degrees[slots[a]]
                sign *= -((-1) ** (d1 * d2))
    return sign, tuple(slots)


# -- the algebra -------------------------------------------------------------

@dataclass
class CInftyAlgebra:
    name: str
    basis: list            # generator names
    degrees: list          # integer degree per generator
    differential: dict     # src index -> {dst index: Fraction}
    operations: dict       # arity -> {input tuple: {output index: Fraction}}
    pairing: dict          # (i, j) -> Fraction
    max_arity: int = 4

    @property
    def dim(self):
        return len(self.basis)

    def degree(self, i):
        return self.degrees[i]

    def delta(self, i):
        """Internal differential of a generator, as a sparse vector."""
        return dict(self.differential.get(i, {}))

    def m(self, k, inputs):
        """Value of m_k on a basis tuple, as a sparse vector."""
        ops = self.operations.get(k, {})
        return dict(ops.get(tuple(inputs), {}))

    def pair(self, i, j):
        return self.pairing.get((i, j), Fraction(0))

    def word_degree(self, word):
        return len(word) + sum(self.degrees[i] for i in word)

    def names(self, word):
        return "(" + ",".join(self.basis[i] for i in word) + ")"


def _parse_coeff(c):
    return Fraction(c)


def load_algebra(document):
    """Build a validated CInftyAlgebra from a JSON document (text or dict).

    Structural invariants are enforced here: degree homogeneity of every
    constant, delta^2 = 0, and a nondegenerate graded-symmetric pairing.
    The homotopy axioms are left to the validators.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise AlgebraError(f"cannot parse algebra document: {exc}") from exc
    try:
        names = [str(b[0]) for b in document["basis"]]
        raw_degrees = [int(b[1]) for b in document["basis"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise AlgebraError(f"malformed basis table: {exc}") from exc
    convention = document.get("convention", "homological")
    if convention not in ("homological", "cohomological"):
        raise AlgebraError(f"unknown degree convention {convention!r}")
    sign = -1 if convention == "cohomological" else 1
    degrees = [sign * d for d in raw_degrees]
    dim = len(names)

    differential = {}
    for src, dst, c in document.get("differential", ()):
        c = _parse_coeff(c)
        if c == 0:
            continue
        if degrees[dst] != degrees[src] - 1:
            raise AlgebraError(
                f"differential entry {names[src]} -> {names[dst]} is not of degree -1"
            )
        differential.setdefault(src, {})[dst] = c

    operations = {}
    for arity_str, entries in document.get("operations", {}).items():
        k = int(arity_str)
        if k < 2:
            raise AlgebraError(f"operation arity {k} below 2")
        table = {}
        for inputs, out, c in entries:
            inputs = tuple(int(i) for i in inputs)
            if len(inputs) != k:
                raise AlgebraError(f"m_{k} entry with {len(inputs)} inputs")
            c = _parse_coeff(c)
            if c == 0:
                continue
            want = sum(degrees[i] for i in inputs) + (k - 2)
            if degrees[int(out)] != want:
                raise AlgebraError(
                    f"m_{k}{tuple(names[i] for i in inputs)} -> {names[int(out)]} "
                    f"violates degree {k}-2 homogeneity"
                )
            table.setdefault(inputs, {})[int(out)] = \
                table.get(inputs, {}).get(int(out), Fraction(0)) + c
        if table:
            operations[k] = table

    pairing = {}
    for i, j, c in document.get("pairing", ()):
        c = _parse_coeff(c)
        if c != 0:
            pairing[(int(i), int(j))] = c
    if pairing:
        for (i, j), c in pairing.items():
            sym = pairing.get((j, i), Fraction(0))
            if sym != (-1) ** (degrees[i] * degrees[j]) * c:
                raise AlgebraError(
                    f"pairing is not graded-symmetric at ({names[i]},{names[j]})"
                )
        gram = SparseMatrix(dim, dim, {k: v for k, v in pairing.items()})
        if rank(gram) != dim:
            raise AlgebraError("pairing is singular")

    alg = CInftyAlgebra(
        name=document.get("name", "algebra"),
        basis=names, degrees=degrees, differential=differential,
        operations=operations, pairing=pairing,
        max_arity=int(document.get("max_arity", 4)),
    )
    # delta^2 = 0
    for i in range(dim):
        acc = {}
        for mid, c in alg.delta(i).items():
            for dst, c2 in alg.delta(mid).items():
                acc[dst] = acc.get(dst, Fraction(0)) + c * c2
        if any(v != 0 for v in acc.values()):
            raise AlgebraError(f"differential does not square to zero at {names[i]}")
    return alg


def dump_algebra(alg):
    """Serialize back to the JSON document form; round-trips with load."""
    doc = {
        "name": alg.name,
        "convention": "homological",
        "max_arity": alg.max_arity,
        "basis": [[n, d] for n, d in zip(alg.basis, alg.degrees)],
        "differential": sorted(
            [src, dst, str(c)]
            for src, row in alg.differential.items() for dst, c in row.items()
        ),
        "operations": {
            str(k): sorted(
                [list(inp), out, str(c)]
                for inp, row in table.items() for out, c in row.items()
            )
            for k, table in sorted(alg.operations.items())
        },
        "pairing": sorted([i, j, str(c)] for (i, j), c in alg.pairing.items()),
    }
    return json.dumps(doc, indent=1, sort_keys=True)


# -- validators ---------------------------------------------------------------

@dataclass
class Check:
    name: str
    arity: int
    ok: bool
    witness: dict = field(default_factory=dict)


@dataclass
class ValidationReport:
    algebra: str
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def summary(self):
        lines = [f"validation of {self.algebra}:"]
        for c in self.checks:
            status = "pass" if c.ok else "FAIL"
            extra = f"  witness {c.witness}" if not c.ok else ""
            lines.append(f"  [{status}] {c.name} (arity {c.arity}){extra}")
        return "\n".join(lines)


def free_differential(alg, word, coeff=Fraction(1)):
    """Differential of a tensor word in the free (unquotiented) complex."""
    word = tuple(word)
    out = {}

    def add(w, c):
        if c:
            out[w] = out.get(w, Fraction(0)) + c
            if out[w] == 0:
                del out[w]

    degs = [alg.degrees[i] for i in word]
    for i in range(len(word)):
        s = delta_sign(degs[:i])
        for dst, c in alg.delta(word[i]).items():
            add(word[:i] + (dst,) + word[i + 1:], coeff * c * s)
    for j in sorted(alg.operations):
        if j > len(word):
            continue
        for s0 in range(len(word) - j + 1):
            block = word[s0:s0 + j]
            sgn = block_sign(degs[:s0], degs[s0:s0 + j])
            for dst, c in alg.m(j, block).items():
                add(word[:s0] + (dst,) + word[s0 + j:], coeff * c * sgn)
    return out


def check_ainfty(alg, max_arity):
    """Homotopy-associativity: the squared differential of the free word
    complex has no weight-one component, checked per arity and basis tuple."""
    from itertools import product

    report = ValidationReport(alg.name)
    cap = min(max_arity, alg.max_arity)
    for n in range(1, cap + 1):
        ok = True
        witness = {}
        for word in product(range(alg.dim), repeat=n):
            acc = {}
            for mid, c in free_differential(alg, word).items():
                for dst, c2 in free_differential(alg, mid, c).items():
                    if len(dst) == 1:
                        acc[dst] = acc.get(dst, Fraction(0)) + c2
            bad = {k: v for k, v in acc.items() if v != 0}
            if bad:
                ok = False
                witness = {
                    "tuple": alg.names(word),
                    "defect": {alg.basis[k[0]]: str(v) for k, v in bad.items()},
                }
                break
        report.checks.append(Check("A-infinity relation", n, ok, witness))
    return report


def check_shuffle_vanishing(alg, max_arity):
    """The signed shuffle sums of every operation vanish on basis tuples."""
    from itertools import product

    report = ValidationReport(alg.name)
    cap = min(max_arity, alg.max_arity)
    for n in range(2, cap + 1):
        ok = True
        witness = {}
        for p in range(1, n):
            for word in product(range(alg.dim), repeat=n):
                degs = [alg.degrees[i] for i in word]
                acc = {}
                for positions in interleavings(p, n - p):
                    sgn, slots = shuffle_sign(degs, positions)
                    permuted = tuple(word[slots[i]] for i in range(n))
                    for dst, c in alg.m(n, permuted).items():
                        acc[dst] = acc.get(dst, Fraction(0)) + sgn * c
                bad = {k: v for k, v in acc.items() if v != 0}
                if bad:
                    ok = False
                    witness = {
                        "tuple": alg.names(word), "shuffle": f"({p},{n - p})",
                        "defect": {alg.basis[k]: str(v) for k, v in bad.items()},
                    }
                    break
            if not ok:
                break
        report.checks.append(Check("shuffle relation", n, ok, witness))
    return report


def check_cyclic(alg, max_arity):
    """Invariance of the pairing under cyclic rotation of the operations."""
    from itertools import product

    report = ValidationReport(alg.name)
    if not alg.pairing:
        report.checks.append(Check("cyclic pairing", 0, False,
                                   {"reason": "no pairing present"}))
        return report
    cap = min(max_arity, alg.max_arity)
    for n in range(2, cap + 1):
        ok = True
        witness = {}
        for tup in product(range(alg.dim), repeat=n + 1):
            lhs = Fraction(0)
            for dst, c in alg.m(n, tup[:n]).items():
                lhs += c * alg.pair(dst, tup[n])
            rhs = Fraction(0)
            for dst, c in alg.m(n, tup[1:]).items():
                rhs += c * alg.pair(dst, tup[0])
            exp = (n + 1) * alg.degrees[tup[0]] * sum(alg.degrees[i] for i in tup[1:n])
            rhs *= (-1) ** exp
            if lhs != rhs:
                ok = False
                witness = {"tuple": alg.names(tup), "lhs": str(lhs), "rhs": str(rhs)}
                break
        report.checks.append(Check("cyclic pairing", n, ok, witness))
    return report


# -- built-in algebras --------------------------------------------------------

def _strict_commutative(name, names, degrees, products, pairing, differential=()):
    """Document for a strict graded-commutative algebra with only m_2."""
    return {
        "name": name,
        "convention": "homological",
        "max_arity": 4,
        "basis": [[n, d] for n, d in zip(names, degrees)],
        "differential": [list(t) for t in differential],
        "operations": {"2": [[list(i), o, str(c)] for i, o, c in products]},
        "pairing": [[i, j, str(c)] for i, j, c in pairing],
    }


def _truncated_polynomial(k):
    """Q[x]/(x^k) in degree 0 with the trace pairing <x^i, x^j> = [i+j = k-1]."""
    names = ["1"] + [f"x^{i}" if i > 1 else "x" for i in range(1, k)]
    products = []
    for i in range(k):
        for j in range(k):
            if i + j < k:
                products.append(((i, j), i + j, 1))
    pairing = [(i, k - 1 - i, 1) for i in range(k)]
    return _strict_commutative(f"Q[x]/(x^{k})", names, [0] * k, products, pairing)


def builtin_documents():
    docs = {
        "Q": _strict_commutative("Q", ["1"], [0], [((0, 0), 0, 1)], [(0, 0, 1)]),
        "Q[x]/(x^2)": _truncated_polynomial(2),
        "Q[x]/(x^3)": _truncated_polynomial(3),
        "H*(S^2)": _strict_commutative(
            "H*(S^2)", ["1", "x"], [0, 2],
            [((0, 0), 0, 1), ((0, 1), 1, 1), ((1, 0), 1, 1)],
            [(0, 1, 1), (1, 0, 1)],
        ),
        "H*(S^1)": _strict_commutative(
            "H*(S^1)", ["1", "a"], [0, 1],
            [((0, 0), 0, 1), ((0, 1), 1, 1), ((1, 0), 1, 1)],
            [(0, 1, 1), (1, 0, 1)],
        ),
    }
    return docs


def builtin_algebras():
    """The five built-ins: Q, Q[x]/(x^2), Q[x]/(x^3), H*(S^2), H*(S^1)."""
    return {name: load_algebra(doc) for name, doc in builtin_documents().items()}


def contractible_algebra():
    """A strict cdga with nonzero differential, for convention tests.

    Basis e (degree 0, the unit) and f (degree 1) with df = e and
    e our unit; f*f = 0 by graded commutativity.
    """
    doc = _strict_commutative(
        "cone", ["e", "f"], [0, 1],
        [((0, 0), 0, 1), ((0, 1), 1, 1), ((1, 0), 1, 1)],
        [(0, 1, 1), (1, 0, 1)],
        differential=[(1, 0, "1")],
    )
    return load_algebra(doc)
