"""Sparse exact-rational matrices and rank computation.

All arithmetic is done with `fractions.Fraction`; no floating point
enters anywhere in this module.  Rank is computed by fraction-free
(Bareiss-style) elimination on integer rows, with pivots chosen to
keep rows short.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class SparseMatrix:
    """An immutable sparse matrix over Q.

    Entries are stored in a dict mapping (row, col) to a nonzero
    Fraction; explicit zeros are never stored.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self.rows = rows
        self.cols = cols
        clean = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r},{c}) outside {rows}x{cols} matrix")
            v = Fraction(v)
            if v != 0:
                clean[(r, c)] = v
        self.entries = clean

    def __getitem__(self, key):
        return self.entries.get(key, Fraction(0))

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, {len(self.entries)} entries)"

    def is_zero(self):
        return not self.entries

    def nnz(self):
        return len(self.entries)

    def column(self, c):
        return {r: v for (r, cc), v in self.entries.items() if cc == c}

    def matmul(self, other):
        """Return self @ other."""
        if self.cols != other.rows:
            raise ValueError(
                f"shape mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}"
            )
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                key = (r, c)
                acc[key] = acc.get(key, Fraction(0)) + v * w
        return SparseMatrix(self.rows, other.cols, acc)

    def dump(self):
        """Triple format: one 'row col p/q' line per entry, sorted."""
        lines = [f"{self.rows} {self.cols}"]
        for (r, c) in sorted(self.entries):
            v = self.entries[(r, c)]
            lines.append(f"{r} {c} {v.numerator}/{v.denominator}")
        return "\n".join(lines)

    @classmethod
    def parse(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        rows, cols = (int(x) for x in lines[0].split())
        entries = {}
        for ln in lines[1:]:
            r, c, val = ln.split()
            entries[(int(r), int(c))] = Fraction(val)
        return cls(rows, cols, entries)


def _integer_rows(m):
    """Rows of `m` as dicts col -> int, denominators cleared per row."""
    rows = {}
    for (r, c), v in m.entries.items():
        rows.setdefault(r, {})[c] = v
    out = []
    for r, row in rows.items():
        lcm = 1
        for v in row.values():
            d = v.denominator
            lcm = lcm // gcd(lcm, d) * d
        irow = {c: int(v * lcm) for c, v in row.items()}
        g = 0
        for v in irow.values():
            g = gcd(g, abs(v))
        if g > 1:
            irow = {c: v // g for c, v in irow.items()}
        out.append(irow)
    return out


def rank(m):
    """Exact rank of `m` over Q.

    Fraction-free elimination on integer rows: each update is the
    cross-multiplied difference pv*row - rv*pivot, renormalized by the
    row gcd to keep entries small.  The pivot row is the shortest
    remaining row (ties broken by smallest entry magnitude), which
    keeps fill-in low on the boundary matrices this library produces.
    """
    active = [row for row in _integer_rows(m) if row]
    rk = 0
    while active:
        pr = min(
            range(len(active)),
            key=lambda i: (len(active[i]), min(abs(v) for v in active[i].values())),
        )
        pivot_row = active.pop(pr)
        pc = min(pivot_row, key=lambda c: (abs(pivot_row[c]), c))
        pv = pivot_row[pc]
        rk += 1
        nxt = []
        for row in active:
            rv = row.get(pc)
            if rv is None:
                nxt.append(row)
                continue
            new = {}
            for c in row.keys() | pivot_row.keys():
                if c == pc:
                    continue
                val = pv * row.get(c, 0) - rv * pivot_row.get(c, 0)
                if val:
                    new[c] = val
            if new:
                g = 0
                for v in new.values():
                    g = gcd(g, abs(v))
                if g > 1:
                    new = {c: v // g for c, v in new.items()}
                nxt.append(new)
        active = nxt
    return rk
