"""Graded chain complexes over Q with exact Betti numbers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .linalg import SparseMatrix, rank


@dataclass
class DDReport:
    """Outcome of the d-squared check, with located witnesses on failure."""

    ok: bool
    failures: list = field(default_factory=list)  # (degree, basis_from, basis_to, value)

    def __bool__(self):
        return self.ok


class GradedChainComplex:
    """Per-degree basis lists with sparse differentials d_n : C_n -> C_{n-1}.

    `basis` maps a degree to the list of (opaque, hashable) basis tags in
    that degree; `differentials` maps a degree n to the matrix of d_n,
    whose shape must be len(basis[n-1]) x len(basis[n]).  Degrees not
    present are zero.
    """

    def __init__(self, basis, differentials):
        self.basis = {d: list(b) for d, b in basis.items() if b}
        self.differentials = {}
        for n, m in differentials.items():
            want_rows = len(self.basis.get(n - 1, ()))
            want_cols = len(self.basis.get(n, ()))
            if (m.rows, m.cols) != (want_rows, want_cols):
                raise ValueError(
                    f"differential at degree {n} has shape {m.rows}x{m.cols}, "
                    f"expected {want_rows}x{want_cols}"
                )
            self.differentials[n] = m

    def degrees(self):
        return sorted(self.basis)

    def dim(self, n):
        return len(self.basis.get(n, ()))

    def differential(self, n):
        want_rows = self.dim(n - 1)
        want_cols = self.dim(n)
        return self.differentials.get(n, SparseMatrix(want_rows, want_cols))

    def total_dim(self):
        return sum(len(b) for b in self.basis.values())

    def verify_dd_zero(self):
        """Check d(n) . d(n+1) = 0 in every degree; failures carry witnesses."""
        failures = []
        for n in self.degrees():
            dn = self.differential(n)
            dn1 = self.differential(n + 1)
            if dn.cols == 0 or dn1.cols == 0:
                continue
            prod = dn.matmul(dn1)
            for (r, c), v in sorted(prod.entries.items()):
                failures.append((n + 1, self.basis[n + 1][c], self.basis[n - 1][r], v))
        return DDReport(ok=not failures, failures=failures)

    def betti(self):
        """Betti numbers [(degree, dim H_degree)] for all nonempty degrees.

        Requires d . d = 0; raises ValueError otherwise.
        """
        report = self.verify_dd_zero()
        if not report.ok:
            deg, src, dst, val = report.failures[0]
            raise ValueError(
                f"not a complex: d.d != 0 from {src!r} (degree {deg}) "
                f"to {dst!r} with value {val}"
            )
        ranks = {n: rank(self.differential(n)) for n in self.degrees()}
        out = []
        for n in self.degrees():
            b = self.dim(n) - ranks.get(n, 0) - ranks.get(n + 1, 0)
            out.append((n, b))
        return out

    def euler_characteristic(self):
        return sum((-1) ** n * self.dim(n) for n in self.degrees())

    def euler_from_betti(self):
        return sum((-1) ** n * b for n, b in self.betti())
