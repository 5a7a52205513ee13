"""Exact sparse matrices: rank against a dense textbook oracle."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from outerops.linalg import SparseMatrix, rank


def dense_rank(m):
    """Textbook Gaussian elimination over Fraction, dense rows."""
    rows = [[m[(r, c)] for c in range(m.cols)] for r in range(m.rows)]
    rk = 0
    col = 0
    while rk < len(rows) and col < m.cols:
        piv = next((i for i in range(rk, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        pv = rows[rk][col]
        for i in range(rk + 1, len(rows)):
            if rows[i][col] != 0:
                f = rows[i][col] / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rk])]
        rk += 1
        col += 1
    return rk


def test_zero_matrix():
    assert rank(SparseMatrix(3, 3)) == 0


def test_identity():
    m = SparseMatrix(4, 4, {(i, i): 1 for i in range(4)})
    assert rank(m) == 4


def test_dependent_rows():
    m = SparseMatrix(3, 3, {
        (0, 0): 1, (0, 1): 2,
        (1, 0): 2, (1, 1): 4,
        (2, 2): Fraction(1, 3),
    })
    assert rank(m) == 2


def test_rectangular():
    m = SparseMatrix(2, 5, {(0, 0): 1, (0, 4): -1, (1, 0): 1, (1, 4): 1})
    assert rank(m) == 2


def test_entry_validation():
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, {(2, 0): 1})


def test_matmul_shapes():
    a = SparseMatrix(2, 3, {(0, 0): 1, (1, 2): 2})
    b = SparseMatrix(3, 2, {(0, 1): 1, (2, 0): Fraction(1, 2)})
    p = a.matmul(b)
    assert (p.rows, p.cols) == (2, 2)
    assert p[(0, 1)] == 1 and p[(1, 0)] == 1
    with pytest.raises(ValueError):
        b.matmul(SparseMatrix(3, 3))


def test_dump_parse_roundtrip():
    m = SparseMatrix(3, 4, {(0, 1): Fraction(-2, 3), (2, 0): 5})
    assert SparseMatrix.parse(m.dump()) == m


@st.composite
def sparse_matrices(draw):
    rows = draw(st.integers(0, 12))
    cols = draw(st.integers(0, 8))
    entries = {}
    if rows and cols:
        n = draw(st.integers(0, rows * cols))
        for _ in range(n):
            r = draw(st.integers(0, rows - 1))
            c = draw(st.integers(0, cols - 1))
            num = draw(st.integers(-4, 4))
            den = draw(st.integers(1, 3))
            entries[(r, c)] = Fraction(num, den)
    return SparseMatrix(rows, cols, entries)


@settings(max_examples=200, deadline=None)
@given(sparse_matrices())
def test_rank_matches_dense_oracle(m):
    assert rank(m) == dense_rank(m)
