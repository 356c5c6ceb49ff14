from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockycover.matcore import (
    BlockyCover,
    BooleanMatrix,
    CoverViolation,
    MatrixFormatError,
    Rectangle,
    col_nbhd,
    cover_support,
    format_bm,
    is_blocky,
    parse_bm,
    restrict,
    row_nbhd,
    support_size,
)
from blockycover.structure import threshold_dimension

from conftest import bool_matrices

I3 = BooleanMatrix.identity(3)
L = BooleanMatrix.from_array([[1, 0], [1, 1]])


def test_support_size_examples():
    assert support_size(I3) == 3
    assert support_size(BooleanMatrix.ones(2, 3)) == 6
    assert support_size(L) == 3


def test_neighbourhoods():
    assert row_nbhd(I3, 1) == [1]
    assert row_nbhd(BooleanMatrix.ones(2, 3), 0) == [0, 1, 2]
    assert col_nbhd(L, 0) == [0, 1]
    with pytest.raises(IndexError):
        row_nbhd(I3, 3)
    with pytest.raises(IndexError):
        col_nbhd(I3, -1)


def test_restrict_examples():
    assert restrict(I3, [0, 1], [0, 1]) == BooleanMatrix.identity(2)
    assert restrict(L, range(2), range(2)) == L
    assert restrict(L, [1], [0, 1]) == BooleanMatrix.ones(1, 2)
    empty = restrict(L, [], [0, 1])
    assert empty.shape == (0, 2) and support_size(empty) == 0


def test_is_blocky_examples():
    cover = is_blocky(I3)
    assert [(b.row_set, b.col_set) for b in cover] == [((0,), (0,)), ((1,), (1,)), ((2,), (2,))]
    assert is_blocky(L) is None
    assert len(is_blocky(BooleanMatrix.zeros(3, 4))) == 0


def test_cover_support_examples():
    assert cover_support(I3, is_blocky(I3)) == 3
    assert cover_support(BooleanMatrix.ones(2, 2), BlockyCover((Rectangle((0, 1), (0, 1)),))) == 4
    with pytest.raises(CoverViolation) as exc:
        cover_support(L, BlockyCover((Rectangle((0,), (0, 1)),)))
    assert exc.value.cell == (0, 1)
    assert "(1,2)" in str(exc.value)


def test_cover_rejects_overlap():
    with pytest.raises(ValueError):
        BlockyCover((Rectangle((0,), (0,)), Rectangle((0,), (1,))))
    with pytest.raises(ValueError):
        BlockyCover((Rectangle((0,), (1,)), Rectangle((2,), (1,))))
    with pytest.raises(ValueError):
        Rectangle((), (1,))


def test_bad_construction():
    with pytest.raises(ValueError):
        BooleanMatrix(1, 2, [4])
    with pytest.raises(ValueError):
        BooleanMatrix.from_array([[0, 2]])


@given(bool_matrices())
def test_degree_sums_agree(A):
    assert A.row_degrees.sum() == A.col_degrees.sum() == support_size(A) == A.dense.sum()


@given(bool_matrices(), st.data())
def test_restrict_composes(A, data):
    S = data.draw(st.lists(st.integers(0, max(A.m - 1, 0)), unique=True, max_size=A.m)) if A.m else []
    T = data.draw(st.lists(st.integers(0, max(A.n - 1, 0)), unique=True, max_size=A.n)) if A.n else []
    B = restrict(A, S, T)
    S2 = data.draw(st.lists(st.integers(0, max(len(S) - 1, 0)), unique=True, max_size=len(S))) if S else []
    T2 = data.draw(st.lists(st.integers(0, max(len(T) - 1, 0)), unique=True, max_size=len(T))) if T else []
    C = restrict(B, S2, T2)
    D = restrict(A, [S[k] for k in S2], [T[k] for k in T2])
    assert C == D
    assert C.row_ids == D.row_ids and C.col_ids == D.col_ids
    assert np.array_equal(C.dense, A.dense[np.ix_([S[k] for k in S2], [T[k] for k in T2])].reshape(C.shape))


@given(bool_matrices())
def test_transpose_involution(A):
    assert A.transpose().transpose() == A
    assert np.array_equal(A.transpose().dense, A.dense.T)


@given(bool_matrices())
def test_blocky_cover_is_exact(A):
    cover = is_blocky(A)
    if cover is not None:
        assert cover.indicator(A.m, A.n) == A
        assert cover_support(A, cover) == support_size(A)


def test_blocky_iff_td_at_most_one_exhaustive():
    for m, n in [(1, 1), (2, 2), (2, 3), (3, 3), (3, 4), (4, 4)]:
        codes = range(1 << (m * n)) if m * n <= 12 else range(0, 1 << 16, 3)
        for code in codes:
            rows = [(code >> (n * i)) & ((1 << n) - 1) for i in range(m)]
            A = BooleanMatrix(m, n, rows)
            assert (is_blocky(A) is not None) == (threshold_dimension(A).d <= 1)


def test_bm_round_trip_and_errors():
    A = BooleanMatrix.from_array([[1, 0, 1], [0, 0, 0]])
    text = format_bm(A)
    assert text == "2 3\n101\n000\n"
    assert parse_bm(text) == A
    assert parse_bm("0 0\n") == BooleanMatrix.zeros(0, 0)
    for bad, line in [("2 3\n101\n11\n", 3), ("2 3\n101\n", 3), ("x 3\n", 1), ("1 2\n1a\n", 2), ("", 1)]:
        with pytest.raises(MatrixFormatError) as exc:
            parse_bm(bad)
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)


@given(bool_matrices(max_m=5, max_n=5))
def test_bm_round_trip_property(A):
    assert parse_bm(format_bm(A)) == A


def test_cover_json_round_trip():
    cover = BlockyCover((Rectangle((0, 2), (1,)), Rectangle((1,), (0, 2))))
    assert BlockyCover.from_json(cover.to_json()) == cover
    assert cover.to_json()["blocks"][0] == {"rows": [1, 3], "cols": [2]}


def test_cover_support_matches_indicator():
    for rows, cols in itertools.product([(0,), (0, 1)], [(2,), (1, 3)]):
        cover = BlockyCover((Rectangle(rows, cols), Rectangle((3,), (0,))))
        ind = cover.indicator(4, 4)
        assert cover_support(ind, cover) == support_size(ind) == cover.support_size
