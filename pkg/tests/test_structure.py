from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockycover.acceptance import brute_force_td
from blockycover.factor import Factorization, row_masses
from blockycover.families import nested_blocky_difference, staircase_pattern
from blockycover.gamma2 import GroupFunction, group_lift, half_graph, walsh_algebra_norm
from blockycover.matcore import BooleanMatrix, restrict
from blockycover.structure import (
    PreconditionError,
    Staircase,
    lemma_split,
    max_one_rectangle,
    td_upper_bound,
    threshold_dimension,
)

from conftest import bool_matrices, brute_max_rect

L = BooleanMatrix.from_array([[1, 0], [1, 1]])


def test_td_examples():
    assert threshold_dimension(BooleanMatrix.zeros(3, 3)).d == 0
    assert threshold_dimension(BooleanMatrix.identity(5)).d == 1
    assert threshold_dimension(BooleanMatrix.ones(3, 4)).d == 1
    assert threshold_dimension(L).d == 2
    for n in range(1, 13):
        res = threshold_dimension(half_graph(n))
        assert res.d == n and res.exact
        assert res.witness.holds_in(half_graph(n))


def test_td_all_3x3_match_brute_force():
    for code in range(512):
        A = BooleanMatrix(3, 3, [(code >> (3 * i)) & 7 for i in range(3)])
        res = threshold_dimension(A)
        assert res.d == brute_force_td(A)
        if res.d:
            assert res.witness.holds_in(A) and res.witness.d == res.d


@given(bool_matrices(max_m=5, max_n=5))
def test_td_matches_brute_force(A):
    res = threshold_dimension(A)
    assert res.exact
    assert res.d == brute_force_td(A)
    assert res.d <= td_upper_bound(A)


@given(bool_matrices(min_m=1, min_n=1, max_m=7, max_n=7), st.data())
def test_td_monotone_under_restriction(A, data):
    S = data.draw(st.lists(st.integers(0, A.m - 1), unique=True, min_size=0, max_size=A.m))
    T = data.draw(st.lists(st.integers(0, A.n - 1), unique=True, min_size=0, max_size=A.n))
    assert threshold_dimension(restrict(A, S, T)).d <= threshold_dimension(A).d


def test_td_staircase_family():
    for seed in range(15):
        inst = staircase_pattern(14, 11, 1 + seed % 8, seed)
        assert threshold_dimension(inst.matrix).d == inst.truth["td"]


def test_td_large_inexact_bounds():
    A = half_graph(40)
    res = threshold_dimension(A, exact_max_dim=24, node_budget=0)
    assert res.d <= 40 <= res.upper
    assert res.witness.holds_in(A)
    res = threshold_dimension(A)  # budgeted exact search succeeds on this one
    assert res.d == 40


def test_td_budget_exhaustion_falls_back():
    rng = np.random.default_rng(3)
    A = BooleanMatrix.from_array(rng.integers(0, 2, size=(40, 40)))
    res = threshold_dimension(A, node_budget=50)
    assert res.witness.holds_in(A)
    assert res.d <= res.upper
    if not res.exact:
        assert res.d < res.upper


def test_staircase_holds_in():
    assert Staircase((0, 1), (0, 1)).holds_in(L)
    assert not Staircase((1, 0), (0, 1)).holds_in(L)
    assert not Staircase((0, 0), (0, 1)).holds_in(L)


def test_td_bounded_for_small_norm_lifts():
    # desk constant c = 2: TD <= 2^(2 λ) for every lift with λ <= 2 on at most 16 points
    for k in (1, 2, 3):
        for code in range(1, 1 << (1 << k)):
            f = GroupFunction(k, [(code >> x) & 1 for x in range(1 << k)])
            lam = walsh_algebra_norm(f)
            if lam > 2 + 1e-9:
                continue
            A, _ = group_lift(f)
            assert threshold_dimension(A).d <= 2 ** (2 * lam)
    for seed in range(200):
        f = GroupFunction.random(4, 0.5, seed)
        lam = walsh_algebra_norm(f)
        if lam <= 2:
            assert threshold_dimension(group_lift(f)[0]).d <= 2 ** (2 * lam)


# -- rectangles ---------------------------------------------------------------

def test_rect_examples():
    r = max_one_rectangle(BooleanMatrix.ones(3, 5), "exact")
    assert r.size == 15 and r.rect.dims == (3, 5)
    assert max_one_rectangle(BooleanMatrix.identity(6), "exact").size == 1
    assert max_one_rectangle(BooleanMatrix.identity(6), "greedy").size == 1
    with pytest.raises(ValueError):
        max_one_rectangle(BooleanMatrix.zeros(2, 2))


def test_rect_complement_of_identity():
    A = BooleanMatrix.from_array(1 - np.eye(4, dtype=int))
    assert brute_max_rect(A) == 4
    r = max_one_rectangle(A, "exact")
    assert r.size == 4
    assert all(A[i, j] for i in r.rect.row_set for j in r.rect.col_set)


@given(bool_matrices(min_m=1, min_n=1, max_m=7, max_n=7))
def test_rect_exact_matches_brute_force(A):
    if A.is_zero():
        return
    exact = max_one_rectangle(A, "exact")
    greedy = max_one_rectangle(A, "greedy")
    assert exact.size == brute_max_rect(A)
    assert exact.size >= greedy.size
    for r in (exact, greedy):
        assert all(A[i, j] for i in r.rect.row_set for j in r.rect.col_set)


def test_rect_wide_matrix_transposes():
    rng = np.random.default_rng(1)
    A = BooleanMatrix.from_array((rng.random((6, 40)) < 0.6).astype(int))
    exact = max_one_rectangle(A, "exact")
    assert exact.size == brute_max_rect(A.transpose())
    assert max_one_rectangle(A, "auto").mode == "exact"


def test_rect_auto_goes_greedy_when_large():
    rng = np.random.default_rng(2)
    A = BooleanMatrix.from_array((rng.random((30, 30)) < 0.5).astype(int))
    r = max_one_rectangle(A)
    assert r.mode == "greedy"
    assert all(A[i, j] for i in r.rect.row_set for j in r.rect.col_set)
    with pytest.raises(ValueError):
        max_one_rectangle(A, "exact")


def test_rect_greedy_deterministic():
    inst = nested_blocky_difference(40, 40, seed=4)
    a = max_one_rectangle(inst.matrix, "greedy")
    b = max_one_rectangle(inst.matrix, "greedy")
    assert a == b


# -- the case split -------------------------------------------------------------

def ones_rank1(m, n):
    return Factorization(np.ones((m, 1)), np.ones((1, n)), 1.0)


def test_split_examples():
    A = BooleanMatrix.ones(3, 4)
    out = lemma_split(A, ones_rank1(3, 4), 0)
    assert out.kind == "Rect" and out.pivot_col == 0
    assert out.row_part == (0, 1, 2) and out.delta == (0, 1, 2)
    I = BooleanMatrix.identity(3)
    out = lemma_split(I, Factorization(np.eye(3), np.eye(3), 1.0), 0)
    assert out.kind == "Rect" and out.row_part == (0,) and out.cols == (0,)


def test_split_rejects_bad_preconditions():
    A = BooleanMatrix.from_array([[0, 0], [1, 1]])
    with pytest.raises(PreconditionError):
        lemma_split(A, Factorization(np.array([[0.0], [1.0]]), np.ones((1, 2)), 1.0), 0)


def _splits(inst):
    A, F = inst.matrix, inst.factorization
    M = row_masses(A, F)
    lam2 = F.lam ** 2
    for i in range(A.m):
        if not A.rows[i]:
            continue
        ok = M.delta_all[i] <= 4 * lam2 * M.all_r[i] and M.all_r[i] <= 2 * lam2 * M.in_delta_r[i]
        if ok:
            yield i, lemma_split(A, F, i, M)


def test_split_inequalities_on_nested_differences():
    kinds = set()
    for seed in range(25):
        inst = nested_blocky_difference(18, 16, seed=seed)
        A, F = inst.matrix, inst.factorization
        F_total = A.dense.sum()
        for i, out in _splits(inst):
            kinds.add(out.kind)
            assert 2 * out.retained_ones >= out.inner_ones
            assert out.complement_ones >= F_total - 10 * F.lam ** 4 * out.inner_ones
            # counts from scratch
            D = list(out.delta)
            R = list(out.cols)
            assert out.inner_ones == A.dense[np.ix_(D, R)].sum()
            j = min(R, key=lambda t: (sum(A[s, t] for s in D), t))
            assert out.pivot_col == j
            if out.kind == "TDDrop":
                sub = restrict(A, out.row_part, R)
                assert threshold_dimension(sub).d <= threshold_dimension(A).d - 1
    assert "Rect" in kinds


def test_split_tddrop_on_lifts():
    drops = 0
    for seed in range(30):
        A, F = group_lift(GroupFunction.random(4, 0.5, seed))
        inst = type("I", (), {"matrix": A, "factorization": F})
        for i, out in _splits(inst):
            assert 2 * out.retained_ones >= out.inner_ones
            if out.kind == "TDDrop":
                drops += 1
                sub = restrict(A, out.row_part, list(out.cols))
                assert threshold_dimension(sub).d <= threshold_dimension(A).d - 1
    assert drops > 0
