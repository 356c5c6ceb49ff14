from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockycover.acceptance import naive_walsh
from blockycover.factor import verify
from blockycover.gamma2 import (
    CyclicIndicator,
    GroupFunction,
    als_factorize,
    als_search,
    ball_lstsq,
    character_table,
    format_group_function,
    fwht,
    group_lift,
    half_graph,
    halfgraph_gamma2_bound,
    halfgraph_lower_bound,
    parse_group_function,
    walsh_algebra_norm,
    wraparound_half_graph,
)
from blockycover.matcore import BooleanMatrix, restrict


def test_fwht_all_small_functions():
    for k in range(4):
        for code in range(1 << (1 << k)):
            f = GroupFunction(k, [(code >> x) & 1 for x in range(1 << k)])
            assert np.allclose(f.coeffs, naive_walsh(f.values), atol=1e-12)


@given(st.lists(st.integers(0, 1), min_size=16, max_size=16))
def test_fwht_sampled_k4(vals):
    f = GroupFunction(4, vals)
    assert np.allclose(f.coeffs, naive_walsh(f.values), atol=1e-12)
    assert np.allclose(f.inverse(), vals)


def test_fwht_rejects_bad_length():
    with pytest.raises(ValueError):
        fwht([1, 0, 1])


def test_character_table_orthogonal():
    H = character_table(3)
    assert np.array_equal(H @ H.T, 8 * np.eye(8))


def test_algebra_norm_examples():
    assert walsh_algebra_norm(GroupFunction(2, [1, 0, 0, 0])) == pytest.approx(1.0)
    assert walsh_algebra_norm(GroupFunction(2, [1, 1, 1, 1])) == pytest.approx(1.0)
    # the all-ones function minus one point on Z_2^3
    f = GroupFunction(3, [1, 1, 0, 1, 1, 1, 1, 1])
    assert walsh_algebra_norm(f) == pytest.approx(7 / 4)
    # subgroup and coset indicators have norm 1
    for gens, shift in [((1,), 0), ((1, 2), 4), ((3, 5), 6), ((), 7)]:
        assert walsh_algebra_norm(GroupFunction.coset(3, gens, shift)) == pytest.approx(1.0)


@given(st.integers(1, 4), st.floats(0.1, 0.9), st.integers(0, 10_000))
def test_lift_reproduces(k, density, seed):
    f = GroupFunction.random(k, density, seed)
    A, F = group_lift(f)
    assert verify(A, F) == []
    assert F.lam == pytest.approx(walsh_algebra_norm(f))
    assert np.allclose(F.U @ F.V, A.dense, atol=1e-9)
    for x in range(1 << k):
        for y in range(1 << k):
            assert A[x, y] == f.values[x ^ y]


def test_lift_rejects_zero():
    with pytest.raises(ValueError):
        group_lift(GroupFunction(2, [0, 0, 0, 0]))


def test_group_function_io():
    f = GroupFunction(2, [0, 1, 1, 0])
    assert format_group_function(f) == "2\n0110\n"
    assert parse_group_function("2\n0110\n") == f
    for bad in ["2\n011\n", "x\n0110\n", "2\n01a0\n", "2\n"]:
        with pytest.raises(ValueError):
            parse_group_function(bad)
    with pytest.raises(ValueError):
        GroupFunction(2, [0, 1, 2, 0])


# -- half-graph ------------------------------------------------------------------

def test_cyclic_indicator_small_values():
    assert halfgraph_lower_bound(1) == pytest.approx(1.0)
    assert halfgraph_lower_bound(2) == pytest.approx(0.5 + 1 / math.sqrt(2), abs=1e-12)
    assert halfgraph_gamma2_bound(2) == pytest.approx(halfgraph_lower_bound(2) - 1)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 100, 1025])
def test_cyclic_indicator_closed_form(n):
    c = CyclicIndicator.compute(n)
    assert np.allclose(c.coeffs, c.closed_form(), atol=1e-12)
    assert np.allclose(c.coeffs[2::2], 0, atol=1e-12)


def test_cyclic_indicator_grows_logarithmically():
    vals = [halfgraph_lower_bound(2 ** j) for j in range(1, 11)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    diffs = np.diff(vals)
    # growth is logarithmic: the increment per doubling settles to a constant
    assert np.all(diffs > 0.05) and np.ptp(diffs[-4:]) < 0.01


def test_wraparound_matches_cyclic_dft():
    n = 5
    H = wraparound_half_graph(n)
    c = CyclicIndicator.compute(n).coeffs
    N = 2 * n
    x = np.arange(N)
    F = np.exp(2j * np.pi * np.outer(x, x) / N)
    # H = F diag(c) F^*, so its trace norm over N equals the algebra norm
    M = (F * c[None, :]) @ F.conj().T
    assert np.allclose(M.real, H.dense, atol=1e-9)
    s = np.linalg.svd(H.dense.astype(float), compute_uv=False)
    assert s.sum() / N == pytest.approx(halfgraph_lower_bound(n))
    assert restrict(H, range(n), range(n)) == half_graph(n)


# -- ALS --------------------------------------------------------------------------

def test_ball_lstsq_unconstrained_and_clipped():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((6, 3))
    B = rng.standard_normal((6, 4))
    free = np.linalg.lstsq(M, B, rcond=None)[0]
    assert np.allclose(ball_lstsq(M, B, 1e6), free)
    X = ball_lstsq(M, B, 0.3)
    norms = np.linalg.norm(X, axis=0)
    assert np.all(norms <= 0.3 + 1e-9)
    # optimality against random feasible points
    for _ in range(200):
        Y = rng.standard_normal(X.shape)
        Y *= 0.3 * rng.random(Y.shape[1]) / np.linalg.norm(Y, axis=0)
        assert np.all(np.linalg.norm(M @ Y - B, axis=0) >= np.linalg.norm(M @ X - B, axis=0) - 1e-9)


def test_ball_lstsq_zero_matrix():
    assert np.array_equal(ball_lstsq(np.zeros((3, 2)), np.ones((3, 1)), 1.0), np.zeros((2, 1)))


def test_als_identity_and_ones():
    F = als_factorize(BooleanMatrix.identity(8), 1.0, seed=0)
    assert F is not None and verify(BooleanMatrix.identity(8), F) == []
    F = als_factorize(BooleanMatrix.ones(4, 6), 1.0, seed=1)
    assert F is not None


def test_als_negative_control():
    L = BooleanMatrix.from_array([[1, 0], [1, 1]])
    report = als_search(L, 1.0, seed=0, restarts=8)
    assert report.factorization is None
    assert report.best_error > 1e-3
    # γ₂ of L is 2/√3 = 1.1547...
    assert als_factorize(L, 1.155, seed=0) is not None
    assert als_factorize(L, 1.15, seed=0, restarts=3) is None


def test_als_lift_near_optimum():
    f = GroupFunction(2, [1, 1, 0, 1])
    A, _ = group_lift(f)
    F = als_factorize(A, walsh_algebra_norm(f) + 0.01, seed=3)
    assert F is not None and verify(A, F) == []


def test_als_zero_matrix_and_bad_target():
    F = als_factorize(BooleanMatrix.zeros(2, 3), 1.0)
    assert F is not None and np.all(F.U @ F.V == 0)
    with pytest.raises(ValueError):
        als_search(BooleanMatrix.identity(2), 0.5)
