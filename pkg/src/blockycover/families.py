"""Seeded instance families with explicit factorizations and known parameters.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``
(``numpy.random.default_rng``); the same spec always yields the same matrix
and factorization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .factor import Factorization, canonical_blocky_factorization
from .gamma2 import GroupFunction, group_lift, half_graph, halfgraph_gamma2_bound, walsh_algebra_norm
from .matcore import BlockyCover, BooleanMatrix, Rectangle, is_blocky

FAMILIES = (
    "identity",
    "all_ones",
    "half_graph",
    "random_blocky",
    "nested_blocky_difference",
    "group_lift_random",
    "staircase_pattern",
)


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def label(self) -> str:
        parts = [f"{k}{v}" for k, v in sorted(self.params.items())]
        return "_".join([self.name, *parts, f"s{self.seed}"])

    def to_json(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "seed": self.seed}


@dataclass(frozen=True)
class Instance:
    spec: FamilySpec
    matrix: BooleanMatrix
    factorization: Factorization | None
    truth: dict


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _random_partition_blocks(rng, m, n, k, density=1.0) -> list[Rectangle]:
    """``k`` row/column-disjoint blocks on shuffled indices; some lines stay empty."""
    rows = rng.permutation(m)
    cols = rng.permutation(n)
    used_m = max(k, int(round(m * density)))
    used_n = max(k, int(round(n * density)))
    rcuts = np.sort(rng.choice(np.arange(1, used_m), size=k - 1, replace=False)) if k > 1 else []
    ccuts = np.sort(rng.choice(np.arange(1, used_n), size=k - 1, replace=False)) if k > 1 else []
    rparts = np.split(rows[:used_m], rcuts)
    cparts = np.split(cols[:used_n], ccuts)
    return [Rectangle(tuple(int(x) for x in S), tuple(int(x) for x in T)) for S, T in zip(rparts, cparts)]


def _blocky_matrix(blocks: list[Rectangle], m: int, n: int) -> BooleanMatrix:
    return BlockyCover(tuple(blocks)).indicator(m, n)


def identity(n: int) -> Instance:
    A = BooleanMatrix.identity(n)
    F = canonical_blocky_factorization(is_blocky(A), n, n)
    return Instance(FamilySpec("identity", {"n": n}), A, F, {"gamma2": 1.0 if n else 0.0, "td": 1 if n else 0})


def all_ones(m: int, n: int) -> Instance:
    A = BooleanMatrix.ones(m, n)
    F = canonical_blocky_factorization(is_blocky(A), m, n)
    nz = m > 0 and n > 0
    return Instance(FamilySpec("all_ones", {"m": m, "n": n}), A, F, {"gamma2": 1.0 if nz else 0.0, "td": int(nz)})


def half_graph_instance(n: int) -> Instance:
    return Instance(
        FamilySpec("half_graph", {"n": n}), half_graph(n), None,
        {"td": n, "gamma2_lower": halfgraph_gamma2_bound(n)},
    )


def random_blocky(m: int, n: int, k: int, seed: int, density: float = 0.8) -> Instance:
    if not 1 <= k <= min(m, n):
        raise ValueError("need 1 <= k <= min(m, n)")
    rng = _rng(seed)
    blocks = _random_partition_blocks(rng, m, n, k, density)
    A = _blocky_matrix(blocks, m, n)
    F = canonical_blocky_factorization(is_blocky(A), m, n)
    return Instance(
        FamilySpec("random_blocky", {"m": m, "n": n, "k": k, "density": density}, seed),
        A, F, {"gamma2": 1.0, "td": 1, "blocks": k},
    )


def nested_blocky_difference(m: int, n: int, seed: int, k: int | None = None, holes: int = 3) -> Instance:
    """``A = B1 - B2`` with ``B2``'s blocks carved out of ``B1``'s blocks.

    Each of the ``k`` outer blocks receives up to ``holes`` row/column-disjoint
    sub-blocks.  The witness stacks the two canonical factorizations:
    ``U = [U1 | U2] / sqrt(2)``, ``V = sqrt(2) [V1 ; -V2]``.
    """
    rng = _rng(seed)
    if k is None:
        k = max(1, min(m, n) // 8)
    outer = _random_partition_blocks(rng, m, n, k, density=0.9)
    inner = []
    for block in outer:
        S = list(rng.permutation(block.row_set))
        T = list(rng.permutation(block.col_set))
        h = int(rng.integers(1, holes + 1))
        h = min(h, len(S), len(T))
        # hole a takes a random-size chunk of the remaining rows and columns
        rs = 0
        cs = 0
        for _ in range(h):
            if rs >= len(S) or cs >= len(T):
                break
            a = int(rng.integers(1, max(2, (len(S) - rs) // 2 + 1)))
            b = int(rng.integers(1, max(2, (len(T) - cs) // 2 + 1)))
            if a == len(S) - rs and b == len(T) - cs and rs == 0 and cs == 0:
                a -= 1  # never delete a whole outer block
                if a == 0:
                    break
            inner.append(Rectangle(tuple(int(x) for x in S[rs:rs + a]), tuple(int(x) for x in T[cs:cs + b])))
            rs += a
            cs += b
    B1 = _blocky_matrix(outer, m, n)
    B2 = _blocky_matrix(inner, m, n)
    rows = [r1 & ~r2 for r1, r2 in zip(B1.rows, B2.rows)]
    A = BooleanMatrix(m, n, rows)
    F1 = canonical_blocky_factorization(BlockyCover(tuple(outer)), m, n)
    F2 = canonical_blocky_factorization(BlockyCover(tuple(inner)), m, n)
    root2 = math.sqrt(2.0)
    U = np.hstack([F1.U, F2.U]) / root2
    V = np.vstack([F1.V, -F2.V]) * root2
    F = Factorization(U, V, 2.0)
    return Instance(
        FamilySpec("nested_blocky_difference", {"m": m, "n": n, "k": k, "holes": holes}, seed),
        A, F, {"gamma2_upper": 2.0, "outer_blocks": len(outer), "inner_blocks": len(inner)},
    )


def group_lift_random(k: int, density: float, seed: int) -> Instance:
    f = GroupFunction.random(k, density, seed)
    A, F = group_lift(f)
    return Instance(
        FamilySpec("group_lift_random", {"k": k, "density": density}, seed),
        A, F, {"gamma2": walsh_algebra_norm(f), "function": "".join(map(str, f.values))},
    )


def staircase_pattern(m: int, n: int, d: int, seed: int) -> Instance:
    """A half-graph of dimension ``d`` on random rows and columns; zeros elsewhere."""
    if d > min(m, n):
        raise ValueError("d exceeds the matrix size")
    rng = _rng(seed)
    rsel = rng.choice(m, size=d, replace=False)
    csel = rng.choice(n, size=d, replace=False)
    rows = [0] * m
    for s, i in enumerate(rsel):
        for t, j in enumerate(csel):
            if s >= t:
                rows[int(i)] |= 1 << int(j)
    A = BooleanMatrix(m, n, rows)
    return Instance(FamilySpec("staircase_pattern", {"m": m, "n": n, "d": d}, seed), A, None, {"td": d})


def generate(spec: FamilySpec) -> Instance:
    p = dict(spec.params)
    name = spec.name
    if name == "identity":
        inst = identity(p["n"])
    elif name == "all_ones":
        inst = all_ones(p["m"], p["n"])
    elif name == "half_graph":
        inst = half_graph_instance(p["n"])
    elif name == "random_blocky":
        return random_blocky(p["m"], p["n"], p["k"], spec.seed, p.get("density", 0.8))
    elif name == "nested_blocky_difference":
        return nested_blocky_difference(p["m"], p["n"], spec.seed, p.get("k"), p.get("holes", 3))
    elif name == "group_lift_random":
        return group_lift_random(p["k"], p.get("density", 0.5), spec.seed)
    elif name == "staircase_pattern":
        return staircase_pattern(p["m"], p["n"], p["d"], spec.seed)
    elif name == "projection_gadget":
        return projection_gadget(p["copies"], p["width"], spec.seed)
    else:
        raise ValueError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    return Instance(spec, inst.matrix, inst.factorization, inst.truth)


def projection_gadget(copies: int, width: int, seed: int) -> Instance:
    """Forces the projection branch; not one of the named :data:`FAMILIES`.

    Row 0 has a single 1 in column 0; ``copies`` rows share the ones in
    columns ``1..width`` and carry vectors at angle 60° to row 0's, so row
    0's Δ-set holds far more mass than its one column.  A nested difference
    on disjoint coordinates (block-diagonal) keeps the matrix non-blocky.
    All columns have norm ≤ 2.
    """
    if copies * width <= 16:
        raise ValueError("need copies * width > 16 for the guard to fire")
    inner = nested_blocky_difference(8, 8, seed)
    m1, n1 = 1 + copies, 1 + width
    c, s = math.sqrt(3.0) / 2.0, 0.5
    U1 = np.zeros((m1, 2))
    U1[0] = (1.0, 0.0)
    U1[1:] = (c, s)
    V1 = np.zeros((2, n1))
    V1[:, 0] = (1.0, -c / s)
    V1[:, 1:] = np.array([[0.0], [1.0 / s]])
    m2, n2 = inner.matrix.m, inner.matrix.n
    U = np.zeros((m1 + m2, 2 + inner.factorization.t))
    U[:m1, :2] = U1
    U[m1:, 2:] = inner.factorization.U
    V = np.zeros((2 + inner.factorization.t, n1 + n2))
    V[:2, :n1] = V1
    V[2:, n1:] = inner.factorization.V
    rows = [1] + [((1 << width) - 1) << 1] * copies + [r << n1 for r in inner.matrix.rows]
    A = BooleanMatrix(m1 + m2, n1 + n2, rows)
    F = Factorization(U, V, 2.0)
    return Instance(
        FamilySpec("projection_gadget", {"copies": copies, "width": width}, seed),
        A, F, {"gamma2_upper": 2.0},
    )


# -- standard corpora --------------------------------------------------------

def regression_specs() -> list[FamilySpec]:
    """Twenty fixed nested-difference instances (λ = 2, sides up to 64)."""
    sizes = [(16, 16), (24, 20), (32, 32), (40, 48), (64, 64)]
    specs = []
    for idx in range(20):
        m, n = sizes[idx % len(sizes)]
        specs.append(FamilySpec("nested_blocky_difference", {"m": m, "n": n, "holes": 3}, 1000 + idx))
    return specs


def corpus_specs() -> list[FamilySpec]:
    """The acceptance corpus: every family, over a thousand instances in all."""
    specs: list[FamilySpec] = []
    specs += [FamilySpec("identity", {"n": n}) for n in range(1, 33)]
    specs += [FamilySpec("all_ones", {"m": m, "n": n}) for m in (1, 2, 5, 16) for n in (1, 3, 8, 32)]
    specs += [FamilySpec("half_graph", {"n": n}) for n in range(1, 13)]
    rng = _rng(20240601)
    for idx in range(300):
        m, n = (int(x) for x in rng.integers(2, 65, size=2))
        k = int(rng.integers(1, min(m, n) + 1))
        specs.append(FamilySpec("random_blocky", {"m": m, "n": n, "k": k, "density": 0.8}, idx))
    for idx in range(400):
        m, n = (int(x) for x in rng.integers(4, 33, size=2))
        specs.append(FamilySpec("nested_blocky_difference", {"m": m, "n": n, "holes": 3}, idx))
    specs += regression_specs()
    for idx in range(240):
        k = 1 + idx % 5
        density = (0.25, 0.5, 0.75)[idx % 3]
        specs.append(FamilySpec("group_lift_random", {"k": k, "density": density}, idx))
    for idx in range(60):
        m, n = (int(x) for x in rng.integers(3, 25, size=2))
        d = int(rng.integers(1, min(m, n) + 1))
        specs.append(FamilySpec("staircase_pattern", {"m": m, "n": n, "d": d}, idx))
    for idx in range(12):
        specs.append(FamilySpec("projection_gadget", {"copies": 3 + idx % 4, "width": 6 + idx % 5}, idx))
    return specs
