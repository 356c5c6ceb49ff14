"""λ-factorizations and the quantities built from them.

A λ-factorization of an ``m x n`` boolean matrix ``A`` is a pair ``U`` (m x t),
``V`` (t x n) with ``UV = A``, rows of ``U`` of norm at most 1 and columns of
``V`` of norm at most ``λ``.  This module validates such pairs and computes
the potential ``Σ_s ||u_s||² |R_s|``, the sets ``Δ_i`` of rows strongly
correlated with row ``i``, pivotal rows and the column-projection step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .matcore import BlockyCover, BooleanMatrix, bits_of, restrict, support_size

DEFAULT_TOL = 1e-9


class FactorizationError(ValueError):
    pass


@dataclass(eq=False)
class Factorization:
    U: np.ndarray
    V: np.ndarray
    lam: float
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        self.U = np.array(self.U, dtype=np.float64, ndmin=2)
        self.V = np.array(self.V, dtype=np.float64, ndmin=2)
        self.lam = float(self.lam)
        self.tol = float(self.tol)
        if self.U.ndim != 2 or self.V.ndim != 2:
            raise FactorizationError("U and V must be 2-d")
        if self.U.shape[1] != self.V.shape[0]:
            raise FactorizationError(
                f"inner dimensions differ: U is {self.U.shape}, V is {self.V.shape}"
            )
        if not self.lam > 0:
            raise FactorizationError("lambda must be positive")
        if self.tol < 0:
            raise FactorizationError("tol must be nonnegative")
        m, n = self.m, self.n
        if self.t > max(m + n, 1):
            raise FactorizationError(f"ambient dimension t={self.t} exceeds m+n={m + n}")
        self.U.setflags(write=False)
        self.V.setflags(write=False)

    @property
    def m(self) -> int:
        return self.U.shape[0]

    @property
    def n(self) -> int:
        return self.V.shape[1]

    @property
    def t(self) -> int:
        return self.U.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        """``G[r, s] = <u_r, u_s>``."""
        return self.U @ self.U.T

    @cached_property
    def row_norms_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.U, self.U)

    @cached_property
    def col_norms_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.V, self.V)

    @cached_property
    def product(self) -> np.ndarray:
        return self.U @ self.V

    @cached_property
    def delta_matrix(self) -> np.ndarray:
        """Boolean ``D[i, s] = (s ∈ Δ_i)``."""
        return self.gram ** 2 >= 1.0 / (2.0 * self.lam ** 2)

    def restrict(self, S: Sequence[int], T: Sequence[int]) -> "Factorization":
        """Keep rows ``S`` of ``U`` and columns ``T`` of ``V``.

        Deleting vectors cannot increase either norm bound, so the result is a
        λ-factorization of the corresponding submatrix.  The ambient dimension
        is compressed when it would exceed ``|S| + |T|``.
        """
        U = self.U[list(S), :]
        V = self.V[:, list(T)]
        return Factorization(*_compress(U, V), self.lam, self.tol)


def _compress(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m, t = U.shape
    n = V.shape[1]
    k = m + n
    if t <= max(k, 1):
        return U, V
    if k == 0:
        return np.zeros((0, 1)), np.zeros((1, 0))
    # all u_s and v_t lie in span(Q); rotating into that basis preserves every inner product
    Q, _ = np.linalg.qr(np.hstack([U.T, V]))
    return U @ Q, Q.T @ V


@dataclass(frozen=True)
class Violation:
    kind: str  # "row_norm" | "col_norm" | "reproduction" | "shape"
    location: tuple[int, ...]
    magnitude: float

    def __str__(self) -> str:
        if self.kind == "shape":
            return f"shape {self.location[0]}x{self.location[1]} does not match the matrix"
        loc = ",".join(str(x + 1) for x in self.location)
        return f"{self.kind} at ({loc}): {self.magnitude:.3g}"


def verify(A: BooleanMatrix, F: Factorization) -> list[Violation]:
    """All violations of the λ-factorization conditions; empty means valid."""
    if F.m != A.m or F.n != A.n:
        return [Violation("shape", (F.m, F.n), float("nan"))]
    out = []
    row_norms = np.sqrt(F.row_norms_sq)
    for i in np.flatnonzero(row_norms > 1.0 + F.tol):
        out.append(Violation("row_norm", (int(i),), float(row_norms[i] - 1.0)))
    col_norms = np.sqrt(F.col_norms_sq)
    for j in np.flatnonzero(col_norms > F.lam + F.tol):
        out.append(Violation("col_norm", (int(j),), float(col_norms[j] - F.lam)))
    err = np.abs(F.product - A.dense)
    for i, j in zip(*np.nonzero(err > F.tol)):
        out.append(Violation("reproduction", (int(i), int(j)), float(err[i, j])))
    return out


def require_valid(A: BooleanMatrix, F: Factorization) -> None:
    bad = verify(A, F)
    if bad:
        shown = "; ".join(str(v) for v in bad[:5])
        more = f" (+{len(bad) - 5} more)" if len(bad) > 5 else ""
        raise FactorizationError(f"not a {F.lam:g}-factorization: {shown}{more}")


def reproduction_error(A: BooleanMatrix, F: Factorization) -> float:
    if A.m == 0 or A.n == 0:
        return 0.0
    return float(np.max(np.abs(F.product - A.dense)))


def canonical_blocky_factorization(cover: BlockyCover, m: int, n: int) -> Factorization:
    """λ=1 witness: ``u_i = e_k`` for ``i ∈ S_k`` and ``v_j = e_k`` for ``j ∈ T_k``."""
    k = len(cover)
    U = np.zeros((m, k))
    V = np.zeros((k, n))
    for idx, block in enumerate(cover):
        U[list(block.row_set), idx] = 1.0
        V[idx, list(block.col_set)] = 1.0
    return Factorization(U, V, 1.0, 0.0)


@dataclass(frozen=True)
class PotentialReport:
    value: float
    per_row: tuple[float, ...]
    lower: float
    upper: float

    def within_bounds(self, tol: float) -> bool:
        return self.lower - tol <= self.value <= self.upper + tol


def potential(A: BooleanMatrix, F: Factorization, check: bool = True) -> PotentialReport:
    """``Σ_s ||u_s||² |R_s|`` with its bracket ``[F/λ², F]``."""
    if check:
        require_valid(A, F)
    per_row = F.row_norms_sq * A.row_degrees
    # fixed summation order
    value = float(sum(per_row.tolist()))
    frob = support_size(A)
    return PotentialReport(value, tuple(per_row.tolist()), frob / F.lam ** 2, float(frob))


def delta_set(F: Factorization, i: int) -> list[int]:
    """``Δ_i = {s : <u_i,u_s>² ≥ 1/(2λ²)}``, ties included."""
    if not 0 <= i < F.m:
        raise IndexError(f"row index {i} out of range")
    return [int(s) for s in np.flatnonzero(F.delta_matrix[i])]


def large_pair_count(F: Factorization, A: BooleanMatrix, t: int) -> int:
    """Ordered pairs ``(r, s) ∈ C_t²`` with ``<u_r,u_s>² ≥ 1/(2λ²)``."""
    C = bits_of(A.cols[t])
    if not C:
        return 0
    return int(F.delta_matrix[np.ix_(C, C)].sum())


@dataclass(frozen=True)
class InnerProductSums:
    row_sums: np.ndarray  # Σ_{r,s∈R_i} <v_r,v_s>²
    col_sums: np.ndarray  # Σ_{r,s∈C_j} <u_r,u_s>²
    row_sizes: np.ndarray
    col_sizes: np.ndarray

    def violations(self, lam: float, tol: float = 1e-9) -> list[str]:
        out = []
        r2 = self.row_sizes.astype(float) ** 2
        c2 = self.col_sizes.astype(float) ** 2
        for i in np.flatnonzero(self.row_sums < r2 - tol):
            out.append(f"row {i + 1}: sum below |R_i|^2")
        for i in np.flatnonzero(self.row_sums > lam ** 4 * r2 + tol):
            out.append(f"row {i + 1}: sum above lam^4 |R_i|^2")
        for j in np.flatnonzero(self.col_sums < c2 / lam ** 2 - tol):
            out.append(f"col {j + 1}: sum below |C_j|^2/lam^2")
        for j in np.flatnonzero(self.col_sums > c2 + tol):
            out.append(f"col {j + 1}: sum above |C_j|^2")
        return out


def inner_product_sums(F: Factorization, A: BooleanMatrix) -> InnerProductSums:
    dense = A.dense.astype(np.float64)
    vg2 = (F.V.T @ F.V) ** 2
    ug2 = F.gram ** 2
    # Σ_{r,s∈R_i} x_rs = a_i^T X a_i with a_i the indicator of R_i
    row_sums = np.einsum("ir,rs,is->i", dense, vg2, dense)
    col_sums = np.einsum("rj,rs,sj->j", dense, ug2, dense)
    return InnerProductSums(row_sums, col_sums, A.row_degrees.copy(), A.col_degrees.copy())


def trace_inequality(X: np.ndarray, Y: np.ndarray) -> tuple[float, float]:
    """``(||XY||_F², ||XX^T||_F·||Y^T Y||_F)``; the first never exceeds the second."""
    lhs = float(np.linalg.norm(X @ Y) ** 2)
    rhs = float(np.linalg.norm(X @ X.T) * np.linalg.norm(Y.T @ Y))
    return lhs, rhs


@dataclass(frozen=True)
class RowMasses:
    """Per-row Frobenius masses used by the pivot and branch rules.

    ``in_delta_r[i] = ||A_{Δ_i×R_i}||²``, ``delta_all[i] = ||A_{Δ_i×[n]}||²``,
    ``all_r[i] = ||A_{[m]×R_i}||²``.
    """

    in_delta_r: np.ndarray
    delta_all: np.ndarray
    all_r: np.ndarray


def row_masses(A: BooleanMatrix, F: Factorization) -> RowMasses:
    dense = A.dense.astype(np.int64)
    D = F.delta_matrix.astype(np.int64)
    overlap = dense @ dense.T  # |R_i ∩ R_s|
    in_delta_r = (D * overlap).sum(axis=1)
    delta_all = D @ A.row_degrees
    all_r = dense @ A.col_degrees
    return RowMasses(in_delta_r, delta_all, all_r)


@dataclass(frozen=True)
class PivotalRow:
    row: int
    in_delta_r: int  # ||A_{Δ_i×R_i}||²
    all_r: int  # ||A_{[m]×R_i}||²

    @property
    def ratio(self) -> float:
        return self.in_delta_r / self.all_r


class InequalityViolation(AssertionError):
    """A proven inequality failed; indicates an invalid factorization or a bug."""


def pivotal_row(A: BooleanMatrix, F: Factorization, masses: RowMasses | None = None) -> PivotalRow:
    """Nonzero row maximizing ``||A_{Δ_i×R_i}||² / ||A_{[m]×R_i}||²``.

    The chosen row satisfies ``2λ²·||A_{Δ_i×R_i}||² ≥ ||A_{[m]×R_i}||²``;
    ties go to the smallest index.
    """
    if masses is None:
        masses = row_masses(A, F)
    best = None
    for i in range(A.m):
        if not A.rows[i]:
            continue
        num, den = int(masses.in_delta_r[i]), int(masses.all_r[i])
        # compare num/den > best_num/best_den without division
        if best is None or num * best[2] > best[1] * den:
            best = (i, num, den)
    if best is None:
        raise ValueError("pivotal_row needs a matrix with at least one 1-entry")
    i, num, den = best
    if 2.0 * F.lam ** 2 * num < den - F.tol:
        raise InequalityViolation(
            f"no pivotal row: best ratio {num}/{den} below 1/(2 lam^2) for lam={F.lam}"
        )
    return PivotalRow(i, num, den)


@dataclass(frozen=True)
class Projection:
    matrix: BooleanMatrix
    factorization: Factorization
    removed_cols: tuple[int, ...]
    eta: int


def project_columns(A: BooleanMatrix, F: Factorization, i: int) -> Projection:
    """Delete the columns ``R_i`` and project every ``u_s`` orthogonally to ``u_i``.

    Since ``<u_i, v_t> = 0`` off ``R_i``, the projected rows still reproduce
    the surviving columns.
    """
    Ri = bits_of(A.rows[i])
    if not Ri:
        raise ValueError(f"row {i + 1} is zero; nothing to project")
    ui = F.U[i]
    norm_sq = float(ui @ ui)
    if norm_sq <= F.tol ** 2 or np.sqrt(norm_sq) <= F.tol:
        raise FactorizationError(f"pivot row {i + 1} has (near) zero vector")
    coef = (F.U @ ui) / norm_sq
    U2 = F.U - np.outer(coef, ui)
    keep = [j for j in range(A.n) if not (A.rows[i] >> j) & 1]
    V2 = F.V[:, keep]
    A2 = restrict(A, range(A.m), keep)
    U2, V2 = _compress(U2, V2)
    F2 = Factorization(U2, V2, F.lam, F.tol)
    return Projection(A2, F2, tuple(Ri), support_size(A) - support_size(A2))


# -- .lf text format -----------------------------------------------------------

def format_lf(F: Factorization) -> str:
    lines = [f"{F.m} {F.n} {F.t} {F.lam!r}"]
    for row in F.U:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    for row in F.V:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def parse_lf(text: str, tol: float = DEFAULT_TOL) -> Factorization:
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise FactorizationError("empty factorization file")
    head = lines[0].split()
    if len(head) != 4:
        raise FactorizationError("line 1: header must be 'm n t lambda'")
    try:
        m, n, t = (int(x) for x in head[:3])
        lam = float(head[3])
    except ValueError as exc:
        raise FactorizationError(f"line 1: {exc}") from None
    body = lines[1:]
    if len(body) < m + t:
        raise FactorizationError(f"expected {m + t} data lines, found {len(body)}")

    def parse_row(k: int, width: int) -> list[float]:
        parts = body[k].split()
        if len(parts) != width:
            raise FactorizationError(f"line {k + 2}: expected {width} numbers, found {len(parts)}")
        try:
            return [float(x) for x in parts]
        except ValueError as exc:
            raise FactorizationError(f"line {k + 2}: {exc}") from None

    U = np.array([parse_row(k, t) for k in range(m)], dtype=float).reshape(m, t)
    V = np.array([parse_row(m + k, n) for k in range(t)], dtype=float).reshape(t, n)
    return Factorization(U, V, lam, tol)


def read_lf(path: str | Path, tol: float = DEFAULT_TOL) -> Factorization:
    return parse_lf(Path(path).read_text(), tol)


def write_lf(F: Factorization, path: str | Path) -> None:
    Path(path).write_text(format_lf(F))
