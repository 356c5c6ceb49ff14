"""Threshold dimension, 1-rectangle search and the Δ×R case split."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .factor import Factorization, RowMasses, row_masses
from .matcore import BooleanMatrix, Rectangle, bits_of, mask_of

TD_EXACT_MAX_DIM = 24
TD_NODE_BUDGET = 100_000
RECT_EXACT_MAX_SIDE = 20
GREEDY_SEEDS = 16


@dataclass(frozen=True)
class Staircase:
    row_seq: tuple[int, ...]
    col_seq: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.row_seq)

    def holds_in(self, A: BooleanMatrix) -> bool:
        """``A(i_s, j_t) = 1`` iff ``s >= t`` for all ``s, t``."""
        if len(self.row_seq) != len(self.col_seq):
            return False
        if len(set(self.row_seq)) != self.d or len(set(self.col_seq)) != self.d:
            return False
        for s, i in enumerate(self.row_seq):
            for t, j in enumerate(self.col_seq):
                if A[i, j] != (s >= t):
                    return False
        return True


@dataclass(frozen=True)
class TDResult:
    d: int  # exact value, or the witnessed lower bound when inexact
    witness: Staircase | None
    exact: bool
    upper: int

    def __iter__(self):
        return iter((self.d, self.witness))


def td_upper_bound(A: BooleanMatrix) -> int:
    """Cheap upper bound: staircase rows are distinct and row ``i_d`` has ``d`` ones."""
    if A.is_zero():
        return 0
    distinct_rows = len({r for r in A.rows if r})
    distinct_cols = len({c for c in A.cols if c})
    return int(min(distinct_rows, distinct_cols, A.row_degrees.max(), A.col_degrees.max()))


def _greedy_staircase(A: BooleanMatrix) -> Staircase:
    rows, cols = A.rows, A.cols
    P = mask_of(i for i in range(A.m) if rows[i])
    Q = mask_of(j for j in range(A.n) if cols[j])
    rseq, cseq = [], []
    while True:
        best = None
        for r in bits_of(P):
            Qn = Q & ~rows[r]
            for c in bits_of(rows[r] & Q):
                Pn = P & cols[c] & ~(1 << r)
                score = min(Pn.bit_count(), Qn.bit_count())
                if best is None or score > best[0]:
                    best = (score, r, c, Pn, Qn)
        if best is None:
            break
        _, r, c, P, Q = best
        rseq.append(r)
        cseq.append(c)
    return Staircase(tuple(rseq), tuple(cseq))


def threshold_dimension(
    A: BooleanMatrix,
    exact_max_dim: int = TD_EXACT_MAX_DIM,
    node_budget: int = TD_NODE_BUDGET,
    backend: str | None = None,
) -> TDResult:
    """Largest ``d`` with a staircase ``A(i_s, j_t) = [s >= t]``; ``TD(0) = 0``.

    Exact by memoized search when ``max(m, n) <= exact_max_dim``.  Larger
    inputs get one budgeted exact attempt (``node_budget`` states, 0 to skip);
    if that runs out, a greedy staircase gives the lower bound and
    :func:`td_upper_bound` the upper one.
    """
    if A.is_zero():
        return TDResult(0, None, True, 0)
    upper = td_upper_bound(A)
    small = max(A.m, A.n) <= exact_max_dim
    if small or node_budget > 0:
        limit = 0 if small else node_budget
        d, rseq, cseq, exact = kernels.td_search(A.rows, A.cols, A.m, A.n, limit, backend)
        if exact:
            return TDResult(d, Staircase(tuple(rseq), tuple(cseq)), True, d)
    w = _greedy_staircase(A)
    return TDResult(w.d, w, w.d == upper, upper)


# -- 1-rectangles -----------------------------------------------------------

@dataclass(frozen=True)
class RectResult:
    rect: Rectangle
    mode: str

    @property
    def size(self) -> int:
        return self.rect.size


def _exact_rect(A: BooleanMatrix, backend=None) -> Rectangle:
    if A.n <= A.m:
        area, rows, cmask = kernels.max_rect_search(A.rows, A.n, backend)
        return Rectangle(tuple(rows), tuple(bits_of(cmask)))
    area, cols, rmask = kernels.max_rect_search(A.cols, A.m, backend)
    return Rectangle(tuple(bits_of(rmask)), tuple(cols))


def _peel(A: BooleanMatrix, S: list[int], T: list[int]) -> tuple[list[int], list[int]]:
    """Drop the lowest-density line until ``S × T`` is all ones, then close it."""
    rows, cols = A.rows, A.cols
    Smask, Tmask = mask_of(S), mask_of(T)
    while Smask and Tmask:
        ns, nt = Smask.bit_count(), Tmask.bit_count()
        worst = None  # (ones, size, kind, index); density = ones/size
        full = True
        for i in bits_of(Smask):
            ones = (rows[i] & Tmask).bit_count()
            if ones < nt:
                full = False
            cand = (ones, nt, 0, i)
            if worst is None or cand[0] * worst[1] < worst[0] * cand[1]:
                worst = cand
        if full:
            break
        for j in bits_of(Tmask):
            ones = (cols[j] & Smask).bit_count()
            cand = (ones, ns, 1, j)
            if cand[0] * worst[1] < worst[0] * cand[1]:
                worst = cand
        if worst[2] == 0:
            Smask &= ~(1 << worst[3])
        else:
            Tmask &= ~(1 << worst[3])
    if not Smask or not Tmask:
        return [], []
    closed_T = (1 << A.n) - 1
    for i in bits_of(Smask):
        closed_T &= rows[i]
    closed_S = (1 << A.m) - 1
    for j in bits_of(closed_T):
        closed_S &= cols[j]
    return bits_of(closed_S), bits_of(closed_T)


def _greedy_rect(A: BooleanMatrix, seeds: int = GREEDY_SEEDS) -> Rectangle:
    nz_rows = [i for i in range(A.m) if A.rows[i]]
    nz_cols = [j for j in range(A.n) if A.cols[j]]
    starts = [(nz_rows, nz_cols)]
    order = sorted(nz_rows, key=lambda i: (-A.rows[i].bit_count(), i))
    for i in order[:seeds]:
        starts.append((nz_rows, bits_of(A.rows[i])))
    best = None
    for S, T in starts:
        S2, T2 = _peel(A, S, T)
        if S2 and T2 and (best is None or len(S2) * len(T2) > best[0]):
            best = (len(S2) * len(T2), S2, T2)
    return Rectangle(tuple(best[1]), tuple(best[2]))


def max_one_rectangle(
    A: BooleanMatrix,
    mode: Literal["exact", "greedy", "auto"] = "auto",
    exact_max_side: int = RECT_EXACT_MAX_SIDE,
    greedy_seeds: int = GREEDY_SEEDS,
    backend: str | None = None,
) -> RectResult:
    """A large all-ones rectangle of ``A`` (local indices).

    ``exact`` maximizes ``|S|·|T|`` by branch and bound over closed subsets of
    the smaller side (needs that side ``<= exact_max_side``); ``greedy`` peels
    low-density lines from several seeds; ``auto`` picks exact when feasible.
    """
    if A.is_zero():
        raise ValueError("matrix has no 1-entry")
    feasible = min(A.m, A.n) <= exact_max_side
    if mode == "auto":
        mode = "exact" if feasible else "greedy"
    if mode == "exact":
        if not feasible:
            raise ValueError(f"exact search needs a side of at most {exact_max_side}")
        return RectResult(_exact_rect(A, backend), "exact")
    if mode == "greedy":
        return RectResult(_greedy_rect(A, greedy_seeds), "greedy")
    raise ValueError(f"unknown mode {mode!r}")


# -- the case split ----------------------------------------------------------

class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SplitOutcome:
    kind: str  # "Rect" | "TDDrop"
    pivot_row: int
    pivot_col: int
    row_part: tuple[int, ...]
    delta: tuple[int, ...]
    cols: tuple[int, ...]
    inner_ones: int  # ||A_{Δ×R}||²
    retained_ones: int  # ||A_{S×R}||²
    complement_ones: int  # ||A_{Δᶜ×Rᶜ}||²


def _ones(A: BooleanMatrix, rows_mask: int, cols_mask: int) -> int:
    return sum((A.rows[i] & cols_mask).bit_count() for i in bits_of(rows_mask))


def lemma_split(
    A: BooleanMatrix, F: Factorization, i: int, masses: RowMasses | None = None
) -> SplitOutcome:
    """Split ``Δ_i × R_i`` around the column ``j`` meeting ``Δ_i`` least.

    If ``(C_j ∩ Δ_i) × R_i`` holds more than half the ones of ``Δ_i × R_i``
    the outcome is ``Rect`` with ``S = C_j ∩ Δ_i``; otherwise ``TDDrop`` with
    ``S = Δ_i \\ C_j``, whose staircases extend by ``(i, j)``.
    """
    if not A.rows[i]:
        raise PreconditionError(f"row {i + 1} is zero")
    if masses is None:
        masses = row_masses(A, F)
    lam2 = F.lam ** 2
    da, ar, dr = (int(masses.delta_all[i]), int(masses.all_r[i]), int(masses.in_delta_r[i]))
    if not (da <= 4 * lam2 * ar + F.tol and ar <= 2 * lam2 * dr + F.tol):
        raise PreconditionError(
            f"row {i + 1}: need |A_DxN|/(4lam^2) <= |A_MxR| <= 2lam^2 |A_DxR|, got {da}, {ar}, {dr}"
        )
    delta_mask = mask_of(int(s) for s in np.flatnonzero(F.delta_matrix[i]))
    Rmask = A.rows[i]
    R = bits_of(Rmask)
    j = min(R, key=lambda t: ((A.cols[t] & delta_mask).bit_count(), t))
    inner = _ones(A, delta_mask, Rmask)
    hit = A.cols[j] & delta_mask
    hit_ones = _ones(A, hit, Rmask)
    if 2 * hit_ones > inner:
        kind, S = "Rect", hit
    else:
        kind, S = "TDDrop", delta_mask & ~A.cols[j]
    full_rows = (1 << A.m) - 1
    full_cols = (1 << A.n) - 1
    return SplitOutcome(
        kind=kind,
        pivot_row=i,
        pivot_col=j,
        row_part=tuple(bits_of(S)),
        delta=tuple(bits_of(delta_mask)),
        cols=tuple(R),
        inner_ones=inner,
        retained_ones=_ones(A, S, Rmask),
        complement_ones=_ones(A, full_rows & ~delta_mask, full_cols & ~Rmask),
    )
