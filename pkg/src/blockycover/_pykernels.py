"""Pure-Python search kernels.

Reference implementations of the two exponential searches; ``_kernels.pyx``
mirrors them move for move so both backends return identical witnesses.
"""
from __future__ import annotations

BACKEND = "python"


class BudgetExceeded(Exception):
    pass


def td_search(rows, cols, m, n, node_limit=0):
    """Longest staircase ``A(i_s, j_t) = [s >= t]``.

    State ``(P, Q)``: ``P`` rows that contain every chosen column, ``Q``
    columns that vanish on every chosen row.  Appending ``(r, c)`` with
    ``A(r, c) = 1`` maps the state to ``(P ∩ C_c − r, Q − R_r)``.

    Returns ``(d, row_seq, col_seq, exact)``; with ``node_limit > 0`` the
    search gives up after that many expanded states and reports
    ``exact=False`` together with an empty witness.
    """
    memo: dict[tuple[int, int], tuple[int, int, int]] = {}
    counter = [0]

    def solve(P: int, Q: int) -> int:
        key = (P, Q)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        counter[0] += 1
        if node_limit and counter[0] > node_limit:
            raise BudgetExceeded
        cap = min(P.bit_count(), Q.bit_count())
        best, br, bc = 0, -1, -1
        p = P
        while p and best < cap:
            low = p & -p
            r = low.bit_length() - 1
            p ^= low
            cand = rows[r] & Q
            Qn = Q & ~rows[r]
            while cand and best < cap:
                lowc = cand & -cand
                c = lowc.bit_length() - 1
                cand ^= lowc
                Pn = P & cols[c] & ~low
                bound = 1 + min(Pn.bit_count(), Qn.bit_count())
                if bound <= best:
                    continue
                val = 1 + solve(Pn, Qn)
                if val > best:
                    best, br, bc = val, r, c
        memo[key] = (best, br, bc)
        return best

    P0 = 0
    for i in range(m):
        if rows[i]:
            P0 |= 1 << i
    Q0 = 0
    for j in range(n):
        if cols[j]:
            Q0 |= 1 << j
    try:
        d = solve(P0, Q0)
    except BudgetExceeded:
        return 0, [], [], False
    row_seq, col_seq = [], []
    P, Q = P0, Q0
    while True:
        _, r, c = memo[(P, Q)]
        if r < 0:
            break
        row_seq.append(r)
        col_seq.append(c)
        P, Q = P & cols[c] & ~(1 << r), Q & ~rows[r]
    return d, row_seq, col_seq, True


def max_rect_search(rows, width):
    """Largest all-ones rectangle by close-by-one enumeration of closed column sets.

    ``rows`` are masks over ``width`` columns (the small side).  Returns
    ``(area, row_indices, col_mask)``; area 0 when there is no 1-entry.
    """
    full = (1 << width) - 1
    active = [r for r in range(len(rows)) if rows[r]]
    best = [0, [], 0]

    def consider(S, T):
        area = len(S) * T.bit_count()
        if area > best[0]:
            best[0], best[1], best[2] = area, list(S), T

    def close(S):
        T = full
        for r in S:
            T &= rows[r]
        return T

    def rec(S, T, last):
        for c in range(last + 1, width):
            bit = 1 << c
            if T & bit:
                continue
            S2 = [r for r in S if rows[r] & bit]
            if not S2:
                continue
            T2 = close(S2)
            low = bit - 1
            if (T2 & low) != (T & low):
                continue
            consider(S2, T2)
            reach = 0
            for r in S2:
                reach |= rows[r]
            high = reach & ~((bit << 1) - 1)
            if len(S2) * (T2 | high).bit_count() <= best[0]:
                continue
            rec(S2, T2, c)

    if not active:
        return 0, [], 0
    T0 = close(active)
    if T0:
        consider(active, T0)
    rec(active, T0, -1)
    return best[0], best[1], best[2]
