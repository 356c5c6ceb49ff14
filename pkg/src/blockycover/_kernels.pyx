# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled search kernels; same contracts and move order as ``_pykernels``.

Masks are 64-bit words, so ``td_search`` needs ``m, n <= 64`` and
``max_rect_search`` needs ``width <= 64``; callers route larger inputs to the
pure-Python backend.
"""
from libc.stdint cimport uint64_t
from libcpp.map cimport map as cmap
from libcpp.pair cimport pair
from libcpp.vector cimport vector

BACKEND = "cython"
MAX_BITS = 64

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int popc(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef inline int ctz(uint64_t x) nogil:
    return __builtin_ctzll(x)


cdef struct Entry:
    int val
    int r
    int c

ctypedef pair[uint64_t, uint64_t] Key


cdef class _Staircase:
    cdef vector[uint64_t] rows
    cdef vector[uint64_t] cols
    cdef cmap[Key, Entry] memo
    cdef long long counter
    cdef long long limit
    cdef bint aborted

    cdef int solve(self, uint64_t P, uint64_t Q):
        cdef Key key = Key(P, Q)
        cdef cmap[Key, Entry].iterator it = self.memo.find(key)
        if it != self.memo.end():
            return self.memo[key].val
        self.counter += 1
        if self.limit > 0 and self.counter > self.limit:
            self.aborted = True
            return 0
        cdef int cap = min(popc(P), popc(Q))
        cdef int best = 0, br = -1, bc = -1
        cdef uint64_t p = P, cand, Qn, Pn, low, lowc
        cdef int r, c, bound, val
        while p and best < cap:
            low = p & (~p + 1)
            r = ctz(p)
            p ^= low
            cand = self.rows[r] & Q
            Qn = Q & ~self.rows[r]
            while cand and best < cap:
                lowc = cand & (~cand + 1)
                c = ctz(cand)
                cand ^= lowc
                Pn = P & self.cols[c] & ~low
                bound = 1 + min(popc(Pn), popc(Qn))
                if bound <= best:
                    continue
                val = 1 + self.solve(Pn, Qn)
                if self.aborted:
                    return 0
                if val > best:
                    best = val
                    br = r
                    bc = c
        cdef Entry e
        e.val = best
        e.r = br
        e.c = bc
        self.memo[key] = e
        return best


def td_search(rows, cols, int m, int n, long long node_limit=0):
    if m > MAX_BITS or n > MAX_BITS:
        raise ValueError("compiled td_search handles at most 64 rows and columns")
    cdef _Staircase s = _Staircase()
    cdef int i, j
    cdef uint64_t P0 = 0, Q0 = 0
    for i in range(m):
        s.rows.push_back(<uint64_t>rows[i])
        if rows[i]:
            P0 |= (<uint64_t>1) << i
    for j in range(n):
        s.cols.push_back(<uint64_t>cols[j])
        if cols[j]:
            Q0 |= (<uint64_t>1) << j
    s.limit = node_limit
    s.counter = 0
    s.aborted = False
    cdef int d = s.solve(P0, Q0)
    if s.aborted:
        return 0, [], [], False
    row_seq = []
    col_seq = []
    cdef uint64_t P = P0, Q = Q0
    cdef Entry e
    while True:
        e = s.memo[Key(P, Q)]
        if e.r < 0:
            break
        row_seq.append(e.r)
        col_seq.append(e.c)
        P = P & s.cols[e.c] & ~((<uint64_t>1) << e.r)
        Q = Q & ~s.rows[e.r]
    return d, row_seq, col_seq, True


cdef class _Biclique:
    cdef vector[uint64_t] rows
    cdef int width
    cdef uint64_t full
    cdef long long best_area
    cdef vector[int] best_rows
    cdef uint64_t best_cols

    cdef void consider(self, vector[int]& S, uint64_t T):
        cdef long long area = <long long>S.size() * popc(T)
        if area > self.best_area:
            self.best_area = area
            self.best_rows = S
            self.best_cols = T

    cdef uint64_t close(self, vector[int]& S):
        cdef uint64_t T = self.full
        cdef size_t k
        for k in range(S.size()):
            T &= self.rows[S[k]]
        return T

    cdef void rec(self, vector[int]& S, uint64_t T, int last):
        cdef int c
        cdef uint64_t bit, T2, low, reach, high
        cdef size_t k
        cdef vector[int] S2
        for c in range(last + 1, self.width):
            bit = (<uint64_t>1) << c
            if T & bit:
                continue
            S2.clear()
            for k in range(S.size()):
                if self.rows[S[k]] & bit:
                    S2.push_back(S[k])
            if S2.size() == 0:
                continue
            T2 = self.close(S2)
            low = bit - 1
            if (T2 & low) != (T & low):
                continue
            self.consider(S2, T2)
            reach = 0
            for k in range(S2.size()):
                reach |= self.rows[S2[k]]
            if c == 63:
                high = 0
            else:
                high = reach & ~((bit << 1) - 1)
            if <long long>S2.size() * popc(T2 | high) <= self.best_area:
                continue
            self.rec(S2, T2, c)


def max_rect_search(rows, int width):
    if width > MAX_BITS:
        raise ValueError("compiled max_rect_search handles at most 64 columns")
    cdef _Biclique b = _Biclique()
    b.width = width
    b.full = (~(<uint64_t>0)) if width == 64 else (((<uint64_t>1) << width) - 1)
    b.best_area = 0
    b.best_cols = 0
    cdef vector[int] active
    cdef int r
    for r in range(len(rows)):
        b.rows.push_back(<uint64_t>rows[r])
        if rows[r]:
            active.push_back(r)
    if active.size() == 0:
        return 0, [], 0
    cdef uint64_t T0 = b.close(active)
    if T0:
        b.consider(active, T0)
    b.rec(active, T0, -1)
    return int(b.best_area), [int(x) for x in b.best_rows], int(b.best_cols)
