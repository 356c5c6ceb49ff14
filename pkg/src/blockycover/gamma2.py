"""Matrices with known γ₂ norm, Fourier algebra norms and witness search.

For ``f : Z_2^k -> {0,1}`` the matrix ``A(x, y) = f(x ⊕ y)`` has γ₂ norm
equal to ``Σ_a |f̂(a)|``, and the characters give an explicit factorization
attaining it.  The cyclic indicator ``1_S`` of ``S = {0..n-1} ⊆ Z_2n`` gives
the wrap-around half-graph used for the logarithmic lower bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .factor import DEFAULT_TOL, Factorization, _compress, reproduction_error, verify
from .matcore import BooleanMatrix


def fwht(values) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform, ``Σ_x v(x)(-1)^{a·x}``."""
    out = np.array(values, dtype=np.float64)
    size = out.shape[0]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < size:
        view = out.reshape(-1, 2, h)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = lo + hi
        view[:, 1, :] = lo - hi
        h *= 2
    return out


def parity(x: int) -> int:
    return x.bit_count() & 1


def character_table(k: int) -> np.ndarray:
    """``H[a, x] = (-1)^{a·x}`` with points encoded as k-bit integers."""
    idx = np.arange(1 << k)
    dots = np.bitwise_and.outer(idx, idx)
    par = np.zeros_like(dots)
    for b in range(k):
        par ^= (dots >> b) & 1
    return 1 - 2 * par


@dataclass(frozen=True)
class GroupFunction:
    """A boolean function on ``Z_2^k``.

    Points are encoded as integers whose binary expansion, most significant
    bit first, lists the coordinates; integer order is lexicographic order.
    """

    k: int
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) != 1 << self.k:
            raise ValueError(f"expected {1 << self.k} values for k={self.k}")
        if any(v not in (0, 1) for v in vals):
            raise ValueError("values must be 0 or 1")
        object.__setattr__(self, "values", vals)

    @cached_property
    def coeffs(self) -> np.ndarray:
        """``f̂(a) = 2^{-k} Σ_x f(x)(-1)^{a·x}``."""
        return fwht(self.values) / (1 << self.k)

    def inverse(self) -> np.ndarray:
        return fwht(self.coeffs)

    @classmethod
    def indicator(cls, k: int, points) -> "GroupFunction":
        vals = [0] * (1 << k)
        for x in points:
            vals[x] = 1
        return cls(k, vals)

    @classmethod
    def coset(cls, k: int, generators, shift: int = 0) -> "GroupFunction":
        """Indicator of ``shift + span(generators)``."""
        span = {0}
        for g in generators:
            span |= {s ^ g for s in span}
        return cls.indicator(k, {shift ^ s for s in span})

    @classmethod
    def random(cls, k: int, density: float, seed: int) -> "GroupFunction":
        rng = np.random.default_rng(seed)
        vals = (rng.random(1 << k) < density).astype(int)
        if not vals.any():
            vals[int(rng.integers(1 << k))] = 1
        return cls(k, vals.tolist())

    def is_zero(self) -> bool:
        return not any(self.values)


def walsh_algebra_norm(f: GroupFunction) -> float:
    return float(np.abs(f.coeffs).sum())


def group_lift(f: GroupFunction, tol: float = DEFAULT_TOL) -> tuple[BooleanMatrix, Factorization]:
    """``A(x, y) = f(x ⊕ y)`` with the character factorization, ``λ = ||f||_A``."""
    if f.is_zero():
        raise ValueError("group_lift needs a nonzero function")
    size = 1 << f.k
    rows = []
    for x in range(size):
        r = 0
        for y in range(size):
            if f.values[x ^ y]:
                r |= 1 << y
        rows.append(r)
    A = BooleanMatrix(size, size, rows)
    c = f.coeffs
    lam = float(np.abs(c).sum())
    H = character_table(f.k).astype(np.float64)  # symmetric: H[a, x] = H[x, a]
    mag = np.abs(c)
    sign = np.where(c < 0, -1.0, 1.0)
    U = H * np.sqrt(mag / lam)[None, :]
    V = (sign * np.sqrt(lam * mag))[:, None] * H
    return A, Factorization(U, V, lam, tol)


def format_group_function(f: GroupFunction) -> str:
    return f"{f.k}\n" + "".join(str(v) for v in f.values) + "\n"


def parse_group_function(text: str) -> GroupFunction:
    tokens = text.split()
    if len(tokens) != 2 or not tokens[0].isdigit():
        raise ValueError("group function file must contain 'k' then the value string")
    k = int(tokens[0])
    if len(tokens[1]) != 1 << k or set(tokens[1]) - {"0", "1"}:
        raise ValueError(f"expected {1 << k} characters of 0/1")
    return GroupFunction(k, [int(ch) for ch in tokens[1]])


def read_group_function(path: str | Path) -> GroupFunction:
    return parse_group_function(Path(path).read_text())


# -- the cyclic indicator and the half-graph ---------------------------------

@dataclass(frozen=True)
class CyclicIndicator:
    """Fourier coefficients of ``1_S``, ``S = {0, .., n-1}`` inside ``Z_2n``."""

    n: int
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def compute(cls, n: int, chunk: int = 512) -> "CyclicIndicator":
        if n < 1:
            raise ValueError("n must be positive")
        N = 2 * n
        x = np.arange(n, dtype=np.int64)
        roots = np.exp(-2j * np.pi * np.arange(N) / N)
        out = np.empty(N, dtype=np.complex128)
        # direct summation (not an FFT) so the value is independent of numpy.fft
        for start in range(0, N, chunk):
            a = np.arange(start, min(start + chunk, N), dtype=np.int64)
            out[start:start + len(a)] = roots[np.outer(a, x) % N].sum(axis=1) / N
        return cls(n, out)

    def closed_form(self) -> np.ndarray:
        n = self.n
        a = np.arange(2 * n)
        out = np.zeros(2 * n, dtype=np.complex128)
        out[0] = 0.5
        odd = a % 2 == 1
        out[odd] = 1.0 / (n * (1.0 - np.exp(-2j * np.pi * a[odd] / (2 * n))))
        return out

    @property
    def algebra_norm(self) -> float:
        return float(np.abs(self.coeffs).sum())


def halfgraph_lower_bound(n: int) -> float:
    """``γ₂`` of the wrap-around half-graph ``H(x, y) = 1_S(x - y)`` on ``Z_2n``.

    The half-graph ``G_n`` itself satisfies ``γ₂(G_n) >= value - 1``.
    """
    return CyclicIndicator.compute(n).algebra_norm


def halfgraph_gamma2_bound(n: int) -> float:
    return halfgraph_lower_bound(n) - 1.0


def half_graph(n: int) -> BooleanMatrix:
    """``G(i, j) = 1`` iff ``i >= j``."""
    return BooleanMatrix(n, n, [(1 << (i + 1)) - 1 for i in range(n)])


def wraparound_half_graph(n: int) -> BooleanMatrix:
    N = 2 * n
    rows = []
    for x in range(N):
        r = 0
        for y in range(N):
            if (x - y) % N < n:
                r |= 1 << y
        rows.append(r)
    return BooleanMatrix(N, N, rows)


# -- heuristic witness search ------------------------------------------------

def ball_lstsq(M: np.ndarray, B: np.ndarray, bound: float) -> np.ndarray:
    """Columnwise ``argmin ||M x - b|| subject to ||x|| <= bound``.

    Solved through the SVD of ``M``: the constrained minimizer is the
    Tikhonov solution whose multiplier makes the norm hit ``bound``, found by
    bisection on the (monotone) secular equation.
    """
    P, s, Qt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M.shape[1], B.shape[1]))
    keep = s > s[0] * 1e-12
    P, s, Qt = P[:, keep], s[keep], Qt[keep]
    c = P.T @ B
    sc = s[:, None]

    def norms(mu, cc):
        return np.sqrt((((sc / (sc ** 2 + mu[None, :])) * cc) ** 2).sum(axis=0))

    mu = np.zeros(B.shape[1])
    need = norms(mu, c) > bound
    if need.any():
        cc = c[:, need]
        lo = np.zeros(cc.shape[1])
        hi = np.ones(cc.shape[1])
        while (norms(hi, cc) > bound).any():
            hi *= 2.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            big = norms(mid, cc) > bound
            lo = np.where(big, mid, lo)
            hi = np.where(big, hi, mid)
        mu[need] = hi
    return Qt.T @ ((sc / (sc ** 2 + mu[None, :])) * c)


def _sphere_polish(U, V, target, lam, steps):
    """Gauss-Newton on rows of ``U`` fixed to norm 1 and columns of ``V`` to ``lam``.

    With ``t >= m + n`` any factorization can be padded with orthogonal
    directions until every norm bound is tight, so restricting to the product
    of spheres loses no solutions; the residual is then smooth and the
    minimum-norm Gauss-Newton step converges quadratically to an exact zero.
    """
    m, t0 = U.shape
    n = V.shape[1]
    # pad with fresh coordinates so every norm is tight without changing U V
    slack_u = np.sqrt(np.clip(1.0 - (U ** 2).sum(axis=1), 0.0, None))
    slack_v = np.sqrt(np.clip(lam ** 2 - (V ** 2).sum(axis=0), 0.0, None))
    W = np.hstack([U, np.diag(slack_u), np.zeros((m, n))])
    Z = np.hstack([V.T, np.zeros((n, m)), np.diag(slack_v)])
    t = t0 + m + n
    W = W + 1e-12 * (np.linalg.norm(W, axis=1, keepdims=True) == 0)
    Z = Z + 1e-12 * (np.linalg.norm(Z, axis=1, keepdims=True) == 0)
    x = np.concatenate([W.ravel(), Z.ravel()])
    rm, rn = np.arange(m), np.arange(n)

    def split(x):
        W = x[: m * t].reshape(m, t)
        Z = x[m * t:].reshape(n, t)
        wn = np.linalg.norm(W, axis=1)
        zn = np.linalg.norm(Z, axis=1)
        return W / wn[:, None], Z / zn[:, None], wn, zn

    def residual(x):
        Uh, Zh, _, _ = split(x)
        return (Uh @ (lam * Zh).T - target).ravel()

    def jacobian(x):
        Uh, Zh, wn, zn = split(x)
        G = Uh @ Zh.T
        Jw = np.zeros((m, n, m, t))
        Jz = np.zeros((m, n, n, t))
        Jw[rm, :, rm, :] = lam * (Zh[None, :, :] - G[:, :, None] * Uh[:, None, :]) / wn[:, None, None]
        Jz[:, rn, rn, :] = (
            lam * (Uh[:, None, :] - G[:, :, None] * Zh[None, :, :]) / zn[None, :, None]
        )
        return np.concatenate([Jw.reshape(m * n, m * t), Jz.reshape(m * n, n * t)], axis=1)

    f = residual(x)
    for _ in range(steps):
        if np.abs(f).max() < 1e-14:
            break
        step = np.linalg.lstsq(jacobian(x), f, rcond=None)[0]
        xn = x - step
        fn = residual(xn)
        while np.linalg.norm(fn) > np.linalg.norm(f) and np.linalg.norm(step) > 1e-15:
            step *= 0.5
            xn = x - step
            fn = residual(xn)
        x, f = xn, fn
    Uh, Zh, _, _ = split(x)
    return _compress(Uh, lam * Zh.T)


@dataclass(frozen=True)
class ALSReport:
    factorization: Factorization | None
    best_error: float
    best_restart: int
    settings: dict


def als_search(
    A: BooleanMatrix,
    lam_target: float,
    seed: int = 0,
    iters: int = 2000,
    restarts: int = 8,
    tol: float = DEFAULT_TOL,
    polish_steps: int = 60,
    polish_max_entries: int = 20_000_000,
) -> ALSReport:
    """Alternating norm-constrained least squares; see :func:`als_factorize`."""
    if lam_target < 1:
        raise ValueError("lam_target must be at least 1")
    m, n = A.shape
    t = max(min(m + n, m * n), 1)
    settings = {
        "iters": iters, "restarts": restarts, "tol": tol, "rank": t, "seed": seed,
        "polish_steps": polish_steps, "polish_max_entries": polish_max_entries,
    }
    if m == 0 or n == 0 or A.is_zero():
        F = Factorization(np.zeros((m, t)), np.zeros((t, n)), lam_target, tol)
        return ALSReport(F, 0.0, 0, settings)
    target = A.dense.astype(np.float64)
    can_polish = m * n * (m + n) * t <= polish_max_entries
    best_err, best_k = math.inf, -1
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        U = rng.standard_normal((m, t))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        err = checkpoint = math.inf
        for it in range(1, iters + 1):
            V = ball_lstsq(U, target, lam_target)
            U = ball_lstsq(V.T, target.T, 1.0).T
            err = float(np.max(np.abs(U @ V - target)))
            if err < tol or (can_polish and err < 1e-2):
                break
            if it % 50 == 0:
                if err > 0.999 * checkpoint:
                    break  # stalled
                checkpoint = err
        if err >= tol and can_polish:
            U, V = _sphere_polish(U, V, target, lam_target, polish_steps)
            err = float(np.max(np.abs(U @ V - target)))
        if err < best_err:
            best_err, best_k = err, k
        if err < tol:
            F = Factorization(U, V, lam_target, tol)
            if not verify(A, F):
                return ALSReport(F, err, k, settings)
    return ALSReport(None, best_err, best_k, settings)


def als_factorize(
    A: BooleanMatrix,
    lam_target: float,
    seed: int = 0,
    iters: int = 2000,
    restarts: int = 8,
    tol: float = DEFAULT_TOL,
    polish_steps: int = 60,
    polish_max_entries: int = 20_000_000,
) -> Factorization | None:
    """A ``lam_target``-factorization found by clipped ALS, or ``None``.

    Each half-step solves the least-squares problem for ``V`` (then ``U``)
    restricted to the ``lam_target`` (unit) ball.  Once the residual is
    small, a Gauss-Newton polish on the sphere product drives it to zero when
    an exact factorization is nearby.  Restarts are seeded ``(seed, k)``; the
    first that verifies wins.
    """
    report = als_search(A, lam_target, seed, iters, restarts, tol, polish_steps, polish_max_entries)
    if report.factorization is None:
        return None
    assert reproduction_error(A, report.factorization) < tol
    return report.factorization
