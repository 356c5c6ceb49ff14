"""Boolean matrices, rectangles and blocky covers.

Rows are stored bit-packed as Python integers (bit ``j`` of ``rows[i]`` is
``A(i, j)``).  Every matrix remembers, for each of its rows and columns, the
index it had in the matrix it was ultimately cut from, so that rectangles
found deep inside a recursion can be reported in original coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class MatrixFormatError(ValueError):
    """Raised when a ``.bm`` file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class CoverViolation(ValueError):
    """A cover claims a cell that is not a 1-entry of the matrix."""

    def __init__(self, cell: tuple[int, int]):
        self.cell = cell
        super().__init__(f"covered cell ({cell[0] + 1},{cell[1] + 1}) is 0 in the matrix")


def bits_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for idx in indices:
        mask |= 1 << idx
    return mask


class BooleanMatrix:
    """Immutable dense 0/1 matrix with bit-packed rows."""

    def __init__(
        self,
        m: int,
        n: int,
        rows: Sequence[int],
        row_ids: Sequence[int] | None = None,
        col_ids: Sequence[int] | None = None,
    ):
        if len(rows) != m:
            raise ValueError(f"expected {m} rows, got {len(rows)}")
        full = (1 << n) - 1
        for i, r in enumerate(rows):
            if r < 0 or r & ~full:
                raise ValueError(f"row {i} has bits outside {n} columns")
        self.m = m
        self.n = n
        self.rows = tuple(int(r) for r in rows)
        self.row_ids = tuple(range(m)) if row_ids is None else tuple(row_ids)
        self.col_ids = tuple(range(n)) if col_ids is None else tuple(col_ids)
        if len(self.row_ids) != m or len(self.col_ids) != n:
            raise ValueError("index maps do not match the shape")

    # -- construction -----------------------------------------------------
    @classmethod
    def from_array(cls, array) -> "BooleanMatrix":
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        m, n = arr.shape
        weights = [1 << j for j in range(n)]
        rows = [sum(w for w, x in zip(weights, row) if x) for row in arr.tolist()]
        return cls(m, n, rows)

    @classmethod
    def zeros(cls, m: int, n: int) -> "BooleanMatrix":
        return cls(m, n, [0] * m)

    @classmethod
    def identity(cls, n: int) -> "BooleanMatrix":
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def ones(cls, m: int, n: int) -> "BooleanMatrix":
        return cls(m, n, [(1 << n) - 1] * m)

    # -- views ------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @cached_property
    def dense(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.int8)
        for i, r in enumerate(self.rows):
            for j in bits_of(r):
                out[i, j] = 1
        out.setflags(write=False)
        return out

    def to_array(self) -> np.ndarray:
        return self.dense.copy()

    @cached_property
    def cols(self) -> tuple[int, ...]:
        """Column masks over rows; cached since the matrix is immutable."""
        cols = [0] * self.n
        for i, r in enumerate(self.rows):
            bit = 1 << i
            for j in bits_of(r):
                cols[j] |= bit
        return tuple(cols)

    @cached_property
    def row_degrees(self) -> np.ndarray:
        return np.array([r.bit_count() for r in self.rows], dtype=np.int64)

    @cached_property
    def col_degrees(self) -> np.ndarray:
        return np.array([c.bit_count() for c in self.cols], dtype=np.int64)

    def transpose(self) -> "BooleanMatrix":
        return BooleanMatrix(self.n, self.m, self.cols, self.col_ids, self.row_ids)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return (self.rows[i] >> j) & 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.m, self.n, self.rows))

    def __repr__(self) -> str:
        return f"BooleanMatrix({self.m}x{self.n}, support={support_size(self)})"

    def is_zero(self) -> bool:
        return not any(self.rows)


@dataclass(frozen=True)
class Rectangle:
    row_set: tuple[int, ...]
    col_set: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "row_set", tuple(sorted(self.row_set)))
        object.__setattr__(self, "col_set", tuple(sorted(self.col_set)))
        if not self.row_set or not self.col_set:
            raise ValueError("a stored rectangle needs nonempty row and column sets")

    @property
    def size(self) -> int:
        return len(self.row_set) * len(self.col_set)

    @property
    def dims(self) -> tuple[int, int]:
        return (len(self.row_set), len(self.col_set))

    def to_json(self) -> dict:
        return {"rows": [i + 1 for i in self.row_set], "cols": [j + 1 for j in self.col_set]}

    @classmethod
    def from_json(cls, obj: dict) -> "Rectangle":
        return cls(tuple(i - 1 for i in obj["rows"]), tuple(j - 1 for j in obj["cols"]))


@dataclass(frozen=True)
class BlockyCover:
    blocks: tuple[Rectangle, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        seen_rows: set[int] = set()
        seen_cols: set[int] = set()
        for b in self.blocks:
            if seen_rows.intersection(b.row_set) or seen_cols.intersection(b.col_set):
                raise ValueError("cover blocks must be row- and column-disjoint")
            seen_rows.update(b.row_set)
            seen_cols.update(b.col_set)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def support_size(self) -> int:
        return sum(b.size for b in self.blocks)

    def indicator(self, m: int, n: int) -> BooleanMatrix:
        rows = [0] * m
        for b in self.blocks:
            cmask = mask_of(b.col_set)
            for i in b.row_set:
                rows[i] |= cmask
        return BooleanMatrix(m, n, rows)

    def union(self, other: "BlockyCover") -> "BlockyCover":
        return BlockyCover(self.blocks + other.blocks)

    def to_json(self) -> dict:
        return {"blocks": [b.to_json() for b in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict) -> "BlockyCover":
        return cls(tuple(Rectangle.from_json(b) for b in obj["blocks"]))


# -- operations ------------------------------------------------------------

def support_size(A: BooleanMatrix) -> int:
    """Number of 1-entries (the squared Frobenius norm)."""
    return sum(r.bit_count() for r in A.rows)


def _check(idx: int, bound: int, what: str) -> None:
    if not 0 <= idx < bound:
        raise IndexError(f"{what} index {idx} out of range [0, {bound})")


def row_nbhd(A: BooleanMatrix, i: int) -> list[int]:
    _check(i, A.m, "row")
    return bits_of(A.rows[i])


def col_nbhd(A: BooleanMatrix, j: int) -> list[int]:
    _check(j, A.n, "column")
    return bits_of(A.cols[j])


def restrict(A: BooleanMatrix, S: Sequence[int], T: Sequence[int]) -> BooleanMatrix:
    """The submatrix on rows ``S`` and columns ``T`` (in the given order).

    The result's ``row_ids``/``col_ids`` point back through ``A``'s own maps,
    so repeated restriction composes.
    """
    S = list(S)
    T = list(T)
    for i in S:
        _check(i, A.m, "row")
    for j in T:
        _check(j, A.n, "column")
    rows = []
    for i in S:
        r = A.rows[i]
        packed = 0
        for k, j in enumerate(T):
            if (r >> j) & 1:
                packed |= 1 << k
        rows.append(packed)
    return BooleanMatrix(
        len(S), len(T), rows,
        [A.row_ids[i] for i in S],
        [A.col_ids[j] for j in T],
    )


def is_blocky(A: BooleanMatrix) -> BlockyCover | None:
    """Canonical cover if ``A`` is blocky, else ``None``.

    Rows are grouped by identical nonzero neighbourhood; ``A`` is blocky iff
    the groups' neighbourhoods are pairwise disjoint.
    """
    groups: dict[int, list[int]] = {}
    for i, r in enumerate(A.rows):
        if r:
            groups.setdefault(r, []).append(i)
    used = 0
    blocks = []
    for r, members in groups.items():
        if used & r:
            return None
        used |= r
        blocks.append(Rectangle(tuple(members), tuple(bits_of(r))))
    blocks.sort(key=lambda b: b.row_set[0])
    return BlockyCover(tuple(blocks))


def cover_support(A: BooleanMatrix, cover: BlockyCover) -> int:
    """``Σ|S_k|·|T_k|``; raises :class:`CoverViolation` on the first 0 cell covered."""
    for b in cover.blocks:
        for i in b.row_set:
            _check(i, A.m, "row")
            r = A.rows[i]
            for j in b.col_set:
                _check(j, A.n, "column")
                if not (r >> j) & 1:
                    raise CoverViolation((i, j))
    return cover.support_size


# -- .bm text format ---------------------------------------------------------

def format_bm(A: BooleanMatrix) -> str:
    lines = [f"{A.m} {A.n}"]
    for r in A.rows:
        lines.append("".join("1" if (r >> j) & 1 else "0" for j in range(A.n)))
    return "\n".join(lines) + "\n"


def parse_bm(text: str) -> BooleanMatrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty input", 1)
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise MatrixFormatError("header must be 'm n'", 1)
    m, n = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != m:
        raise MatrixFormatError(f"expected {m} matrix rows, found {len(body)}", len(lines) + 1)
    rows = []
    for k, line in enumerate(body, start=2):
        line = line.rstrip("\r")
        if len(line) != n:
            raise MatrixFormatError(f"expected {n} characters, found {len(line)}", k)
        r = 0
        for j, ch in enumerate(line):
            if ch == "1":
                r |= 1 << j
            elif ch != "0":
                raise MatrixFormatError(f"invalid character {ch!r}", k)
        rows.append(r)
    return BooleanMatrix(m, n, rows)


def read_bm(path: str | Path) -> BooleanMatrix:
    return parse_bm(Path(path).read_text())


def write_bm(A: BooleanMatrix, path: str | Path) -> None:
    Path(path).write_text(format_bm(A))
