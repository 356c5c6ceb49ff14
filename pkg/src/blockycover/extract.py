"""Blocky-cover extraction with a full audit trail.

The recursion mirrors the inductive proof: zero and blocky matrices are
base cases; a row whose ``Δ``-rows carry much more mass than its columns
triggers the projection step; otherwise the pivotal row's ``Δ × R`` block is
split into a 1-rectangle (kept) or a part of smaller threshold dimension
(recursed on), and the recursion continues on the rows and columns outside
``Δ × R``.
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .factor import (
    Factorization,
    InequalityViolation,
    pivotal_row,
    potential,
    project_columns,
    require_valid,
    row_masses,
    verify,
)
from .matcore import BlockyCover, BooleanMatrix, Rectangle, cover_support, is_blocky, restrict, support_size
from .structure import (
    GREEDY_SEEDS,
    RECT_EXACT_MAX_SIDE,
    TD_EXACT_MAX_DIM,
    TD_NODE_BUDGET,
    lemma_split,
    max_one_rectangle,
    threshold_dimension,
)

TRACE_SCHEMA = "blockycover.trace/1"
# stand-in for the e^{O(λ³)} factor; calibrated on the seeded nested-difference corpus
LEDGER_CONSTANT = 1.0


@dataclass(frozen=True)
class ExtractConfig:
    ledger_constant: float = LEDGER_CONSTANT
    td_exact_max_dim: int = TD_EXACT_MAX_DIM
    td_node_budget: int = TD_NODE_BUDGET
    rect_exact_max_side: int = RECT_EXACT_MAX_SIDE
    greedy_seeds: int = GREEDY_SEEDS
    backend: str | None = None


@dataclass
class Step:
    id: int
    parent: int | None
    branch: str  # ZeroBase | BlockyBase | Projection | Rect | TDDrop
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    support: int
    potential: float
    lam: float
    td: int
    td_exact: bool
    ledger: float = 0.0
    coverage: int = 0
    children: list[int] = field(default_factory=list)
    blocks: list[Rectangle] = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "parent": self.parent,
            "branch": self.branch,
            "rows": [i + 1 for i in self.rows],
            "cols": [j + 1 for j in self.cols],
            "pre_support": self.support,
            "pre_potential": self.potential,
            "lambda": self.lam,
            "td_bound": self.td,
            "td_exact": self.td_exact,
            "ledger": self.ledger,
            "coverage": self.coverage,
            "children": list(self.children),
            "blocks": [b.to_json() for b in self.blocks],
        }
        out.update(self.detail)
        return out


@dataclass
class ExtractionTrace:
    steps: list[Step]
    final_cover: BlockyCover
    coverage: int
    support: int
    lam: float
    config: ExtractConfig

    @property
    def fraction(self) -> float:
        return self.coverage / self.support if self.support else 1.0

    def by_branch(self, branch: str) -> list[Step]:
        return [s for s in self.steps if s.branch == branch]

    def signature(self) -> tuple:
        """Branch sequence, sets and counts; equal for equal inputs."""
        return tuple(
            (s.branch, s.rows, s.cols, s.support, s.td, tuple(b.row_set + b.col_set for b in s.blocks))
            for s in self.steps
        )

    def to_json(self) -> dict:
        return {
            "schema": TRACE_SCHEMA,
            "lambda": self.lam,
            "support": self.support,
            "coverage": self.coverage,
            "fraction": self.fraction,
            "config": {k: v for k, v in asdict(self.config).items() if k != "backend"},
            "cover": self.final_cover.to_json(),
            "steps": [s.to_json() for s in self.steps],
        }


def _ids(index_map, local) -> tuple[int, ...]:
    return tuple(sorted(index_map[k] for k in local))


class _Extractor:
    def __init__(self, lam: float, config: ExtractConfig):
        self.lam = lam
        self.config = config
        self.steps: list[Step] = []

    def ledger_value(self, support: int, pot: float, d: int) -> float:
        C = self.config.ledger_constant
        return (support - pot / 2.0) / (C * (40.0 * self.lam ** 4) ** d)

    def run(self, A: BooleanMatrix, F: Factorization, parent: int | None) -> list[Rectangle]:
        cfg = self.config
        frob = support_size(A)
        pot = potential(A, F, check=False).value
        step = Step(
            id=len(self.steps), parent=parent, branch="", rows=tuple(A.row_ids),
            cols=tuple(A.col_ids), support=frob, potential=pot, lam=self.lam, td=0, td_exact=True,
        )
        self.steps.append(step)
        if parent is not None:
            self.steps[parent].children.append(step.id)

        if frob == 0:
            step.branch = "ZeroBase"
            return self._finish(step, [])
        cover = is_blocky(A)
        if cover is not None:
            step.branch = "BlockyBase"
            step.td, step.td_exact = 1, True
            blocks = [Rectangle(_ids(A.row_ids, b.row_set), _ids(A.col_ids, b.col_set)) for b in cover]
            step.blocks = blocks
            return self._finish(step, blocks)

        td = threshold_dimension(A, cfg.td_exact_max_dim, cfg.td_node_budget, cfg.backend)
        # the ledger needs an upper bound on d
        step.td, step.td_exact = (td.d, True) if td.exact else (td.upper, False)

        masses = row_masses(A, F)
        lam2 = self.lam ** 2
        guard = next(
            (i for i in range(A.m)
             if A.rows[i] and masses.delta_all[i] > 4 * lam2 * masses.all_r[i] + F.tol),
            None,
        )
        if guard is not None:
            proj = project_columns(A, F, guard)
            post = potential(proj.matrix, proj.factorization, check=False).value
            step.branch = "Projection"
            step.detail = {
                "pivot_row": A.row_ids[guard] + 1,
                "removed_cols": [A.col_ids[j] + 1 for j in proj.removed_cols],
                "delta_mass": int(masses.delta_all[guard]),
                "column_mass": int(masses.all_r[guard]),
                "support_drop": proj.eta,
                "post_support": frob - proj.eta,
                "post_potential": post,
                "potential_drop": pot - post,
                "verify_ok": not verify(proj.matrix, proj.factorization),
            }
            return self._finish(step, self.run(proj.matrix, proj.factorization, step.id))

        piv = pivotal_row(A, F, masses)
        i = piv.row
        da, ar, dr = int(masses.delta_all[i]), int(masses.all_r[i]), piv.in_delta_r
        if not (da <= 4 * lam2 * ar + F.tol and ar <= 2 * lam2 * dr + F.tol):
            raise InequalityViolation(f"sandwich condition fails at pivotal row {A.row_ids[i] + 1}")
        split = lemma_split(A, F, i, masses)
        delta_c = [s for s in range(A.m) if s not in set(split.delta)]
        R = list(split.cols)
        Rc = [t for t in range(A.n) if not (A.rows[i] >> t) & 1]
        step.branch = split.kind
        step.detail = {
            "pivot_row": A.row_ids[i] + 1,
            "pivot_col": A.col_ids[split.pivot_col] + 1,
            "delta": [A.row_ids[s] + 1 for s in split.delta],
            "R": [A.col_ids[t] + 1 for t in R],
            "row_part": [A.row_ids[s] + 1 for s in split.row_part],
            "delta_mass": da,
            "column_mass": ar,
            "inner_ones": split.inner_ones,
            "retained_ones": split.retained_ones,
            "complement_ones": split.complement_ones,
        }
        sub = restrict(A, split.row_part, R)
        blocks: list[Rectangle] = []
        if split.kind == "Rect":
            found = max_one_rectangle(
                sub, "auto", cfg.rect_exact_max_side, cfg.greedy_seeds, cfg.backend
            )
            rect = Rectangle(_ids(sub.row_ids, found.rect.row_set), _ids(sub.col_ids, found.rect.col_set))
            step.blocks = [rect]
            step.detail["rect_mode"] = found.mode
            blocks.append(rect)
        else:
            child_td = threshold_dimension(sub, cfg.td_exact_max_dim, cfg.td_node_budget, cfg.backend)
            step.detail["child_td"] = child_td.d if child_td.exact else child_td.upper
            step.detail["child_td_exact"] = child_td.exact
            blocks += self.run(sub, F.restrict(split.row_part, R), step.id)
        rest = restrict(A, delta_c, Rc)
        blocks += self.run(rest, F.restrict(delta_c, Rc), step.id)
        return self._finish(step, blocks)

    def _finish(self, step: Step, blocks: list[Rectangle]) -> list[Rectangle]:
        step.coverage = sum(b.size for b in blocks)
        step.ledger = self.ledger_value(step.support, step.potential, step.td)
        return blocks


def extract_blocky(
    A: BooleanMatrix, F: Factorization, config: ExtractConfig | None = None
) -> tuple[BlockyCover, ExtractionTrace]:
    """Blocky cover of part of ``A``'s support, driven by a λ-factorization."""
    config = config or ExtractConfig()
    require_valid(A, F)
    runner = _Extractor(F.lam, config)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * (A.m + A.n) + 200))
    try:
        blocks = runner.run(BooleanMatrix(A.m, A.n, A.rows), F, None)
    finally:
        sys.setrecursionlimit(limit)
    cover = BlockyCover(tuple(sorted(blocks, key=lambda b: (b.row_set[0], b.col_set[0]))))
    coverage = cover_support(A, cover)
    if len(runner.steps) > 2 * (A.m + A.n + support_size(A)):
        raise AssertionError(f"{len(runner.steps)} steps exceeds 2(m + n + F)")
    trace = ExtractionTrace(runner.steps, cover, coverage, support_size(A), F.lam, config)
    return cover, trace


# -- audits ------------------------------------------------------------------

@dataclass(frozen=True)
class LedgerEntry:
    step: int
    branch: str
    ledger: float
    coverage: int
    ok: bool
    note: str = ""


@dataclass(frozen=True)
class LedgerAudit:
    entries: tuple[LedgerEntry, ...]
    constant: float

    @property
    def flags(self) -> list[LedgerEntry]:
        return [e for e in self.entries if not e.ok]

    def required_constant(self, trace: ExtractionTrace) -> float:
        """Smallest constant for which the coverage clears every ledger value."""
        need = 0.0
        for s in trace.steps:
            slack = s.support - s.potential / 2.0
            if slack <= 0:
                continue
            if s.coverage == 0:
                return float("inf")
            need = max(need, slack / ((40.0 * s.lam ** 4) ** s.td * s.coverage))
        return need


def guarantee_ledger(trace: ExtractionTrace, constant: float | None = None) -> LedgerAudit:
    """Check every step's subtree coverage against ``(F - Π/2) / (C (40λ⁴)^d)``.

    Base cases are checked exactly: a blocky step covers all of its ``F``
    ones, a single 1-entry is covered, and a step whose potential sits at
    the floor ``F/λ²`` must be blocky.
    """
    C = trace.config.ledger_constant if constant is None else constant
    entries = []
    for s in trace.steps:
        b = (s.support - s.potential / 2.0) / (C * (40.0 * s.lam ** 4) ** s.td)
        ok = s.coverage >= b - 1e-9
        note = ""
        if s.branch == "BlockyBase" and s.coverage != s.support:
            ok, note = False, "blocky base must cover F"
        if s.support == 1 and s.coverage != 1:
            ok, note = False, "single 1-entry must be covered"
        if s.support > 0 and s.potential <= s.support / s.lam ** 2 + 1e-9 and s.coverage != s.support:
            ok, note = False, "potential at its floor but cover incomplete"
        entries.append(LedgerEntry(s.id, s.branch, b, s.coverage, ok, note))
    return LedgerAudit(tuple(entries), C)


@dataclass(frozen=True)
class CorollaryRectangle:
    rect: Rectangle
    index: int
    coverage: int
    support: int
    m: int
    n: int

    @property
    def s(self) -> int:
        return len(self.rect.row_set)

    @property
    def t(self) -> int:
        return len(self.rect.col_set)

    @property
    def row_threshold(self) -> Fraction:
        return Fraction(self.coverage, 2 * self.n)

    @property
    def col_threshold(self) -> Fraction:
        return Fraction(self.coverage, 2 * self.m)

    def certified(self) -> bool:
        return 2 * self.n * self.s >= self.coverage and 2 * self.m * self.t >= self.coverage


def corollary_rectangle(A: BooleanMatrix, cover: BlockyCover) -> CorollaryRectangle:
    """First block with ``|S| >= c'F/(2n)`` and ``|T| >= c'F/(2m)``, ``c'F`` = coverage.

    Blocks failing either threshold hold fewer than ``c'F/2`` ones per
    threshold, so some block survives whenever the coverage is positive.
    """
    coverage = cover_support(A, cover)
    if coverage == 0:
        raise ValueError("cover is empty")
    for k, b in enumerate(cover.blocks):
        s, t = b.dims
        if 2 * A.n * s >= coverage and 2 * A.m * t >= coverage:
            return CorollaryRectangle(b, k, coverage, support_size(A), A.m, A.n)
    raise AssertionError("no block survives the thresholds; counting argument violated")
