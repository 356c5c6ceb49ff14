"""The twelve acceptance criteria, runnable on an in-memory or on-disk corpus.

Each ``criterion_*`` returns a :class:`CriterionResult`; :func:`run_suite`
runs them all.  Corpus-driven criteria share one extraction pass over the
corpus (:class:`SuiteContext`).
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .config import Config
from .extract import ExtractionTrace, corollary_rectangle, extract_blocky, guarantee_ledger
from .factor import (
    Factorization,
    inner_product_sums,
    large_pair_count,
    pivotal_row,
    potential,
    read_lf,
    verify,
    write_lf,
)
from .families import FamilySpec, corpus_specs, generate, random_blocky, regression_specs
from .gamma2 import GroupFunction, als_factorize, group_lift, half_graph
from .matcore import BlockyCover, BooleanMatrix, cover_support, is_blocky, read_bm, support_size, write_bm
from .structure import threshold_dimension

TOL = 1e-9
MANIFEST = "manifest.json"

# (coverage, support) of the nested-difference regression corpus at the default config
PINNED_REGRESSION = {
    "nested_blocky_difference_holes3_m16_n16_s1000": (112, 136),
    "nested_blocky_difference_holes3_m24_n20_s1001": (210, 294),
    "nested_blocky_difference_holes3_m32_n32_s1002": (75, 99),
    "nested_blocky_difference_holes3_m40_n48_s1003": (207, 266),
    "nested_blocky_difference_holes3_m64_n64_s1004": (167, 248),
    "nested_blocky_difference_holes3_m16_n16_s1005": (27, 38),
    "nested_blocky_difference_holes3_m24_n20_s1006": (32, 44),
    "nested_blocky_difference_holes3_m32_n32_s1007": (89, 155),
    "nested_blocky_difference_holes3_m40_n48_s1008": (148, 280),
    "nested_blocky_difference_holes3_m64_n64_s1009": (257, 453),
    "nested_blocky_difference_holes3_m16_n16_s1010": (103, 124),
    "nested_blocky_difference_holes3_m24_n20_s1011": (90, 125),
    "nested_blocky_difference_holes3_m32_n32_s1012": (143, 174),
    "nested_blocky_difference_holes3_m40_n48_s1013": (209, 254),
    "nested_blocky_difference_holes3_m64_n64_s1014": (326, 441),
    "nested_blocky_difference_holes3_m16_n16_s1015": (63, 91),
    "nested_blocky_difference_holes3_m24_n20_s1016": (100, 155),
    "nested_blocky_difference_holes3_m32_n32_s1017": (134, 180),
    "nested_blocky_difference_holes3_m40_n48_s1018": (159, 315),
    "nested_blocky_difference_holes3_m64_n64_s1019": (322, 389),
}


class CorpusError(ValueError):
    pass


@dataclass
class CorpusInstance:
    label: str
    spec: FamilySpec
    matrix: BooleanMatrix
    factorization: Factorization | None
    truth: dict


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    failures: tuple[str, ...] = ()

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.2f}s)"

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": self.seconds,
            "failures": list(self.failures),
        }


# -- corpus ----------------------------------------------------------------

def build_corpus(specs: list[FamilySpec] | None = None) -> list[CorpusInstance]:
    out = []
    for spec in specs if specs is not None else corpus_specs():
        inst = generate(spec)
        out.append(CorpusInstance(spec.label(), spec, inst.matrix, inst.factorization, inst.truth))
    return out


def write_corpus(directory: str | Path, specs: list[FamilySpec] | None = None) -> int:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for inst in build_corpus(specs):
        bm = f"{inst.label}.bm"
        write_bm(inst.matrix, directory / bm)
        lf = None
        if inst.factorization is not None:
            lf = f"{inst.label}.lf"
            write_lf(inst.factorization, directory / lf)
        entries.append({
            "label": inst.label, "spec": inst.spec.to_json(), "matrix": bm,
            "factorization": lf, "truth": inst.truth,
        })
    (directory / MANIFEST).write_text(json.dumps({"instances": entries}, indent=1, sort_keys=True) + "\n")
    return len(entries)


def load_corpus(directory: str | Path, tol: float = TOL) -> list[CorpusInstance]:
    """Read a corpus written by :func:`write_corpus`; factorizations are not verified here."""
    directory = Path(directory)
    manifest = directory / MANIFEST
    if not directory.is_dir() or not manifest.exists():
        raise CorpusError(f"no instances: {directory} has no {MANIFEST}")
    entries = json.loads(manifest.read_text()).get("instances", [])
    if not entries:
        raise CorpusError(f"no instances in {directory}")
    out = []
    for e in entries:
        spec = FamilySpec(e["spec"]["name"], e["spec"]["params"], e["spec"]["seed"])
        try:
            A = read_bm(directory / e["matrix"])
            F = read_lf(directory / e["factorization"], tol) if e["factorization"] else None
        except (OSError, ValueError) as exc:
            raise CorpusError(f"instance {e['label']}: {exc}") from None
        out.append(CorpusInstance(e["label"], spec, A, F, e["truth"]))
    return out


@dataclass
class SuiteContext:
    corpus: list[CorpusInstance]
    config: Config = field(default_factory=Config)
    traces: dict[str, ExtractionTrace] = field(default_factory=dict)
    covers: dict[str, BlockyCover] = field(default_factory=dict)
    invalid: dict[str, str] = field(default_factory=dict)
    crashes: dict[str, str] = field(default_factory=dict)
    extract_seconds: float = 0.0
    _ready: bool = False

    def factored(self) -> list[CorpusInstance]:
        return [c for c in self.corpus if c.factorization is not None and c.label not in self.invalid]

    def prepare(self) -> None:
        """Verify every factorization and extract once per valid instance."""
        if self._ready:
            return
        start = time.perf_counter()
        cfg = self.config.extract_config()
        for c in self.corpus:
            if c.factorization is None:
                continue
            bad = verify(c.matrix, c.factorization)
            if bad:
                self.invalid[c.label] = f"{len(bad)} violations, first {bad[0]}"
                continue
            try:
                cover, trace = extract_blocky(c.matrix, c.factorization, cfg)
            except AssertionError as exc:
                self.crashes[c.label] = f"{type(exc).__name__}: {exc}"
                continue
            self.covers[c.label] = cover
            self.traces[c.label] = trace
        self.extract_seconds = time.perf_counter() - start
        self._ready = True


def _result(number, name, start, failures, detail, limit=None) -> CriterionResult:
    seconds = time.perf_counter() - start
    failures = list(failures)
    if limit is not None and seconds >= limit:
        failures.append(f"runtime {seconds:.2f}s exceeds {limit}s")
    return CriterionResult(number, name, not failures, detail if not failures else failures[0], seconds,
                           tuple(failures[:20]))


# -- oracles ---------------------------------------------------------------

def brute_force_td(A: BooleanMatrix) -> int:
    """Try every pair of ordered index sequences, longest first."""
    dense = A.dense.astype(bool)
    for d in range(min(A.m, A.n), 0, -1):
        target = np.tril(np.ones((d, d), dtype=bool))
        for rs in itertools.permutations(range(A.m), d):
            sub = dense[list(rs)]
            for cs in itertools.permutations(range(A.n), d):
                if np.array_equal(sub[:, list(cs)], target):
                    return d
    return 0


def naive_walsh(values) -> np.ndarray:
    """``f̂(a) = 2⁻ᵏ Σₓ f(x)(-1)^{a·x}`` by the O(4ᵏ) double loop."""
    N = len(values)
    out = np.zeros(N)
    for a in range(N):
        out[a] = sum(values[x] * (-1) ** bin(a & x).count("1") for x in range(N)) / N
    return out


# -- criteria ----------------------------------------------------------------

def criterion_1(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    failures = []
    cfg = ctx.config.extract_config()
    for idx in range(200):
        m, n = (int(x) for x in rng.integers(1, 65, size=2))
        k = int(rng.integers(1, min(m, n) + 1))
        inst = random_blocky(m, n, k, seed=idx)
        cover, trace = extract_blocky(inst.matrix, inst.factorization, cfg)
        F = support_size(inst.matrix)
        if trace.coverage != F or cover_support(inst.matrix, cover) != F:
            failures.append(f"random_blocky #{idx}: coverage {trace.coverage} != F {F}")
    return _result(1, "blocky round-trip", start, failures, "200/200 covered exactly", limit=10.0)


def criterion_2(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    failures, count, tight = [], 0, 0
    for c in ctx.factored():
        rep = potential(c.matrix, c.factorization, check=False)
        count += 1
        if not (rep.lower - TOL <= rep.value <= rep.upper + TOL):
            failures.append(f"{c.label}: Π={rep.value} outside [{rep.lower}, {rep.upper}]")
        if c.spec.name in ("identity", "all_ones", "random_blocky"):
            tight += 1
            if abs(rep.value - rep.upper) > TOL or abs(rep.value - rep.lower) > TOL:
                failures.append(f"{c.label}: λ=1 canonical bounds not tight (Π={rep.value})")
    return _result(2, "potential bounds", start, failures, f"{count} instances, {tight} tight at λ=1")


def criterion_3(ctx: SuiteContext) -> CriterionResult:
    """Checks the four sum bounds exactly as stated, plus the large-pair counts.

    The column lower bound ``|C_j|²/λ²`` is the one that can fail: the
    argument that yields it only gives ``|C_j|²/λ⁴`` (the column vector has
    squared norm up to ``λ²``, not 1).  The detail line reports how many
    instances break the stated bound and whether the ``λ⁴`` form holds.
    """
    start = time.perf_counter()
    failures, count, col_lower, weak_ok = [], 0, 0, True
    for c in ctx.factored():
        if c.spec.name not in ("group_lift_random", "nested_blocky_difference", "identity", "all_ones"):
            continue
        F = c.factorization
        count += 1
        sums = inner_product_sums(F, c.matrix)
        msgs = sums.violations(F.lam, TOL)
        if any("|C_j|^2/lam^2" in msg for msg in msgs):
            col_lower += 1
        for msg in msgs:
            failures.append(f"{c.label}: {msg}")
        c2 = sums.col_sizes.astype(float) ** 2
        if np.any(sums.col_sums < c2 / F.lam ** 4 - TOL):
            weak_ok = False
        col_sizes = c.matrix.col_degrees
        for t in range(c.matrix.n):
            need = col_sizes[t] ** 2 / (2 * F.lam ** 2)
            if large_pair_count(F, c.matrix, t) < need - TOL:
                failures.append(f"{c.label}: column {t + 1} has too few large pairs")
    detail = f"{count} instances"
    if failures:
        detail = (f"{col_lower}/{count} instances break the column lower bound |C_j|^2/lam^2 "
                  f"(|C_j|^2/lam^4 {'holds' if weak_ok else 'also fails'}); "
                  f"{len(failures)} violations, first: {failures[0]}")
    res = _result(3, "inner-product sums and large pairs", start, failures, detail)
    return CriterionResult(res.number, res.name, res.passed, detail, res.seconds, res.failures)


def criterion_4(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    ctx.prepare()
    failures = [f"{label}: {msg}" for label, msg in ctx.crashes.items()]
    count = 0
    for c in ctx.factored():
        if c.matrix.is_zero():
            continue
        count += 1
        try:
            pivotal_row(c.matrix, c.factorization)
        except AssertionError as exc:
            failures.append(f"{c.label}: {exc}")
    if count < 1000:
        failures.append(f"only {count} nonzero factored instances (need >= 1000)")
    return _result(4, "pivotal row", start, failures, f"{count} instances, no assertion fired")


def criterion_5(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    ctx.prepare()
    failures, count = [], 0
    for label, trace in ctx.traces.items():
        for s in trace.by_branch("Projection"):
            count += 1
            d = s.detail
            if d["potential_drop"] < 2 * d["support_drop"] - TOL:
                failures.append(f"{label} step {s.id}: Π drop {d['potential_drop']} < 2η = {2 * d['support_drop']}")
            if d["support_drop"] < 1:
                failures.append(f"{label} step {s.id}: support did not drop")
            if not d["verify_ok"]:
                failures.append(f"{label} step {s.id}: projected factorization fails verify")
    if count == 0:
        failures.append("no Projection step was taken anywhere in the suite")
    return _result(5, "projection step", start, failures, f"{count} projection steps")


def criterion_6(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    failures = []
    for code in range(512):
        rows = [(code >> (3 * i)) & 7 for i in range(3)]
        A = BooleanMatrix(3, 3, rows)
        got, want = threshold_dimension(A).d, brute_force_td(A)
        if got != want:
            failures.append(f"3x3 #{code}: TD {got} != brute force {want}")
    rng = np.random.default_rng(6)
    for idx in range(500):
        A = BooleanMatrix.from_array(rng.integers(0, 2, size=(4, 4)))
        got, want = threshold_dimension(A).d, brute_force_td(A)
        if got != want:
            failures.append(f"4x4 #{idx}: TD {got} != brute force {want}")
    for idx in range(50):
        inst = random_blocky(int(rng.integers(1, 25)), int(rng.integers(1, 25)), 1, seed=idx)
        if threshold_dimension(inst.matrix).d != 1:
            failures.append(f"random blocky #{idx}: TD != 1")
    for n in range(1, 13):
        if threshold_dimension(half_graph(n)).d != n:
            failures.append(f"half_graph({n}): TD != {n}")
    return _result(6, "threshold dimension oracle", start, failures,
                   "512 3x3 + 500 4x4 match brute force; blocky 1; half-graphs n", limit=60.0)


def criterion_7(ctx: SuiteContext, gamma_cmd: Callable[[int], float] | None = None) -> CriterionResult:
    """``gamma_cmd(n)`` is the CLI's half-graph value (γ₂ of the wrap-around half-graph)."""
    from .cli import halfgraph_value

    gamma_cmd = gamma_cmd or halfgraph_value
    start = time.perf_counter()
    failures = []
    v1 = gamma_cmd(1)
    if abs(v1 - 1.0) > TOL:
        failures.append(f"n=1 gives {v1!r}, expected 1")
    v2 = gamma_cmd(2)
    if abs(v2 - (0.5 + math.sqrt(2) / 2)) > TOL:
        failures.append(f"n=2 gives {v2!r}, expected 1/2 + sqrt(2)/2")
    n = 2
    while n <= 4096:
        v = gamma_cmd(n)
        if v < math.log(n) / (2 * math.pi) - 1:
            failures.append(f"n={n}: {v} < ln(n)/(2π) - 1")
        n *= 2
    return _result(7, "half-graph bound", start, failures, f"n=1 -> {v1:.12g}, n=2 -> {v2:.12g}, n<=4096 above bound",
                   limit=5.0)


def criterion_8(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    failures = []
    for idx in range(100):
        k = 1 + idx % 5
        f = GroupFunction.random(k, (0.25, 0.5, 0.75)[idx % 3], seed=7000 + idx)
        A, F = group_lift(f)
        expect = np.array([[f.values[x ^ y] for y in range(2 ** k)] for x in range(2 ** k)])
        if np.abs(F.U @ F.V - expect).max() > TOL or not np.array_equal(A.dense, expect):
            failures.append(f"lift #{idx}: reproduction error")
        norm = float(np.abs(naive_walsh(f.values)).sum())
        if abs(F.lam - norm) > TOL:
            failures.append(f"lift #{idx}: λ={F.lam} vs naive ‖f‖_A={norm}")
        if verify(A, F):
            failures.append(f"lift #{idx}: verify fails")
    rng = np.random.default_rng(8)
    cosets = 0
    for k in range(1, 6):
        for _ in range(6):
            gens = [int(g) for g in rng.integers(0, 2 ** k, size=int(rng.integers(0, k + 1)))]
            f = GroupFunction.coset(k, gens, int(rng.integers(0, 2 ** k)))
            A, F = group_lift(f)
            cosets += 1
            if abs(F.lam - 1.0) > TOL or is_blocky(A) is None or verify(A, F):
                failures.append(f"coset k={k} gens={gens}: λ={F.lam}, blocky={is_blocky(A) is not None}")
    return _result(8, "group lifts", start, failures, f"100 lifts exact, {cosets} cosets at λ=1 and blocky")


def criterion_9(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    ctx.prepare()
    failures, count, tddrops = [], 0, 0
    for label, trace in ctx.traces.items():
        lam4 = trace.lam ** 4
        for s in trace.steps:
            if s.branch not in ("Rect", "TDDrop"):
                continue
            count += 1
            d = s.detail
            if 2 * d["retained_ones"] < d["inner_ones"]:
                failures.append(f"{label} step {s.id}: retained {d['retained_ones']} < half of {d['inner_ones']}")
            if d["complement_ones"] < s.support - 10 * lam4 * d["inner_ones"] - TOL:
                failures.append(f"{label} step {s.id}: complement inequality fails")
            if s.branch == "TDDrop" and s.td_exact and d["child_td_exact"]:
                tddrops += 1
                if d["child_td"] > s.td - 1:
                    failures.append(f"{label} step {s.id}: TD {d['child_td']} not below {s.td}")
    return _result(9, "case split", start, failures, f"{count} split steps, {tddrops} exact TD drops")


def criterion_10(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    ctx.prepare()
    failures = []
    by_label = {c.label: c for c in ctx.corpus}
    labels = [s.label() for s in regression_specs()]
    fractions = []
    for label in labels:
        if label not in by_label:
            failures.append(f"{label}: missing from corpus")
            continue
        if label not in ctx.traces:
            failures.append(f"{label}: no extraction ({ctx.invalid.get(label) or ctx.crashes.get(label)})")
            continue
        trace = ctx.traces[label]
        got = (trace.coverage, trace.support)
        fractions.append(trace.fraction)
        if trace.coverage <= 0:
            failures.append(f"{label}: zero coverage")
        if PINNED_REGRESSION.get(label) != got:
            failures.append(f"{label}: coverage/support {got} != pinned {PINNED_REGRESSION.get(label)}")
        audit = guarantee_ledger(trace, ctx.config.ledger_constant)
        for e in audit.flags:
            failures.append(f"{label}: ledger flag at step {e.step} ({e.branch}) {e.note}")
    low = min(fractions) if fractions else 0.0
    return _result(10, "extraction regression", start, failures,
                   f"{len(fractions)} pinned, min fraction {low:.4f}, no ledger flags at C0={ctx.config.ledger_constant}")


def criterion_11(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    ctx.prepare()
    failures, count = [], 0
    by_label = {c.label: c for c in ctx.corpus}
    for label, cover in ctx.covers.items():
        A = by_label[label].matrix
        coverage = ctx.traces[label].coverage
        if coverage == 0:
            continue
        count += 1
        cr = corollary_rectangle(A, cover)
        s, t = cr.rect.dims
        if not (2 * A.n * s >= coverage and 2 * A.m * t >= coverage):
            failures.append(f"{label}: block {cr.index} fails the thresholds")
        # smallest surviving index, rechecked block by block
        first = next(k for k, b in enumerate(cover.blocks)
                     if 2 * A.n * b.dims[0] >= coverage and 2 * A.m * b.dims[1] >= coverage)
        if first != cr.index:
            failures.append(f"{label}: survivor {cr.index} is not the first ({first})")
    return _result(11, "corollary rectangle", start, failures, f"{count} covers certified in integers")


def criterion_12(ctx: SuiteContext) -> CriterionResult:
    start = time.perf_counter()
    A = BooleanMatrix.from_array([[1, 0], [1, 1]])
    cfg = ctx.config
    F = als_factorize(A, 1.0, seed=0, iters=cfg.als_iters, restarts=8, tol=cfg.tol,
                      polish_steps=cfg.als_polish_steps, polish_max_entries=cfg.als_polish_max_entries)
    failures = [] if F is None else ["ALS returned a λ=1 factorization of [[1,0],[1,1]]"]
    return _result(12, "ALS negative control", start, failures, "no λ=1 factorization in 8 restarts")


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
)


@dataclass(frozen=True)
class SuiteResult:
    results: tuple[CriterionResult, ...]
    invalid: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results) and not self.invalid

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "criteria": [r.to_json() for r in self.results],
            "invalid_instances": dict(sorted(self.invalid.items())),
        }


def run_suite(ctx: SuiteContext, echo: Callable[[str], None] | None = None) -> SuiteResult:
    ctx.prepare()
    if echo:
        for label, msg in sorted(ctx.invalid.items()):
            echo(f"[FAIL] instance {label}: factorization invalid ({msg})")
    results = []
    for crit in CRITERIA:
        r = crit(ctx)
        results.append(r)
        if echo:
            echo(r.line())
    return SuiteResult(tuple(results), dict(ctx.invalid))
