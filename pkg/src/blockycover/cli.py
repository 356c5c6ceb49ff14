"""Command-line front end: ``blockycover <subcommand> ...``.

Exit codes: 0 success, 1 input or validation error, 2 internal assertion
(an inequality that must hold did not), 3 acceptance-suite failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__, kernels
from .config import Config, load_config
from .extract import corollary_rectangle, extract_blocky, guarantee_ledger
from .factor import FactorizationError, format_lf, potential, read_lf, verify
from .families import FAMILIES, FamilySpec, generate
from .gamma2 import (
    als_search,
    format_group_function,
    group_lift,
    halfgraph_gamma2_bound,
    halfgraph_lower_bound,
    read_group_function,
    walsh_algebra_norm,
)
from .matcore import BlockyCover, CoverViolation, MatrixFormatError, format_bm, is_blocky, read_bm, support_size
from .structure import max_one_rectangle, threshold_dimension

REPORT_SCHEMA = "blockycover.report/1"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2
EXIT_SUITE = 3


class InputError(Exception):
    pass


def halfgraph_value(n: int) -> float:
    """``γ₂`` of the wrap-around half-graph on ``Z_2n`` (what ``gamma --halfgraph`` reports)."""
    return halfgraph_lower_bound(n)


# -- I/O helpers -------------------------------------------------------------

def _read_matrix(path: str):
    try:
        return read_bm(path)
    except MatrixFormatError as exc:
        raise InputError(f"{path}: {exc}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _read_factorization(path: str, tol: float):
    try:
        return read_lf(path, tol)
    except (FactorizationError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _commit(writes: list[tuple[str | Path, str]]) -> None:
    """Write all outputs via temp files and renames, only after everything succeeded."""
    staged = []
    try:
        for path, text in writes:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _report(command: str, inputs: dict, params: dict, results: dict, config: Config, seconds: float) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "tool": {"name": "blockycover", "version": __version__},
        "command": command,
        "input": inputs,
        "parameters": params,
        "results": results,
        "config": config.to_json(),
        "timing": {"seconds": round(seconds, 6), "backend": kernels.BACKEND},
    }


def _emit(args, report: dict, extra: list[tuple[str | Path, str]] = ()) -> None:
    writes = list(extra)
    if args.report:
        writes.append((args.report, _dumps(report)))
    _commit(writes)
    sys.stdout.write(_dumps(report))


def _matrix_summary(A) -> dict:
    F = support_size(A)
    return {"m": A.m, "n": A.n, "F": F, "density": F / (A.m * A.n) if A.m and A.n else 0.0}


# -- subcommands -------------------------------------------------------------

def _parse_params(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                raise InputError(f"--param {key}: not a number: {value!r}") from None
    return out


def cmd_gen(args, config: Config) -> int:
    start = time.perf_counter()
    if args.corpus:
        from .acceptance import write_corpus

        count = write_corpus(args.corpus)
        report = _report("gen", {"corpus": str(args.corpus)}, {}, {"instances": count}, config,
                         time.perf_counter() - start)
        _emit(args, report)
        return EXIT_OK
    if not args.family or not args.out:
        raise InputError("gen needs --family and --out (or --corpus DIR)")
    spec = FamilySpec(args.family, _parse_params(args.param), args.seed)
    try:
        inst = generate(spec)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"invalid parameters for {args.family}: {exc}") from None
    writes = [(f"{args.out}.bm", format_bm(inst.matrix)),
              (f"{args.out}.truth.json", _dumps({"spec": spec.to_json(), "truth": inst.truth}))]
    files = {"matrix": f"{args.out}.bm"}
    if inst.factorization is not None:
        writes.append((f"{args.out}.lf", format_lf(inst.factorization)))
        files["factorization"] = f"{args.out}.lf"
    results = {"files": files, **_matrix_summary(inst.matrix), "truth": inst.truth,
               "lambda": None if inst.factorization is None else inst.factorization.lam}
    report = _report("gen", {"family": spec.to_json()}, {}, results, config, time.perf_counter() - start)
    _emit(args, report, writes)
    return EXIT_OK


def cmd_analyze(args, config: Config) -> int:
    start = time.perf_counter()
    A = _read_matrix(args.matrix)
    results = _matrix_summary(A)
    cover = is_blocky(A)
    results["blocky"] = cover is not None
    if cover is not None:
        results["blocks"] = len(cover.blocks)
    td = threshold_dimension(A, config.td_exact_max_dim, config.td_node_budget)
    results["td"] = {
        "value": td.d if td.exact else None,
        "lower": td.d,
        "upper": td.upper,
        "exact": td.exact,
        "witness": None if td.witness is None else {
            "rows": [i + 1 for i in td.witness.row_seq], "cols": [j + 1 for j in td.witness.col_seq]},
    }
    if A.is_zero():
        results["max_rectangle"] = None
    else:
        r = max_one_rectangle(A, args.rect_mode, config.rect_exact_max_side, config.greedy_seeds)
        results["max_rectangle"] = {"mode": r.mode, "size": r.size, **r.rect.to_json()}
    report = _report("analyze", {"matrix": args.matrix}, {"rect_mode": args.rect_mode}, results, config,
                     time.perf_counter() - start)
    _emit(args, report)
    return EXIT_OK


def _run_als(A, lam: float, seed: int, config: Config):
    rep = als_search(A, lam, seed, config.als_iters, config.als_restarts, config.tol,
                     config.als_polish_steps, config.als_polish_max_entries)
    info = {"lambda_target": lam, "best_error": rep.best_error, "best_restart": rep.best_restart,
            "settings": rep.settings, "found": rep.factorization is not None}
    return rep.factorization, info


def cmd_factorize(args, config: Config) -> int:
    start = time.perf_counter()
    A = _read_matrix(args.matrix)
    if args.lam < 1:
        raise InputError("--lambda must be at least 1")
    F, info = _run_als(A, args.lam, args.seed, config)
    if F is None:
        report = _report("factorize", {"matrix": args.matrix}, {"lambda": args.lam, "seed": args.seed},
                         {"als": info}, config, time.perf_counter() - start)
        sys.stdout.write(_dumps(report))
        raise InputError(f"ALS found no {args.lam}-factorization (best error {info['best_error']:.3g})")
    results = {"als": info, "t": F.t, "potential": potential(A, F).value}
    writes = [(args.out, format_lf(F))] if args.out else []
    report = _report("factorize", {"matrix": args.matrix}, {"lambda": args.lam, "seed": args.seed, "out": args.out},
                     results, config, time.perf_counter() - start)
    _emit(args, report, writes)
    return EXIT_OK


def cmd_extract(args, config: Config) -> int:
    start = time.perf_counter()
    A = _read_matrix(args.matrix)
    params = {"cover": args.cover, "trace": args.trace}
    inputs = {"matrix": args.matrix}
    als_info = None
    if args.factorization:
        F = _read_factorization(args.factorization, config.tol)
        inputs["factorization"] = args.factorization
    elif args.als is not None:
        if args.als < 1:
            raise InputError("--als lambda must be at least 1")
        F, als_info = _run_als(A, args.als, args.seed, config)
        params.update(als=args.als, seed=args.seed)
        if F is None:
            raise InputError(f"ALS found no {args.als}-factorization (best error {als_info['best_error']:.3g})")
    else:
        raise InputError("extract needs --factorization FILE or --als LAMBDA")
    if F.m != A.m or F.n != A.n:
        raise InputError(f"factorization is {F.m}x{F.n}, matrix is {A.m}x{A.n}")
    bad = verify(A, F)
    if bad:
        raise InputError(f"factorization fails verification: {len(bad)} violations, first {bad[0]}")
    cover, trace = extract_blocky(A, F, config.extract_config())
    audit = guarantee_ledger(trace)
    branches = {}
    for s in trace.steps:
        branches[s.branch] = branches.get(s.branch, 0) + 1
    results = {
        **_matrix_summary(A),
        "lambda": F.lam,
        "coverage": trace.coverage,
        "fraction": trace.fraction,
        "blocks": len(cover.blocks),
        "steps": len(trace.steps),
        "branches": dict(sorted(branches.items())),
        "ledger_flags": [{"step": e.step, "branch": e.branch, "ledger": e.ledger, "coverage": e.coverage,
                          "note": e.note} for e in audit.flags],
    }
    if als_info is not None:
        results["als"] = als_info
    writes = []
    if args.cover:
        writes.append((args.cover, _dumps(cover.to_json())))
    if args.trace:
        writes.append((args.trace, _dumps(trace.to_json())))
    report = _report("extract", inputs, params, results, config, time.perf_counter() - start)
    _emit(args, report, writes)
    return EXIT_OK


def cmd_rect(args, config: Config) -> int:
    start = time.perf_counter()
    A = _read_matrix(args.matrix)
    try:
        cover = BlockyCover.from_json(_read_json(args.cover))
        cr = corollary_rectangle(A, cover)
    except CoverViolation as exc:
        raise InputError(f"{args.cover}: {exc}") from None
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{args.cover}: invalid cover ({exc})") from None
    results = {
        **_matrix_summary(A),
        "coverage": cr.coverage,
        "fraction": cr.coverage / cr.support,
        "block_index": cr.index + 1,
        "rectangle": cr.rect.to_json(),
        "s": cr.s,
        "t": cr.t,
        "row_threshold": str(cr.row_threshold),
        "col_threshold": str(cr.col_threshold),
        "certified": cr.certified(),
    }
    report = _report("rect", {"matrix": args.matrix, "cover": args.cover}, {}, results, config,
                     time.perf_counter() - start)
    _emit(args, report)
    return EXIT_OK


def cmd_gamma(args, config: Config) -> int:
    start = time.perf_counter()
    writes = []
    if args.halfgraph is not None:
        n = args.halfgraph
        if n < 1:
            raise InputError("--halfgraph needs n >= 1")
        value = halfgraph_value(n)
        results = {
            "n": n,
            "wraparound_gamma2": value,
            "halfgraph_lower_bound": halfgraph_gamma2_bound(n),
            "log_reference": math.log(n) / (2 * math.pi) - 1,
        }
        inputs = {"halfgraph": n}
    elif args.function:
        try:
            f = read_group_function(args.function)
        except ValueError as exc:
            raise InputError(f"{args.function}: {exc}") from None
        except OSError as exc:
            raise InputError(f"{args.function}: {exc.strerror}") from None
        results = {"k": f.k, "algebra_norm": walsh_algebra_norm(f),
                   "coefficients": [float(c) for c in f.coeffs]}
        inputs = {"function": args.function}
        if args.lift:
            A, F = group_lift(f, config.tol)
            writes += [(f"{args.lift}.bm", format_bm(A)), (f"{args.lift}.lf", format_lf(F))]
            results["lift"] = {"matrix": f"{args.lift}.bm", "factorization": f"{args.lift}.lf", "lambda": F.lam}
    else:
        raise InputError("gamma needs a function file or --halfgraph N")
    report = _report("gamma", inputs, {"lift": args.lift}, results, config, time.perf_counter() - start)
    _emit(args, report, writes)
    return EXIT_OK


def cmd_suite(args, config: Config) -> int:
    from .acceptance import CorpusError, SuiteContext, load_corpus, run_suite

    start = time.perf_counter()
    try:
        corpus = load_corpus(args.corpus, config.tol)
    except CorpusError as exc:
        raise InputError(str(exc)) from None
    ctx = SuiteContext(corpus, config)
    result = run_suite(ctx, echo=lambda line: print(line, file=sys.stderr))
    summary = result.to_json()
    summary["instances"] = len(corpus)
    report = _report("suite", {"corpus": str(args.corpus)}, {}, summary, config, time.perf_counter() - start)
    _emit(args, report)
    return EXIT_OK if result.passed else EXIT_SUITE


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockycover", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"blockycover {__version__}")
    p.add_argument("--config", help="JSON config file (tolerances, constants, thresholds)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--report", help="also write the JSON report here")
        return sp

    g = common(sub.add_parser("gen", help="generate an instance or the acceptance corpus"))
    g.add_argument("--family", choices=FAMILIES + ("projection_gadget",))
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="family parameter (repeatable)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output prefix; writes PREFIX.bm, PREFIX.lf, PREFIX.truth.json")
    g.add_argument("--corpus", help="write the acceptance corpus into this directory")
    g.set_defaults(func=cmd_gen)

    a = common(sub.add_parser("analyze", help="blockiness, threshold dimension, largest 1-rectangle"))
    a.add_argument("matrix")
    a.add_argument("--rect-mode", choices=("auto", "exact", "greedy"), default="auto")
    a.set_defaults(func=cmd_analyze)

    f = common(sub.add_parser("factorize", help="search for a λ-factorization by ALS"))
    f.add_argument("matrix")
    f.add_argument("--lambda", dest="lam", type=float, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", help="write the factorization (.lf) here")
    f.set_defaults(func=cmd_factorize)

    e = common(sub.add_parser("extract", help="extract a blocky cover"))
    e.add_argument("matrix")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--factorization", help=".lf file")
    src.add_argument("--als", type=float, metavar="LAMBDA", help="find the factorization by ALS")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--cover", help="write the cover JSON here")
    e.add_argument("--trace", help="write the trace JSON here")
    e.set_defaults(func=cmd_extract)

    r = common(sub.add_parser("rect", help="certified large rectangle from a cover"))
    r.add_argument("matrix")
    r.add_argument("cover")
    r.set_defaults(func=cmd_rect)

    gm = common(sub.add_parser("gamma", help="Fourier algebra norm or the half-graph bound"))
    gm.add_argument("function", nargs="?", help="group function file")
    gm.add_argument("--halfgraph", type=int, metavar="N")
    gm.add_argument("--lift", metavar="PREFIX", help="write the group lift as PREFIX.bm and PREFIX.lf")
    gm.set_defaults(func=cmd_gamma)

    s = common(sub.add_parser("suite", help="run the acceptance suite on a corpus directory"))
    s.add_argument("corpus")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"internal assertion failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
