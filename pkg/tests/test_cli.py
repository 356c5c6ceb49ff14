from __future__ import annotations

import json
import subprocess
import sys

import pytest

from blockycover.acceptance import write_corpus
from blockycover.cli import EXIT_INPUT, EXIT_OK, EXIT_SUITE, main
from blockycover.families import FamilySpec


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report_of(out):
    doc = json.loads(out)
    assert doc["schema"] == "blockycover.report/1"
    return doc


def _strip_timing(out):
    doc = json.loads(out)
    doc.pop("timing")
    return doc


def test_gen_analyze_extract_rect(tmp_path, capsys):
    prefix = tmp_path / "nd"
    code, out, _ = run(capsys, "gen", "--family", "nested_blocky_difference",
                       "--param", "m=24", "--param", "n=20", "--seed", 3, "--out", prefix)
    assert code == EXIT_OK
    assert report_of(out)["results"]["lambda"] == 2.0
    for ext in (".bm", ".lf", ".truth.json"):
        assert (tmp_path / f"nd{ext}").exists()

    code, out, _ = run(capsys, "analyze", f"{prefix}.bm")
    res = report_of(out)["results"]
    assert code == EXIT_OK and res["m"] == 24 and res["td"]["exact"]

    cover, trace, rep = tmp_path / "c.json", tmp_path / "t.json", tmp_path / "r.json"
    code, out, _ = run(capsys, "extract", f"{prefix}.bm", "--factorization", f"{prefix}.lf",
                       "--cover", cover, "--trace", trace, "--report", rep)
    assert code == EXIT_OK
    res = report_of(out)["results"]
    assert res["coverage"] > 0 and res["ledger_flags"] == []
    assert json.loads(trace.read_text())["coverage"] == res["coverage"]
    assert json.loads(rep.read_text()) == json.loads(out)

    code, out, _ = run(capsys, "rect", f"{prefix}.bm", cover)
    res = report_of(out)["results"]
    assert code == EXIT_OK and res["certified"] and res["block_index"] >= 1


def test_output_deterministic_apart_from_timing(tmp_path, capsys):
    prefix = tmp_path / "g"
    run(capsys, "gen", "--family", "group_lift_random", "--param", "k=3", "--param", "density=0.5",
        "--seed", 9, "--out", prefix)
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "extract", f"{prefix}.bm", "--factorization", f"{prefix}.lf")
        assert code == EXIT_OK
        outs.append(_strip_timing(out))
    assert outs[0] == outs[1]


def test_half_graph_analyze(tmp_path, capsys):
    prefix = tmp_path / "h"
    run(capsys, "gen", "--family", "half_graph", "--param", "n=4", "--out", prefix)
    assert not (tmp_path / "h.lf").exists()
    code, out, _ = run(capsys, "analyze", f"{prefix}.bm")
    res = report_of(out)["results"]
    assert res["td"]["value"] == 4 and res["max_rectangle"]["size"] == 6


def test_factorize(tmp_path, capsys):
    bm = tmp_path / "l.bm"
    bm.write_text("2 2\n10\n11\n")
    lf = tmp_path / "l.lf"
    code, _, err = run(capsys, "factorize", bm, "--lambda", 1, "--out", lf)
    assert code == EXIT_INPUT and "ALS found no" in err
    assert not lf.exists()
    code, out, _ = run(capsys, "factorize", bm, "--lambda", 1.2, "--out", lf)
    assert code == EXIT_OK and lf.exists()
    code, out, _ = run(capsys, "extract", bm, "--factorization", lf)
    assert code == EXIT_OK and report_of(out)["results"]["coverage"] >= 1


def test_extract_with_als(tmp_path, capsys):
    bm = tmp_path / "i.bm"
    bm.write_text("3 3\n100\n010\n001\n")
    code, out, _ = run(capsys, "extract", bm, "--als", 1)
    assert code == EXIT_OK and report_of(out)["results"]["fraction"] == 1.0


def test_gamma(tmp_path, capsys):
    code, out, _ = run(capsys, "gamma", "--halfgraph", 2)
    assert code == EXIT_OK
    assert report_of(out)["results"]["wraparound_gamma2"] == pytest.approx(1.2071067811865475)
    fn = tmp_path / "f.txt"
    fn.write_text("2\n1101\n")
    code, out, _ = run(capsys, "gamma", fn, "--lift", tmp_path / "lift")
    res = report_of(out)["results"]
    assert code == EXIT_OK and res["algebra_norm"] == pytest.approx(1.5)
    code, _, _ = run(capsys, "extract", tmp_path / "lift.bm", "--factorization", tmp_path / "lift.lf")
    assert code == EXIT_OK


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.bm"
    bad.write_text("3 3\n101\n01\n000\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == EXIT_INPUT and "line 3" in err
    code, _, err = run(capsys, "analyze", tmp_path / "missing.bm")
    assert code == EXIT_INPUT
    ok = tmp_path / "ok.bm"
    ok.write_text("2 2\n10\n01\n")
    lf = tmp_path / "x.lf"
    run(capsys, "gen", "--family", "identity", "--param", "n=3", "--out", tmp_path / "x")
    code, _, err = run(capsys, "extract", ok, "--factorization", lf)
    assert code == EXIT_INPUT and "3x3" in err
    code, _, err = run(capsys, "extract", ok)
    assert code == EXIT_INPUT
    code, _, err = run(capsys, "gen", "--family", "random_blocky", "--param", "m=3", "--out", tmp_path / "y")
    assert code == EXIT_INPUT
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"nope": 1}')
    code, _, err = run(capsys, "--config", cfg, "gamma", "--halfgraph", 2)
    assert code == EXIT_INPUT and "unknown config keys" in err


def _corrupt_first_entry(text):
    lines = text.splitlines()
    row = lines[1].split()
    row[0] = "3"  # first row of U now has norm 3
    lines[1] = " ".join(row)
    return "\n".join(lines) + "\n"


def test_invalid_factorization_rejected(tmp_path, capsys):
    run(capsys, "gen", "--family", "identity", "--param", "n=2", "--out", tmp_path / "i")
    lf = tmp_path / "i.lf"
    lf.write_text(_corrupt_first_entry(lf.read_text()))
    code, _, err = run(capsys, "extract", tmp_path / "i.bm", "--factorization", lf)
    assert code == EXIT_INPUT and "verification" in err


def test_suite_on_empty_and_small_corpus(tmp_path, capsys):
    code, _, err = run(capsys, "suite", tmp_path / "empty")
    assert code == EXIT_INPUT and "no instances" in err
    corpus = tmp_path / "corpus"
    write_corpus(corpus, [FamilySpec("identity", {"n": 3}), FamilySpec("all_ones", {"m": 2, "n": 2})])
    lf = corpus / "identity_n3_s0.lf"
    lf.write_text(_corrupt_first_entry(lf.read_text()))
    code, out, err = run(capsys, "suite", corpus)
    assert code == EXIT_SUITE
    assert "[FAIL] instance identity_n3_s0: factorization invalid" in err
    res = report_of(out)["results"]
    assert res["instances"] == 2 and not res["passed"]


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "blockycover", "--version"], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.startswith("blockycover ")
