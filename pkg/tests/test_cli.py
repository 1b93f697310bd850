import json
import subprocess
import sys

import pytest

from setrewrite.cli import main

from conftest import ADD_TRS, IF_TERM, IF_TRS, PEANO_FIB, peano


@pytest.fixture
def files(tmp_path):
    (tmp_path / "if.trs").write_text(IF_TRS)
    (tmp_path / "add_auto.trs").write_text(ADD_TRS)
    return tmp_path


def run(capsys, *argv):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as e:  # argparse usage errors
        code = e.code
    out, err = capsys.readouterr()
    return code, out, err


def test_rewrite(capsys, files):
    code, out, err = run(capsys, "rewrite", files / "if.trs", IF_TERM)
    assert code == 0 and out == "false\n"
    assert err.startswith("# steps=2 inspections=5 checks=0 construct_ms=")


@pytest.mark.parametrize("engine", ["oracle", "reference", "reference-linear"])
def test_rewrite_other_engines(capsys, files, engine):
    code, out, _ = run(capsys, "rewrite", files / "if.trs", IF_TERM, "--engine", engine)
    assert code == 0 and out == "false\n"


def test_rewrite_term_from_file_with_trace(capsys, files):
    (files / "t.term").write_text(IF_TERM + "\n")
    code, out, err = run(capsys, "rewrite", files / "if.trs", f"@{files / 't.term'}", "--trace")
    assert code == 0 and out == "false\n"
    assert err.splitlines()[0] == "grow\ts0\tε\tif"
    assert "reduce\t1\tR5" in err


def test_rewrite_json(capsys, files):
    code, out, _ = run(capsys, "rewrite", files / "if.trs", IF_TERM, "--json", "--trace")
    rec = json.loads(out)
    assert code == 0 and rec["normal_form"] == "false" and rec["symbol_inspections"] == 5
    assert len(rec["trace"]) == 7 and "rewrite_ms" in rec and "construct_ms" in rec


@pytest.mark.parametrize(
    "argv",
    [
        ["rewrite", "{trs}", "if(not(true)"],
        ["rewrite", "{trs}", "maybe"],
        ["rewrite", "{trs}", IF_TERM, "--relation", "standard"],
        ["rewrite", "{missing}", IF_TERM],
        ["rewrite", "{trs}", IF_TERM, "--engine", "quantum"],
        ["rewrite", "{trs}", IF_TERM, "--max-steps", "1"],
    ],
)
def test_rewrite_errors(capsys, files, argv):
    argv = [a.format(trs=files / "if.trs", missing=files / "nope.trs") for a in argv]
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and err


def test_dot(capsys, files):
    code, out, _ = run(capsys, "dot", files / "add_auto.trs")
    assert code == 0 and out.startswith("digraph")
    again = run(capsys, "dot", files / "add_auto.trs")[1]
    assert again == out


def test_dot_stats(capsys, files):
    code, out, _ = run(capsys, "dot", files / "add_auto.trs", "--stats")
    rows = dict(line.split("\t") for line in out.splitlines())
    assert code == 0 and rows == {"states": "4", "symbols": "3", "rules": "1", "transition_cells": "12",
                                  "branches": "14"}
    code, out, _ = run(capsys, "dot", files / "if.trs", "--stats", "--json", "--relation", "outermost")
    st = json.loads(out)
    assert st["transition_cells"] == st["states"] * st["symbols"]


def test_dot_state_cap(capsys, tmp_path):
    (tmp_path / "fib.trs").write_text(PEANO_FIB)
    code, _, err = run(capsys, "dot", tmp_path / "fib.trs", "--max-states", "2")
    assert code == 1 and "cap" in err


def _suite(tmp_path, entries):
    d = tmp_path / "suite"
    d.mkdir()
    for name, trs, term, nf in entries:
        (d / f"{name}.trs").write_text(trs)
        (d / f"{name}.term").write_text(term)
        if nf is not None:
            (d / f"{name}.nf").write_text(nf)
    return d


def _table(out):
    lines = out.splitlines()
    header = lines[0].split("\t")
    rows = [dict(zip(header, line.split("\t"))) for line in lines[1:-1]]
    return header, rows, lines[-1]


def test_bench_small_suite(capsys, tmp_path):
    d = _suite(tmp_path, [
        ("fib6", PEANO_FIB, f"fib({peano(6)})", peano(8)),
        ("iffy", IF_TRS, IF_TERM, None),
    ])
    code, out, _ = run(capsys, "bench", d, "--timeout", "30")
    header, rows, footer = _table(out)
    assert code == 0 and footer == "Total failures: 0"
    assert header == ["name", "engine", "solved", "rewrite_steps", "inspections", "inspections_per_step",
                      "construct_ms", "rewrite_ms"]
    assert [r["name"] for r in rows] == ["fib6", "iffy"]
    assert rows[1]["rewrite_steps"] == "2" and rows[1]["inspections"] == "5"
    assert rows[1]["inspections_per_step"] == "2.5"


def test_bench_wrong_and_dnf(capsys, tmp_path):
    loop = "symbols: a:0 b:0\nvars:\nrules:\na -> b\nb -> a\n"
    d = _suite(tmp_path, [
        ("loop", loop, "a", None),
        ("wrong", PEANO_FIB, f"fib({peano(3)})", peano(3)),
    ])
    code, out, _ = run(capsys, "bench", d, "--timeout", "0.5")
    _, rows, footer = _table(out)
    assert [r["solved"] for r in rows] == ["DNF", "WRONG"]
    assert footer == "Total failures: 2" and code == 2
    code, out, _ = run(capsys, "bench", d, "--timeout", "0.5", "--only", "loop")
    assert code == 1 and out.splitlines()[-1] == "Total failures: 1"


def test_bench_step_limit_is_an_error_row(capsys, tmp_path):
    d = _suite(tmp_path, [("fib6", PEANO_FIB, f"fib({peano(6)})", None)])
    code, out, _ = run(capsys, "bench", d, "--max-steps", "2", "--json")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 1 and recs[0]["solved"] == "ERROR" and recs[-1] == {"total_failures": 1}


def test_bench_empty_suite(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", tmp_path)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2 and lines[-1] == "Total failures: 0"


def test_bench_missing_term(capsys, tmp_path):
    (tmp_path / "x.trs").write_text(IF_TRS)
    code, _, err = run(capsys, "bench", tmp_path)
    assert code == 1 and "missing" in err


def test_bench_bundled_subset(capsys):
    code, out, _ = run(capsys, "bench", "--only", "mergesort32", "bubblesort50")
    _, rows, footer = _table(out)
    assert code == 0 and [r["solved"] for r in rows] == ["yes", "yes"]


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--iterations", "25", "--seed", "3")
    assert code == 0 and out.startswith("selftest passed: 25 cases, seed 3")


def test_usage_errors_exit_one(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys)[0] == 1


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "setrewrite", "rewrite", str(files / "if.trs"), IF_TERM],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and proc.stdout == "false\n"
