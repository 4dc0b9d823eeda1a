from __future__ import annotations

import json
from importlib import resources

import jsonschema
import pytest

from conftest import fixture_path
from sizeterm.cli import main

SCHEMA = json.loads(resources.files("sizeterm").joinpath("report.schema.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_terminating(capsys):
    code, out, _ = run(capsys, "check", fixture_path("pivot"))
    assert code == 0 and "TERMINATING" in out


def test_check_unknown(capsys):
    code, out, _ = run(capsys, "check", fixture_path("loop"))
    assert code == 1 and "condition (viii)" in out


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", fixture_path("no_such_program"))
    assert code == 2 and err.startswith("error:")


def test_parse_error_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.hrs"
    bad.write_text("type ;")
    assert run(capsys, "check", bad)[0] == 2


def test_budget_exhaustion(capsys):
    code, _, err = run(capsys, "solve", "--budget", "1", "forall x y. x + y = a => exists w. w + w = x")
    assert code == 3 and "budget" in err


@pytest.mark.parametrize("text, verdict", [
    ("a = d + 1 => d < a", "VALID"),
    ("a < a", "UNSATISFIABLE"),
    ("a = b + 1", "SATISFIABLE-ONLY"),
])
def test_solve(capsys, text, verdict):
    code, out, _ = run(capsys, "solve", text)
    assert code == 0 and out.strip() == verdict


def test_typecheck_accepted(capsys):
    code, out, _ = run(capsys, "typecheck", fixture_path("pivot"), "let z = pivot x l in app (fst z) (snd z)",
                       "list^a", "--env", "x : nat, l : list^a", "--trace")
    assert code == 0 and out.rstrip().endswith("ACCEPTED")
    assert any(line.startswith("RULE ") and " AT root" in line for line in out.splitlines())


def test_typecheck_rejected(capsys):
    code, out, _ = run(capsys, "typecheck", fixture_path("minus_div"), "s x", "nat^a", "--env", "x : nat^a")
    assert code == 1 and "counterexample: a = " in out


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", fixture_path("minus_div"), "div (s (s (s (s 0)))) (s 0)")
    assert code == 0 and out.startswith("2  (")


def test_eval_trace(capsys):
    code, out, _ = run(capsys, "eval", fixture_path("minus_div"), "minus (s 0) (s 0)", "--trace")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "root: minus 1 1 => minus 0 0"
    assert lines[-1] == "0  (2 steps)"


def test_eval_out_of_fuel(capsys):
    code, out, _ = run(capsys, "eval", fixture_path("loop"), "f 0", "--fuel", "10")
    assert code == 1 and out.startswith("fuel exhausted after 10 steps")


@pytest.mark.parametrize("name", ["pivot", "loop", "mc91", "filter"])
def test_json_report_matches_schema(capsys, name):
    code, out, _ = run(capsys, "check", fixture_path(name), "--json", "--trace")
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert code == (0 if report["status"] == "terminating" else 1)


def test_explain_lists_obligations(capsys):
    _, out, _ = run(capsys, "check", fixture_path("pivot"), "--explain")
    assert "O1" in out and "VALID" in out.upper()


def test_trust_measure(capsys):
    code, out, _ = run(capsys, "check", fixture_path("loop_s"), "--trust-measure", "f:o1 < n1")
    assert "UNSOUND-IF-NOT-WF" in out
    assert code in (0, 1)


def test_trust_measure_unknown_function(capsys):
    assert run(capsys, "check", fixture_path("loop_s"), "--trust-measure", "nope:o1 < n1")[0] == 2
