import json
from pathlib import Path

import pytest

from qvoa.cli import run_cli
from qvoa.dsl import (DslError, catalog_differences, compile_text, load_model, parse,
                      parse_or_raise, pretty, shipped_model_path)
from qvoa.sl2 import make_catalog

FIX = Path(__file__).parent / "fixtures"


def diags_for(name):
    with pytest.raises(DslError) as info:
        load_model(str(FIX / name))
    return info.value.diagnostics


def test_minimal_program():
    m = load_model(str(FIX / "minimal.vop"))
    assert sorted(m.ops) == ["E", "EF", "F"]
    assert sorted(m.sums) == ["J"]
    assert m.checks == [("correlations", {})]


def test_empty_program_gives_empty_catalog():
    m = compile_text("")
    assert m.ops == {} and m.sums == {} and m.checks == []


def test_shipped_model_size():
    m = load_model(shipped_model_path(), k=1)
    assert len(m.algebra.families) == 3
    assert len(m.ops) >= 16
    assert {"Xp", "Xm", "L"} <= set(m.sums)


@pytest.mark.parametrize("k", [1, 2])
def test_shipped_model_matches_builtin(k):
    m = load_model(shipped_model_path(), k=k, order=8)
    assert catalog_differences(m.catalog(), make_catalog(k), 8) == []


def test_unclosed_brace_single_diagnostic():
    (d,) = diags_for("unclosed_brace.vop")
    assert (d.line, d.col) == (5, 12)
    assert "unclosed" in d.message and d.hint


def test_gram_division_by_zero():
    (d,) = diags_for("zero_division.vop")
    assert d.line == 3 and "division by zero at m=1" in d.message


def test_unknown_family():
    (d,) = diags_for("unknown_family.vop")
    assert "'b'" in d.message


def test_recovery_reports_several_errors():
    text = "vertexop A { shift = [1; }\nvertexop B { bogus = 2; }\nsum C { term = 1; }\n"
    diags = parse(text)
    assert isinstance(diags, list) and len(diags) >= 3
    assert sorted(d.line for d in diags) == sorted(set(d.line for d in diags))


def test_round_trip_is_fixed_point():
    text = Path(shipped_model_path()).read_text()
    prog = parse_or_raise(text)
    once = pretty(prog)
    again = parse_or_raise(once)
    assert again.canonical() == prog.canonical()
    assert pretty(again) == once


def test_diagnostic_spans_in_bounds():
    for name in ("unclosed_brace.vop", "zero_division.vop", "unknown_family.vop"):
        lines = (FIX / name).read_text().splitlines()
        for d in diags_for(name):
            assert 1 <= d.line <= len(lines)
            assert 1 <= d.col <= len(lines[d.line - 1]) + 1


def test_cli_contract(capsys):
    assert run_cli(["contract", "Splus", "Splus"]) == 0
    out = capsys.readouterr().out
    assert "(1 - w/z)" in out and "z^1" in out


def test_cli_unknown_operator_exits_2(capsys):
    assert run_cli(["contract", "Nope", "Splus"]) == 2


def test_cli_parse_error_exits_2(capsys):
    path = str(FIX / "unclosed_brace.vop")
    assert run_cli(["verify", "--suite", "correlations", "--model", path]) == 2
    assert f"{path}:5:12: error: unclosed" in capsys.readouterr().err


def test_cli_correlations_literal_failure(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run_cli(["verify", "--suite", "correlations", "--json", str(out)]) == 1
    report = json.loads(out.read_text())
    assert report["pass"] is False
    assert len(report["checks"]) == 14
    series = [c["witness"] for c in report["checks"] if "exponent_matches" in c["witness"]]
    assert len(series) == 8 and all(all(w["exponent_matches"]) for w in series)
    assert sum(not w["monomial_match"] for w in series) == 6


def test_cli_residue(capsys):
    assert run_cli(["residue", "PhiPlus", "PhiMinus", "--at", "q^(k+2)", "-k", "3"]) == 0
    assert "3 terms" in capsys.readouterr().out
    assert run_cli(["residue", "PhiPlus", "PhiMinus", "--at", "2*q"]) == 2


def test_cli_expand(capsys):
    assert run_cli(["expand", "(1 - q*x)/(1 - q^3*x)", "-N", "3"]) == 0
    out = capsys.readouterr().out
    assert "(-q + q^3)*x" in out and "product form" in out


def test_cli_modes(capsys):
    assert run_cli(["modes", "Yp", "--range", "1"]) == 0
    assert "Fock slice dimension" in capsys.readouterr().out
