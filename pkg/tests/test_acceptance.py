"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json

import pytest
from click.testing import CliRunner

from favsched.acceptance import CRITERIA, Settings, run_criterion, verify_all
from favsched.algorithms import ConfigError
from favsched.cli import main


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number, Settings())
    with capsys.disabled():
        print(f"\n{result.line()}")
        for failure in result.failures:
            print(f"       {failure}")
    assert result.passed, result.failures


def test_flipped_tie_break_breaks_greedy_tightness():
    summary = verify_all(tie_break="smallest", only=[1])
    assert not summary.passed
    assert any("ratio" in f for f in summary.results[0].failures)


def test_gamma_one_aborts_before_running():
    seen = []
    with pytest.raises(ConfigError):
        verify_all(gamma=1.0, on_result=seen.append)
    assert seen == []


def test_verify_command_exit_codes():
    runner = CliRunner()
    ok = runner.invoke(main, ["verify", "--only", "7", "--only", "9", "--format", "json"])
    assert ok.exit_code == 0, ok.output
    data = json.loads(ok.output)
    assert data["passed"] is True and [c["number"] for c in data["criteria"]] == [7, 9]
    mutated = runner.invoke(main, ["verify", "--only", "1", "--tie-break", "smallest"])
    assert mutated.exit_code == 1
    assert "FAIL [ 1]" in mutated.output
    bad = runner.invoke(main, ["verify", "--gamma", "1.0"])
    assert bad.exit_code == 2
    assert "gamma" in bad.output
