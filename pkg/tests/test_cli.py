import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from kmc.cli import check_model, run
from kmc.scenario import expected_verdicts, scenario_text

FIXTURES = Path(__file__).parent / "fixtures"
PASS = str(FIXTURES / "counter_pass.kmc")
FAIL = str(FIXTURES / "counter_fail.kmc")
BROKEN = str(FIXTURES / "broken.kmc")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def scenario_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("scenario") / "usv_scenario.kmc"
    path.write_text(scenario_text(), encoding="utf-8")
    return str(path)


class TestExitCodes:
    def test_all_hold(self):
        code, out, _ = call("check", PASS)
        assert code == 0
        assert "3 hold, 0 fail" in out

    def test_some_fail(self):
        code, out, _ = call("check", FAIL)
        assert code == 1
        assert "never_two" in out and "FALSE" in out
        assert "unsupported fragment" in out

    def test_selected_formula_that_holds(self):
        code, _, _ = call("check", FAIL, "--formula", "bounded")
        assert code == 0

    def test_parse_error(self):
        code, out, err = call("check", BROKEN)
        assert code == 2 and out == ""
        assert "3:22" in err and "unknown identifier" in err

    def test_missing_file(self, tmp_path):
        code, _, err = call("check", str(tmp_path / "nope.kmc"))
        assert code == 2 and "cannot read" in err

    def test_unknown_formula(self):
        code, _, err = call("check", PASS, "--formula", "ghost")
        assert code == 2 and "ghost" in err

    def test_state_limit(self):
        code, _, err = call("check", PASS, "--limit", "3")
        assert code == 2 and "limit" in err

    def test_bad_usage(self):
        assert call("frobnicate")[0] == 2
        assert call()[0] == 2


class TestJson:
    def test_report_round_trips(self):
        code, out, _ = call("check", FAIL, "--json")
        doc = json.loads(out)
        report, g = check_model(FAIL)
        assert code == report.exit_status == 1
        assert doc["states"] == report.state_count == g.n_states
        assert doc["edges"] == report.edge_count
        assert isinstance(doc["build_ms"], int)
        for entry, outcome in zip(doc["formulas"], report.outcomes):
            assert entry["name"] == outcome.name
            assert entry["verdict"] == outcome.verdict
            assert entry["sat_count"] == outcome.sat_count
            if outcome.counterexample is None:
                assert entry["trace"] is None
            else:
                assert entry["trace"] == [g.state(i).as_dict() for i in outcome.counterexample.states]

    def test_trace_contents(self):
        doc = json.loads(call("check", FAIL, "--json", "--formula", "never_two")[1])
        (entry,) = doc["formulas"]
        assert [s["Counter.n"] for s in entry["trace"]] == [0, 1, 2]
        assert set(entry["trace"][0]) == {"Counter.n", "Toggle.t"}

    def test_single_document(self):
        out = call("check", PASS, "--json")[1]
        assert json.loads(out)["formulas"][0]["trace"] is None
        assert out.count("\n") == out.rstrip("\n").count("\n") + 1


class TestOtherCommands:
    def test_reach(self):
        code, out, _ = call("reach", PASS)
        assert code == 0 and out == "states: 8\nedges: 16\n"

    def test_reach_limit_from_environment(self, monkeypatch):
        monkeypatch.setenv("KMC_STATE_LIMIT", "5")
        code, _, err = call("reach", PASS)
        assert code == 2 and "5" in err
        monkeypatch.setenv("KMC_STATE_LIMIT", "lots")
        assert call("reach", PASS)[0] == 2
        assert call("reach", PASS, "--limit", "100")[0] == 0

    def test_explain_trace(self):
        code, out, _ = call("explain", FAIL, "--formula", "toggle_follows")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("toggle_follows fails")
        assert any("<- violation" in ln for ln in lines)
        assert any("<- witness successor" in ln for ln in lines)
        assert "   * Counter.n = 1" in lines

    def test_explain_holds(self):
        code, out, _ = call("explain", PASS, "--formula", "steps")
        assert code == 0 and "holds" in out

    def test_explain_unsupported(self):
        code, out, _ = call("explain", FAIL, "--formula", "loops")
        assert code == 0 and "unsupported fragment" in out

    def test_fmt_is_idempotent(self, tmp_path):
        code, once, _ = call("fmt", PASS)
        assert code == 0 and "//" not in once
        path = tmp_path / "once.kmc"
        path.write_text(once, encoding="utf-8")
        code, twice, _ = call("fmt", str(path))
        assert code == 0 and twice == once

    def test_fmt_error(self):
        assert call("fmt", BROKEN)[0] == 2

    def test_scenario(self):
        code, out, _ = call("scenario")
        assert code == 0 and out == scenario_text()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "kmc", "check", PASS, "--json"],
                          capture_output=True, text=True, env={**os.environ, "KMC_STATE_LIMIT": ""})
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["states"] == 8


@pytest.mark.slow
def test_scenario_check_and_explain(scenario_file):
    code, out, _ = call("check", scenario_file, "--json")
    assert code == 1
    doc = json.loads(out)
    assert {f["name"]: f["verdict"] for f in doc["formulas"]} == expected_verdicts()
    f4 = next(f for f in doc["formulas"] if f["name"] == "F4")
    *_, before, after = f4["trace"]
    assert before["Battery.level"] > 8 and after["USV.state"] == "PFH"
    code, text, _ = call("explain", scenario_file, "--formula", "F4")
    assert code == 0
    assert "<- witness successor" in text and "USV.state = PFH" in text
