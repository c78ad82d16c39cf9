import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import BASE_NAMES, all_scenarios, bundled_run, scenario_path
from vlte.harness import (
    NonMonotoneScript,
    ParseError,
    UnresolvedReference,
    compliance_map,
    load_scenario,
    parse_scenario,
    render_tables,
    run,
)
from vlte.harness.cli import main
from vlte.harness.compliance import Vulnerability
from vlte.harness.render import TABLE1_HEADER, TABLE2_ROWS, TABLE3_OUTCOMES, TABLE3_STAGES
from vlte.harness.runner import SEED_ENV

GOLDEN = Path(__file__).parent / "golden"


def _doc(**overrides):
    doc = {
        "name": "mini",
        "seed": 3,
        "cores": [{"name": "c", "plmn": "310260"}],
        "cells": [{"cell_id": 1, "plmn": "310260", "tac": 1, "dl_gain_db": -18.0, "core_link": "c"}],
        "sims": [{"provision": {"plmn": "310260", "core": "c"}}],
        "script": [],
    }
    doc.update(overrides)
    return doc


def test_minimal_scenario_runs_and_attaches():
    doc = _doc(script=[{"t_ms": 15000, "action": "set_gain", "cell": 1, "gain_db": -10}])
    result = run(parse_scenario(doc))
    events = [r["ev"] for r in result.trace.records]
    assert events[0] == "scenario_start" and events[-1] == "scenario_end"
    assert "attach_complete" in events


@pytest.mark.parametrize("doc,field", [
    (_doc(extra=1), "extra"),
    (_doc(seed=-1), "seed"),
    (_doc(cells=[{"cell_id": 1, "plmn": "310260"}]), "cells[0]"),
    (_doc(cores=[{"name": "c", "plmn": "31x260"}]), "cores[0].plmn"),
    (_doc(script=[{"t_ms": 0, "action": "explode"}]), "script[0].action"),
    (_doc(script=[{"t_ms": 0, "action": "run_attack", "kind": "nope"}]), "script[0].kind"),
    (_doc(tcu_policy={"profile": "observed", "bogus": 1}), "tcu_policy"),
])
def test_parse_errors_name_the_field(doc, field):
    with pytest.raises(ParseError) as info:
        parse_scenario(doc)
    assert info.value.field == field


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "bad.scn"
    path.write_text('{\n  "name": "x",\n  "seed": 1,\n  oops\n}\n')
    with pytest.raises(ParseError) as info:
        load_scenario(path)
    assert info.value.line == 4


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "absent.scn")


@pytest.mark.parametrize("doc", [
    _doc(cells=[{"cell_id": 1, "plmn": "310260", "tac": 1, "core_link": "ghost"}]),
    _doc(sims=[{"provision": {"plmn": "310260", "core": "ghost"}}]),
    _doc(script=[{"t_ms": 0, "action": "set_gain", "cell": 5, "gain_db": 0}]),
    _doc(script=[{"t_ms": 0, "action": "inject_fault", "core": "ghost", "kind": "RoutingBlackhole"}]),
    _doc(faults=[{"core": "ghost", "kind": "RoutingBlackhole"}]),
])
def test_unresolved_references(doc):
    with pytest.raises(UnresolvedReference):
        parse_scenario(doc)


def test_script_time_must_not_go_back():
    doc = _doc(script=[{"t_ms": 500, "action": "set_gain", "cell": 1, "gain_db": 0},
                       {"t_ms": 100, "action": "set_gain", "cell": 1, "gain_db": -5}])
    with pytest.raises(NonMonotoneScript):
        parse_scenario(doc)


def test_seed_precedence(monkeypatch):
    scenario = parse_scenario(_doc())
    assert run(scenario).scenario.seed == 3
    monkeypatch.setenv(SEED_ENV, "17")
    assert run(scenario).scenario.seed == 17
    assert run(scenario, seed=99).scenario.seed == 99


@pytest.mark.parametrize("name", all_scenarios())
def test_bundled_scenarios_are_reproducible(name):
    first = bundled_run(name)
    again = run(load_scenario(scenario_path(name)))
    assert again.trace.dumps() == first.trace.dumps()
    assert json.dumps(again.report_document(), sort_keys=True) == json.dumps(first.report_document(), sort_keys=True)


def test_different_seed_changes_statistical_outcomes():
    a = run(load_scenario(scenario_path("table2_fbs")), seed=1).trace.digest()
    b = run(load_scenario(scenario_path("table2_fbs")), seed=2).trace.digest()
    assert a != b


def _reports(policy_suffix=""):
    return [r for base in BASE_NAMES for r in bundled_run(base + policy_suffix).reports]


def test_tables_have_the_expected_labels():
    text = render_tables(_reports())
    for label in TABLE1_HEADER + TABLE2_ROWS + TABLE3_STAGES + TABLE3_OUTCOMES:
        assert label in text
    assert render_tables(_reports()) == text


@pytest.mark.parametrize("suffix,golden", [("", "tables_observed.txt"), (".mitigated", "tables_mitigated.txt")])
def test_tables_match_golden(suffix, golden):
    assert render_tables(_reports(suffix)) == (GOLDEN / golden).read_text(encoding="utf-8")


def test_render_accepts_serialized_reports():
    reports = _reports()
    assert render_tables([r.to_dict() for r in reports]) == render_tables(reports)
    assert render_tables([]) == "No reports.\n"


def test_compliance_observed_rows():
    findings = compliance_map(_reports())
    triggered = {f.vulnerability.value for f in findings if f.triggered}
    assert triggered == set(range(1, 9))
    for f in findings:
        assert f.triggered == bool(f.evidence)
        assert f.regulation_refs


def test_compliance_evidence_points_into_traces():
    traces = {bundled_run(b).scenario.name: bundled_run(b).trace for b in BASE_NAMES}
    for finding in compliance_map(_reports()):
        for ref in finding.evidence:
            trace_id, seq = ref.rsplit("#", 1)
            assert 0 <= int(seq) < len(traces[trace_id].records)


def test_compliance_mitigated_is_clean():
    assert not any(f.triggered for f in compliance_map(_reports(".mitigated")))


def test_supplier_row_is_never_triggered_by_simulation():
    f = next(f for f in compliance_map(_reports()) if f.vulnerability == Vulnerability.SupplierStack)
    assert not f.triggered


# --- command line ------------------------------------------------------------


def test_cli_usage_error_exits_2(capsys):
    assert main([]) == 2
    assert main(["simulate"]) == 2


def test_cli_missing_scenario_exits_1(tmp_path, capsys):
    assert main(["simulate", "--scenario", str(tmp_path / "missing.scn")]) == 1
    assert "ParseError" in capsys.readouterr().err


def test_cli_simulate_tables_and_compliance(tmp_path, capsys):
    out = tmp_path / "reports"
    paths = [str(scenario_path(n)) for n in ("table1_imsi", "messages")]
    assert main(["simulate", "--scenario", *paths, "--report", str(out), "--trace", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["messages.json", "messages.trace.jsonl",
                                                      "table1_imsi.json", "table1_imsi.trace.jsonl"]
    capsys.readouterr()
    assert main(["tables", "--from", str(out)]) == 0
    assert "IMSI catching outcomes with different PLMNs." in capsys.readouterr().out
    assert main(["compliance", "--from", str(out), "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {r["row"] for r in rows if r["triggered"]} == {1, 5, 6}


def test_cli_codec_roundtrip(tmp_path, capsys):
    msg = tmp_path / "m.json"
    msg.write_text('{"layer": "NAS", "kind": "IdentityRequest", "identity_type": "IMSI"}')
    assert main(["codec", "encode", str(msg)]) == 0
    assert capsys.readouterr().out.strip() == "01010100"
    assert main(["codec", "decode", "01010100"]) == 0
    assert json.loads(capsys.readouterr().out)["identity_type"] == "IMSI"
    assert main(["codec", "decode", "zz"]) == 1
    assert main(["codec", "decode", "03"]) == 1


def test_cli_fingerprint(tmp_path, capsys):
    plmns, markets = tmp_path / "plmns.txt", tmp_path / "markets.txt"
    plmns.write_text("310260\n00101\n")
    markets.write_text("310260, 310150\n")
    assert main(["fingerprint", "--plmns", str(plmns), "--markets", str(markets)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and "Full Connectivity" in lines[0] and "PDN, No Roaming" in lines[1]


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ, **{SEED_ENV: "5"})
    proc = subprocess.run([sys.executable, "-m", "vlte.harness.cli", "simulate", "--scenario",
                           str(scenario_path("capabilities"))], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("capabilities: 1 report(s)")
