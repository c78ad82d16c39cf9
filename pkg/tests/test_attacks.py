import pytest

from vlte.attacks import (
    ChannelUnavailable,
    run_capability_probe,
    run_fallback_suite,
    run_fbs,
    run_fingerprint_cases,
    run_handover_hijack,
    run_imsi_catcher,
    run_message_injection,
    run_plmn_fingerprint,
)
from vlte.attacks.reports import (
    AttachType,
    Channel,
    FaultClass,
    FbsMetrics,
    ImsiCatchReport,
    Outcome,
    PostState,
    SimType,
    report_from_dict,
)
from vlte.codec import EmmCause
from vlte.epc import CoreFault, FaultKind
from vlte.tcu import TcuPolicy
from vlte.trace import TraceSink
from vlte.world import testbed as make_testbed

MARKETS = ("310260", "310150")
OBSERVED = TcuPolicy.observed(roaming_markets=MARKETS)
MITIGATED = TcuPolicy.mitigated(roaming_markets=MARKETS)


def _by_ctx(trace, prefix):
    out = {}
    for rec in trace.records:
        if rec["ctx"].startswith(prefix):
            out.setdefault(rec["ctx"], []).append({k: v for k, v in rec.items() if k != "seq"})
    return out


def test_trial_outcome_depends_only_on_seed_and_index():
    short, long = TraceSink("a"), TraceSink("b")
    run_fbs(make_testbed(policy=OBSERVED), -15, 4, seed=11, trace=short)
    run_fbs(make_testbed(policy=OBSERVED), -15, 8, seed=11, trace=long)
    a, b = _by_ctx(short, "fbs["), _by_ctx(long, "fbs[")
    assert set(a) == {f"fbs[{i}]" for i in range(4)}
    for ctx, records in a.items():
        assert b[ctx] == records


def test_aggregate_is_order_free():
    cfg = make_testbed(policy=OBSERVED)
    whole = run_fbs(cfg, -15, 12, seed=5)
    trace = TraceSink("t")
    run_fbs(cfg, -15, 12, seed=5, trace=trace)
    per_trial = _by_ctx(trace, "fbs[")
    hits = sum(any(r["ev"] == "rrc_established" and r.get("cell") == 99 for r in recs)
               for recs in per_trial.values())
    assert whole.successes == hits


def test_imsi_catcher_matching_plmn_leaks_both_identities():
    report = run_imsi_catcher(make_testbed(policy=OBSERVED), "310260", 5, seed=1, trace=TraceSink("imsi"))
    assert report.leaked == {"IMSI", "GUTI"} and report.attack_success
    assert report.sim_type == SimType.pSIM
    assert report.successes == 5
    assert report.evidence["leak"]


@pytest.mark.parametrize("attacker", ["00101", "99970"])
def test_imsi_catcher_foreign_plmn_is_ignored(attacker):
    report = run_imsi_catcher(make_testbed(policy=OBSERVED), attacker, 5, seed=1)
    assert report.leaked == set() and not report.attack_success


def test_fbs_metrics_at_zero_gain():
    report = run_fbs(make_testbed(policy=OBSERVED), 0, 3, seed=2)
    assert report.attach_type == AttachType.Partial
    assert report.post_state == PostState.Camps
    assert report.time_to_attach_s == pytest.approx(2.0, abs=0.1)
    assert report.conn_duration_s == pytest.approx(4.0, abs=0.1)
    assert report.backend_blocked


@pytest.mark.parametrize("attack", ["imsi", "fbs"])
def test_mitigation_dominance(attack):
    if attack == "imsi":
        obs = run_imsi_catcher(make_testbed(policy=OBSERVED), "310260", 5, seed=3)
        mit = run_imsi_catcher(make_testbed(policy=MITIGATED), "310260", 5, seed=3)
        assert len(mit.leaked) <= len(obs.leaked) and mit.successes <= obs.successes
        assert mit.successes == 0
    else:
        obs = run_fbs(make_testbed(policy=OBSERVED), -5, 5, seed=3)
        mit = run_fbs(make_testbed(policy=MITIGATED), -5, 5, seed=3)
        assert mit.successes <= obs.successes
        assert mit.successes == 0 and mit.attach_type == AttachType.NONE


@pytest.mark.parametrize("policy", [OBSERVED, MITIGATED], ids=["observed", "mitigated"])
@pytest.mark.parametrize("match_tac", [True, False])
def test_handover_requires_matching_tac(policy, match_tac):
    report = run_handover_hijack(make_testbed(policy=policy), seed=1, match_tac=match_tac)
    assert report.handover_triggered is match_tac
    if match_tac:
        assert report.context_preserved and not report.reauth_performed
        assert report.final_state == "Camped"


def test_fallback_rows_are_consistent_and_match_expectations():
    rows = {r.fault_class: r for r in run_fallback_suite(make_testbed(policy=OBSERVED), seed=4)}
    assert all(r.consistent for r in rows.values())
    assert rows[FaultClass.Control].matrix() == (False, None, None, False, True, True)
    assert rows[FaultClass.PDN].matrix() == (True, False, None, False, True, True)
    assert rows[FaultClass.Routing].matrix() == (True, True, False, False, False, True)


def test_fallback_classes_filter_accepts_names():
    rows = run_fallback_suite(make_testbed(policy=OBSERVED), seed=4, classes=["PDN"])
    assert [r.fault_class for r in rows] == [FaultClass.PDN]


def test_hardened_fallback_always_triggers():
    for row in run_fallback_suite(make_testbed(policy=MITIGATED), seed=4):
        assert row.fallback_triggered and not row.loop_trapped


def test_fingerprint_outcomes():
    results = {r.plmn: r.outcome for r in run_plmn_fingerprint(["310260", "00101"], MARKETS, seed=0)}
    assert results == {"310260": Outcome.FullConnectivity, "00101": Outcome.PdnNoRoaming}
    cases = {r.case: r.outcome for r in run_fingerprint_cases("310260", MARKETS, seed=0)}
    assert cases == {"corrupt_sim": Outcome.SimInvalid, "attach_fault": Outcome.RejectedAtAttach,
                     "pdn_fault": Outcome.AttachWithoutPdn}


@pytest.mark.parametrize("channel", list(Channel))
def test_injection_observed_is_silent(channel):
    report = run_message_injection(make_testbed(policy=OBSERVED), channel, seed=0)
    assert report.protocol_ack and report.internal_processing_event and not report.user_surface_event


def test_injection_needs_an_attached_tcu():
    cfg = make_testbed(policy=OBSERVED, faults=[CoreFault(FaultKind.NasReject, EmmCause.PlmnNotAllowed)])
    with pytest.raises(ChannelUnavailable):
        run_message_injection(cfg, Channel.SmsIms, seed=0)


def test_capability_probe():
    obs = run_capability_probe(make_testbed(policy=OBSERVED), seed=0, eia0_trials=20)
    mit = run_capability_probe(make_testbed(policy=MITIGATED), seed=0, eia0_trials=20)
    assert obs.eia0_rejects == obs.eia0_trials == 20 == mit.eia0_rejects
    assert obs.eea0_accepted and not mit.eea0_accepted
    assert obs.findings["advertises_legacy_gsm"] and not mit.findings["advertises_legacy_gsm"]


def test_report_dict_roundtrip():
    report = run_imsi_catcher(make_testbed(policy=OBSERVED), "310260", 2, seed=1)
    again = report_from_dict(report.to_dict())
    assert isinstance(again, ImsiCatchReport)
    assert again.to_dict() == report.to_dict()


def test_report_invariants_are_checked():
    with pytest.raises(ValueError):
        ImsiCatchReport(policy="observed", attacker_plmn="1", sim_plmn="1", sim_type=SimType.pSIM,
                        leaked={"IMEI"}, attack_success=True)
    with pytest.raises(ValueError):
        FbsMetrics(policy="observed", dl_gain_db=0, attach_type=AttachType.Partial, success_rate_pct=120.0,
                   trials=10, successes=5)
