import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_scenarios, bundled_run
from vlte.attacks.common import ROGUE_CELL_ID, rogue_cell
from vlte.codec import (
    AuthParams,
    EeaAlg,
    EiaAlg,
    EmmCause,
    EsmCause,
    IdentityType,
    NasKind,
    NasMessage,
    PlmnId,
    SecuritySelection,
)
from vlte.epc import CoreFault, FaultKind
from vlte.radio_env import CellConfig, RadioEnvironment
from vlte.tcu import EmmState, TcuMachine, TcuPolicy
from vlte.world import build_world, provision
from vlte.world import testbed as make_testbed

POLICIES = {"observed": TcuPolicy.observed(roaming_markets=("310260", "310150")),
            "mitigated": TcuPolicy.mitigated(roaming_markets=("310260", "310150"))}
KNOWN_IMSIS = {provision(p)[1].imsi for p in ("310260", "310150", "00101", "00110", "99970")}


def _bare_tcu(policy, cells=(), selectors=("310150", "00101")):
    env = RadioEnvironment()
    for cid, plmn, gain in cells:
        env.add_cell(CellConfig(cid, PlmnId.parse(plmn), 1, dl_gain_db=gain))
    _, sim = provision("310260", selectors=selectors)
    return env, TcuMachine(env, [sim], policy)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(list(POLICIES)),
       st.lists(st.tuples(st.sampled_from(["310260", "310150", "00101", "99970"]),
                          st.integers(-15, 5)), min_size=1, max_size=6))
def test_select_cell_is_argmax_over_eligible(policy_name, specs):
    policy = POLICIES[policy_name]
    cells = [(i + 1, plmn, float(g)) for i, (plmn, g) in enumerate(specs)]
    env, tcu = _bare_tcu(policy, cells)
    # a bare environment has no SIB1 senders, so the signature check is tested elsewhere
    tcu.policy = TcuPolicy.named(policy_name, roaming_markets=policy.roaming_markets, verify_sib1=False)
    allowed = {"310260", "310150", "00101"}
    if policy_name == "mitigated":
        allowed &= {"310260", "310150"}
    eligible = [(g, -cid, cid) for cid, plmn, g in cells if plmn in allowed]
    expected = max(eligible)[2] if eligible else None
    assert tcu.select_cell(env.scan()) == expected


@pytest.mark.parametrize("policy_name", list(POLICIES))
@pytest.mark.parametrize("authenticated", [False, True])
@pytest.mark.parametrize("cipher", list(EeaAlg))
def test_eia0_is_always_rejected(policy_name, authenticated, cipher):
    _, tcu = _bare_tcu(POLICIES[policy_name])
    if authenticated:
        tcu._pending_auth = bytes(32)
    out = tcu.handle_downlink(NasMessage(NasKind.SecurityModeCommand,
                                         security_selection=SecuritySelection(cipher, EiaAlg.EIA0)))
    assert out == [NasMessage(NasKind.SecurityModeReject)]


@pytest.mark.parametrize("policy_name", list(POLICIES))
@pytest.mark.parametrize("wanted", list(IdentityType))
def test_identity_response_never_carries_imei(policy_name, wanted):
    _, tcu = _bare_tcu(POLICIES[policy_name])
    for out in tcu.handle_downlink(NasMessage(NasKind.IdentityRequest, identity_type=wanted)):
        assert out.identity_type != IdentityType.IMEI
        assert out.identity_value != tcu.imei


def test_pre_auth_identity_disclosure_depends_on_policy():
    _, observed = _bare_tcu(POLICIES["observed"])
    _, mitigated = _bare_tcu(POLICIES["mitigated"])
    req = NasMessage(NasKind.IdentityRequest, identity_type=IdentityType.IMSI)
    assert observed.handle_downlink(req)[0].identity_value == observed.imsi
    assert mitigated.handle_downlink(req) == []


def _uplinks(result):
    return [r for r in result.trace.records if r["src"] == "ul"]


@pytest.mark.parametrize("name", all_scenarios())
def test_no_imei_in_any_identity_response(name):
    imei = bundled_run(name).scenario.world.imei
    for rec in _uplinks(bundled_run(name)):
        if rec["ev"] == "IdentityResponse":
            assert rec["msg"]["identity_type"] != "IMEI"
            assert rec["msg"]["identity_value"] != imei


@pytest.mark.parametrize("name", [n for n in all_scenarios() if n.endswith(".mitigated")])
def test_hardened_identity_gate(name):
    """No uplink names the IMSI before the security context exists in its trial."""
    secured = set()
    for rec in _uplinks(bundled_run(name)):
        if rec["ev"] == "SecurityModeComplete":
            secured.add(rec["ctx"])
            continue
        if rec["ctx"] in secured:
            continue
        text = json.dumps(rec["msg"])
        assert rec["msg"].get("identity_type") != "IMSI", rec
        assert not any(imsi in text for imsi in KNOWN_IMSIS), rec


FAULTS = st.sampled_from([
    CoreFault(FaultKind.NasReject, EmmCause.PlmnNotAllowed),
    CoreFault(FaultKind.NasReject, EmmCause.EpsServicesNotAllowed),
    CoreFault(FaultKind.PdnReject, EsmCause.UnknownPdnType),
    CoreFault(FaultKind.PdnReject, EsmCause.PdnTypeIpv4OnlyAllowed),
    CoreFault(FaultKind.RoutingBlackhole),
])
SCHEDULE = st.lists(st.tuples(st.integers(0, 60_000), st.sampled_from(["inject", "clear"]), FAULTS),
                    max_size=4)


def _run_schedule(policy, schedule, seed, horizon=90_000, step=250):
    world = build_world(make_testbed(policy=policy), seed)
    core = next(iter(world.cores.values()))
    for t, op, fault in sorted(schedule, key=lambda x: x[0]):
        fn = (lambda f=fault: core.inject_fault(f)) if op == "inject" else \
             (lambda f=fault: core.clear_fault(f.kind))
        world.env.clock.schedule_at(t, fn)
    for t in range(0, horizon + 1, step):
        world.env.run_until(t)
        snap = world.tcu.stage_snapshot()
        assert not snap.data_registration or snap.network_registration
    return world


@settings(max_examples=12, deadline=None)
@given(SCHEDULE, st.integers(0, 1000))
def test_observed_never_consults_fallback(schedule, seed):
    world = _run_schedule(POLICIES["observed"], schedule, seed)
    assert world.tcu.consulted_fallbacks == []


@settings(max_examples=8, deadline=None)
@given(SCHEDULE, st.integers(0, 1000))
def test_stage_monotonicity_hardened(schedule, seed):
    _run_schedule(POLICIES["mitigated"], schedule, seed)


def _fbs_world(policy, seed=1):
    cfg = make_testbed(policy=policy)
    cfg.cells.append(rogue_cell("310260", 2, 0.0, powered=False, acquire_prob=1.0))
    world = build_world(cfg, seed)
    world.env.clock.schedule_at(10_000, lambda: world.env.set_power(ROGUE_CELL_ID, True))
    return world


def test_camp_trap_under_observed_policy():
    world = _fbs_world(POLICIES["observed"])
    world.env.run_until(180_000)
    tcu = world.tcu
    first = next(e for e in tcu.events("rrc_established") if e.detail["cell"] == ROGUE_CELL_ID)
    later = [e for e in tcu.events("attach_start") if e.t_ms > first.t_ms and e.detail["cell"] != ROGUE_CELL_ID]
    assert later == []
    assert tcu.emm_state == EmmState.Camped
    assert tcu.events("attach_stalled")


def test_trap_releases_on_rogue_removal():
    world = _fbs_world(POLICIES["observed"])
    world.env.run_until(40_000)
    world.env.set_power(ROGUE_CELL_ID, False)
    world.env.run_until(80_000)
    assert world.tcu.emm_state == EmmState.Attached and world.tcu.serving_cell == 1


def test_trap_persists_through_power_cycle_while_rogue_is_louder():
    world = _fbs_world(POLICIES["observed"])
    world.env.run_until(40_000)
    world.tcu.power_cycle()
    world.env.run_until(80_000)
    assert world.tcu.serving_cell == ROGUE_CELL_ID
    assert world.tcu.events("hard_power_cycle")[-1].t_ms == 40_000


def test_hardened_rejects_unsigned_rogue():
    world = _fbs_world(POLICIES["mitigated"])
    world.env.run_until(60_000)
    assert not [e for e in world.tcu.events("attach_start") if e.detail["cell"] == ROGUE_CELL_ID]
    assert world.tcu.serving_cell == 1


def test_corrupt_sim_never_searches():
    world = build_world(make_testbed(corrupt_sim=True), 0)
    world.env.run_until(20_000)
    assert world.tcu.events("hard_power_cycle")[-1].detail["valid_sim"] is False
    assert world.tcu.events("attach_start") == []
    assert not world.tcu.stage_snapshot().valid_sim


def test_hardened_backoff_grows():
    cfg = make_testbed(policy=POLICIES["mitigated"], faults=[CoreFault(FaultKind.NasReject, EmmCause.PlmnNotAllowed)])
    world = build_world(cfg, 4)
    world.env.run_until(60_000)
    cooldown = world.tcu.events("cooldown")[0].t_ms
    # the retry counter restarts after a cooldown, so only the first cycle is compared
    delays = [e.detail["next_attempt_in_ms"] for e in world.tcu.events("attach_failed")
              if "next_attempt_in_ms" in e.detail and e.t_ms < cooldown]
    assert len(delays) == 4
    assert all(b > a for a, b in zip(delays, delays[1:]))


def test_authentication_failure_on_bad_autn():
    _, tcu = _bare_tcu(POLICIES["observed"])
    out = tcu.handle_downlink(NasMessage(NasKind.AuthenticationRequest,
                                         auth_params=AuthParams(rand=bytes(16), autn=bytes(16))))
    assert out[0].auth_params.res == b""
    assert tcu.events("auth_failure")
