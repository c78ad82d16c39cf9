"""Whitelisting and roaming policy fingerprinting by PLMN sweep."""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

from ..epc import CoreFault, FaultKind
from ..trace import TraceSink
from ..world import World, WorldConfig, testbed
from .common import trial_world
from .reports import Outcome, PlmnClassification


def classify(world: World) -> tuple[Outcome, list[int]]:
    """Walk the connection stages in order and stop at the first one that failed."""
    tcu = world.tcu
    power = tcu.events("hard_power_cycle")
    if not power or not power[-1].detail.get("valid_sim"):
        return Outcome.SimInvalid, [e.seq for e in power[-1:]]
    accepts = tcu.events("attach_accept")
    if not accepts:
        rejects = tcu.events("attach_reject") or tcu.events("attach_failed")
        return Outcome.RejectedAtAttach, [e.seq for e in rejects[:1]]
    completes = tcu.events("attach_complete")
    if not completes:
        return Outcome.AttachWithoutPdn, [e.seq for e in tcu.events("pdn_rejected")[:1]]
    snap = tcu.stage_snapshot()
    reachable = [e for e in tcu.events("probe") if e.detail.get("result") == "Reachable"]
    if snap.roaming_approved and snap.cell_link_state == "Online" and reachable:
        return Outcome.FullConnectivity, [reachable[0].seq]
    return Outcome.PdnNoRoaming, [completes[-1].seq]


def _with_markets(policy, roaming_markets):
    return None if policy is None else dataclasses.replace(policy, roaming_markets=tuple(roaming_markets))


def default_factory(plmn: str, roaming_markets, policy=None, **kw) -> WorldConfig:
    return testbed(plmn, roaming_markets=tuple(roaming_markets), policy=_with_markets(policy, roaming_markets), **kw)


def run_plmn_fingerprint(candidate_plmns, roaming_markets, seed: int = 0, *,
                         tcu_factory: Optional[Callable[..., WorldConfig]] = None,
                         policy=None, trace: Optional[TraceSink] = None,
                         observe_ms: int = 30_000) -> list[PlmnClassification]:
    """For each PLMN: bring up a matching network and SIM, power-cycle, classify the result."""
    factory = tcu_factory or default_factory
    out = []
    for i, plmn in enumerate(candidate_plmns):
        cfg = factory(str(plmn), roaming_markets, policy=policy)
        out.append(_run_case(cfg, str(plmn), "sweep", seed, i, trace, observe_ms))
    return out


def run_fingerprint_cases(plmn: str, roaming_markets, seed: int = 0, *, policy=None,
                          trace: Optional[TraceSink] = None, observe_ms: int = 30_000) -> list[PlmnClassification]:
    """Deliberately broken setups that exercise the remaining classification branches."""
    cases = {
        "corrupt_sim": default_factory(plmn, roaming_markets, policy, corrupt_sim=True),
        "attach_fault": default_factory(plmn, roaming_markets, policy,
                                        faults=[CoreFault(FaultKind.NasReject, "PlmnNotAllowed")]),
        "pdn_fault": default_factory(plmn, roaming_markets, policy,
                                     faults=[CoreFault(FaultKind.PdnReject, "UnknownPdnType")]),
    }
    return [_run_case(cfg, plmn, name, seed, i, trace, observe_ms) for i, (name, cfg) in enumerate(cases.items())]


def _run_case(cfg: WorldConfig, plmn: str, case: str, seed: int, index: int,
              trace: Optional[TraceSink], observe_ms: int) -> PlmnClassification:
    world = trial_world(cfg, seed, f"fingerprint:{case}", index, trace)
    world.run_for(observe_ms)
    outcome, seqs = classify(world)
    result = PlmnClassification(policy=cfg.policy.name, plmn=plmn, outcome=outcome, case=case)
    result.add_evidence("classification", [world.trace.ref(s) for s in seqs if s >= 0])
    world.trace.emit(world.env.now_ms, "harness", "plmn_classified", plmn=plmn, case=case,
                     log=result.log_line)
    return result
