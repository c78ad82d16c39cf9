"""Connected-mode handover onto a rogue cell that mimics the serving cell."""

from __future__ import annotations

import copy
from typing import Optional

from ..trace import TraceSink
from ..world import WorldConfig
from .common import ROGUE_CELL_ID, SETTLE_MS, legit_cell, rogue_cell, trial_world
from .reports import HandoverReport


def run_handover_hijack(cfg: WorldConfig, seed: int = 0, *, trace: Optional[TraceSink] = None,
                        start_gain_db: float = -25.0, step_db: float = 5.0, step_ms: int = 2000,
                        max_gain_db: float = 0.0, match_tac: bool = True) -> HandoverReport:
    """Sweep a mimic cell's gain upward past the serving cell and report what the TCU carried over.

    With ``match_tac=False`` the rogue advertises a different tracking area,
    so it is only a reselection candidate and no handover is expected.
    """
    cfg = copy.deepcopy(cfg)
    legit = legit_cell(cfg)
    tac = legit.tac if match_tac else legit.tac + 1
    cfg.cells.append(rogue_cell(legit.plmn, tac, start_gain_db, acquire_prob=1.0))
    world = trial_world(cfg, seed, "handover", 0, trace)
    env, tcu = world.env, world.tcu

    t, gain = SETTLE_MS, start_gain_db
    while gain <= max_gain_db:
        env.clock.schedule_at(t, lambda g=gain: env.set_cell_gain(ROGUE_CELL_ID, g), "rogue:gain")
        t += step_ms
        gain += step_db
    env.run_until(t + 5 * tcu.timing.rlf_ms)

    report = HandoverReport(policy=cfg.policy.name, rogue_tac_matches=match_tac)
    hos = [e for e in tcu.events("handover") if e.detail.get("target") == ROGUE_CELL_ID]
    node = world.nodes[ROGUE_CELL_ID]
    report.rogue_attach = bool(node.rrc_connections)
    report.add_evidence("rogue_attach", [world.trace.ref(c["seq"]) for c in node.rrc_connections if c["seq"] >= 0])
    if not hos:
        report.final_state = tcu.emm_state.value
        return report
    ho = hos[0]
    outcome = tcu.handover_outcome
    report.handover_triggered = True
    report.context_preserved = bool(ho.detail.get("context_preserved"))
    # any authentication between the handover and its conclusion counts as re-authentication
    after = tcu.event_log[tcu.event_log.index(ho):]
    end = next((e for e in after if e.kind in ("handover_complete", "reestablishment_rejected")), None)
    window = after[:after.index(end)] if end is not None else after
    report.reauth_performed = any(e.kind == "auth_ok" for e in window)
    report.final_state = end.state_after if end else tcu.emm_state.value
    report.add_evidence("handover", [world.trace.ref(ho.seq)] if ho.seq >= 0 else [])
    if outcome is not None and outcome.status == "terminated":
        report.add_evidence("rogue_camp", [world.trace.ref(end.seq)] if end and end.seq >= 0 else [])
    return report
