"""Identity harvesting with a rogue cell that advertises a chosen PLMN."""

from __future__ import annotations

import copy
from typing import Optional

from ..codec import PlmnId
from ..trace import TraceSink
from ..world import WorldConfig
from .common import ROGUE_CELL_ID, SETTLE_MS, rogue_cell, trial_world
from .reports import ImsiCatchReport


def run_imsi_catcher(cfg: WorldConfig, attacker_plmn, trials: int = 10, seed: int = 0, *,
                     trace: Optional[TraceSink] = None, timeout_ms: int = 10_000,
                     rogue_gain_db: float = 0.0, rogue_tac: int = 77) -> ImsiCatchReport:
    """Raise a rogue cell once the TCU is attached and record what identities it gives up.

    Each trial builds a fresh world (hard power cycle), lets the TCU attach to
    the legitimate cell, powers the rogue cell on at ``SETTLE_MS`` and runs
    for ``timeout_ms`` more.
    """
    attacker = PlmnId.parse(str(attacker_plmn))
    cfg = copy.deepcopy(cfg)
    cfg.cells.append(rogue_cell(attacker, rogue_tac, rogue_gain_db, powered=False))
    sim = cfg.sims[0]
    leaked: set[str] = set()
    successes = 0
    evidence: list[str] = []
    for i in range(trials):
        world = trial_world(cfg, seed, "imsi", i, trace)
        env = world.env
        env.clock.schedule_at(SETTLE_MS, lambda env=env: env.set_power(ROGUE_CELL_ID, True), "rogue:on")
        world.env.run_until(SETTLE_MS + timeout_ms)
        node = world.nodes[ROGUE_CELL_ID]
        got = node.leaked_types() & {"IMSI", "GUTI", "IMEI"}
        leaked |= got
        if got & {"IMSI", "GUTI"}:
            successes += 1
            evidence += [world.trace.ref(c["seq"]) for c in node.captured if c["seq"] >= 0]
    report = ImsiCatchReport(
        policy=cfg.policy.name,
        attacker_plmn=str(attacker),
        sim_plmn=str(sim.home_plmn),
        sim_type=sim.kind.value,
        leaked=frozenset(leaked),
        attack_success=bool(leaked & {"IMSI", "GUTI"}),
        trials=trials,
        successes=successes,
    )
    report.add_evidence("leak", evidence)
    return report
