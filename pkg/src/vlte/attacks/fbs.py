"""Credential-less fake base station that outshouts the serving cell."""

from __future__ import annotations

import copy
from statistics import mean
from typing import Optional

from ..trace import TraceSink
from ..world import WorldConfig
from .common import ROGUE_CELL_ID, SETTLE_MS, legit_cell, rogue_cell, trial_world
from .reports import AttachType, FbsMetrics, PostState


def run_fbs(cfg: WorldConfig, dl_gain_db: float, trials: int = 10, seed: int = 0, *,
            trace: Optional[TraceSink] = None, window_ms: int = 10_000, observe_ms: int = 30_000,
            rogue_tac: Optional[int] = None) -> FbsMetrics:
    """Power a rogue copy of the home network on at ``SETTLE_MS`` and watch the TCU.

    A trial succeeds when the TCU opens an RRC connection to the rogue cell
    within ``window_ms`` of activation.  Timing metrics are averaged over
    successful trials; the post state is judged after ``observe_ms`` more.
    """
    cfg = copy.deepcopy(cfg)
    legit = legit_cell(cfg)
    tac = rogue_tac if rogue_tac is not None else legit.tac + 1
    cfg.cells.append(rogue_cell(legit.plmn, tac, dl_gain_db, powered=False))

    tta, durations, reattached = [], [], []
    attach_types = set()
    successes = 0
    blocked = False
    rogue_refs, blocked_refs = [], []
    for i in range(trials):
        world = trial_world(cfg, seed, "fbs", i, trace)
        env, tcu = world.env, world.tcu
        env.clock.schedule_at(SETTLE_MS, lambda env=env: env.set_power(ROGUE_CELL_ID, True), "rogue:on")
        env.run_until(SETTLE_MS + window_ms + observe_ms)

        on_rogue = [e for e in tcu.events("rrc_established")
                    if e.detail.get("cell") == ROGUE_CELL_ID and e.t_ms <= SETTLE_MS + window_ms]
        if not on_rogue:
            continue
        successes += 1
        first = on_rogue[0]
        rogue_refs.append(world.trace.ref(first.seq))
        tta.append((first.t_ms - SETTLE_MS) / 1000.0)
        stalls = [e for e in tcu.events("attach_stalled")
                  if e.detail.get("cell") == ROGUE_CELL_ID and e.detail.get("conn_duration_ms") is not None]
        if stalls:
            durations.append(stalls[0].detail["conn_duration_ms"] / 1000.0)
        completed = any(e.detail.get("cell") == ROGUE_CELL_ID for e in tcu.events("attach_complete"))
        attach_types.add(AttachType.Full if completed else AttachType.Partial)
        reattached.append(any(e.detail.get("cell") == legit.cell_id and e.t_ms > first.t_ms
                              for e in tcu.events("attach_complete")))
        bad = [e for e in tcu.events("probe")
               if e.detail.get("cell") == ROGUE_CELL_ID and e.detail.get("result") != "Reachable"]
        if bad:
            blocked = True
            blocked_refs += [world.trace.ref(e.seq) for e in bad[:1] if e.seq >= 0]

    if not successes:
        attach_type, post_state = AttachType.NONE, None
    else:
        attach_type = AttachType.Full if AttachType.Full in attach_types else AttachType.Partial
        post_state = PostState.Reattach if all(reattached) else PostState.Camps
    report = FbsMetrics(
        policy=cfg.policy.name,
        dl_gain_db=float(dl_gain_db),
        attach_type=attach_type,
        time_to_attach_s=round(mean(tta), 3) if tta else None,
        conn_duration_s=round(mean(durations), 3) if durations else None,
        post_state=post_state,
        success_rate_pct=100.0 * successes / trials if trials else 0.0,
        trials=trials,
        successes=successes,
        backend_blocked=blocked,
    )
    report.add_evidence("rogue_attach", rogue_refs)
    report.add_evidence("backend_blocked", blocked_refs)
    return report
