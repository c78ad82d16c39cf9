"""Core-side fault injection and the TCU's recovery behaviour per fault class."""

from __future__ import annotations

import copy
from typing import Optional

from ..codec import EmmCause, EsmCause
from ..epc import CoreFault, FaultKind
from ..trace import TraceSink
from ..world import WorldConfig
from .common import trial_world
from .reports import FailureBehaviorRow, FaultClass

FAULT_CLASSES = {
    FaultClass.Control: [CoreFault(FaultKind.NasReject, c) for c in EmmCause],
    FaultClass.PDN: [CoreFault(FaultKind.PdnReject, c) for c in EsmCause],
    FaultClass.Routing: [CoreFault(FaultKind.RoutingBlackhole)],
}


def observe_fault(cfg: WorldConfig, fault: CoreFault, fault_class: FaultClass, seed: int, *,
                  trace: Optional[TraceSink] = None, horizon_ms: int = 120_000,
                  index: int = 0) -> FailureBehaviorRow:
    """One run with ``fault`` active from power-on, classified into a table row."""
    cfg = copy.deepcopy(cfg)
    cfg.cores[0].faults = [fault]
    world = trial_world(cfg, seed, "fallback", index, trace)
    world.run_for(horizon_ms)
    tcu = world.tcu

    stage1 = bool(tcu.events("attach_accept"))
    stage2 = bool(tcu.events("attach_complete")) if stage1 else None
    lte_ok = [e for e in tcu.events("probe")
              if e.detail.get("interface") == "lte" and e.detail.get("result") == "Reachable"]
    stage3 = bool(lte_ok) if stage2 else None
    working = tcu.has_working_data_path()
    loop = tcu.failed_attempts >= tcu.policy.attach_retry_limit and not working
    row = FailureBehaviorRow(
        policy=cfg.policy.name,
        fault_class=fault_class,
        stage1_attach=stage1,
        stage2_pdn=stage2,
        stage3_data=stage3,
        fallback_triggered=bool(tcu.consulted_fallbacks),
        loop_trapped=loop,
        state_transition_failure=not working,
        causes=[fault.describe()],
    )
    if loop:
        row.add_evidence("loop", [world.trace.ref(e.seq) for e in tcu.events("attach_failed")])
    if not working:
        failures = [e for e in tcu.event_log if e.kind in ("attach_failed", "attach_stalled", "probe")
                    and (e.kind != "probe" or e.detail.get("result") != "Reachable")]
        surfaced = [e for e in tcu.event_log if e.surfaced]
        if not surfaced:
            row.add_evidence("silent_failure", [world.trace.ref(e.seq) for e in failures[:5]])
    return row


def run_fallback_suite(cfg: WorldConfig, seed: int = 0, *, trace: Optional[TraceSink] = None,
                       horizon_ms: int = 120_000, classes=None) -> list[FailureBehaviorRow]:
    """One row per fault class; every cause variant in a class must yield the same matrix."""
    if classes is not None:
        classes = {FaultClass(c) for c in classes}
    rows = []
    index = 0
    for fault_class, faults in FAULT_CLASSES.items():
        if classes is not None and fault_class not in classes:
            continue
        variants = []
        for fault in faults:
            variants.append(observe_fault(cfg, fault, fault_class, seed, trace=trace,
                                          horizon_ms=horizon_ms, index=index))
            index += 1
        row = variants[0]
        row.consistent = all(v.matrix() == row.matrix() for v in variants)
        row.causes = [c for v in variants for c in v.causes]
        for v in variants[1:]:
            for tag, refs in v.evidence.items():
                row.add_evidence(tag, refs)
        rows.append(row)
    return rows
