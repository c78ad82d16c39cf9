"""What the TCU advertises in its AttachRequest and which algorithm choices it accepts."""

from __future__ import annotations

from typing import Optional

from ..codec import (
    AuthParams,
    EeaAlg,
    EiaAlg,
    NasKind,
    NasMessage,
    SecuritySelection,
    decode,
    encode,
    interpret_capabilities,
    message_from_dict,
)
from ..codec.textfmt import capabilities_to_dict
from ..seeding import rng_for
from ..trace import TraceSink
from ..world import WorldConfig
from .common import SETTLE_MS, trial_world
from .reports import CapabilityReport


def run_capability_probe(cfg: WorldConfig, seed: int = 0, *, trace: Optional[TraceSink] = None,
                         eia0_trials: int = 100, max_state_ms: int = 20_000) -> CapabilityReport:
    trace = trace if trace is not None else TraceSink("capability")
    world = trial_world(cfg, seed, "capability", 0, trace)
    world.run_for(SETTLE_MS)
    report = CapabilityReport(policy=cfg.policy.name)

    # read the capability IE back off the air: trace record -> wire octets -> decoded message
    sent = [r for r in trace.records if r.get("src") == "ul" and r.get("ev") == "AttachRequest"
            and r.get("ctx") == trace.context]
    if sent:
        msg = decode(encode(message_from_dict(sent[0]["msg"])))
        caps = msg.capabilities
        findings = interpret_capabilities(caps)
        report.capabilities = capabilities_to_dict(caps)
        report.capability_bits = caps.ms_network_capability_raw
        report.findings = findings.as_dict()
        if findings.advertises_null_cipher:
            report.add_evidence("null_cipher", [trace.ref(sent[0]["seq"])])

    report.eea0_accepted = _eea0_accepted(world)

    times = rng_for(seed, "eia0-states")
    rejects = 0
    for i in range(eia0_trials):
        w = trial_world(cfg, seed, "eia0", i, trace)
        w.run_for(int(times.integers(0, max_state_ms + 1)))
        cipher = EeaAlg(int(times.integers(0, 4)))
        replies = w.tcu.handle_downlink(NasMessage(NasKind.SecurityModeCommand,
                                                   security_selection=SecuritySelection(cipher, EiaAlg.EIA0)))
        if [m.kind for m in replies] == [NasKind.SecurityModeReject]:
            rejects += 1
    report.eia0_trials = eia0_trials
    report.eia0_rejects = rejects
    return report


def _eea0_accepted(world) -> bool:
    """Authenticate afresh against the home core, then offer the null cipher with real integrity."""
    tcu = world.tcu
    core = next(iter(world.cores.values()))
    sim = tcu.active_sim
    if sim is None or sim.imsi not in core.subscribers:
        return False
    rand = core.rng.bytes(16)
    vec = core.run_aka(sim.imsi, rand)
    replies = tcu.handle_downlink(NasMessage(NasKind.AuthenticationRequest,
                                             auth_params=AuthParams(rand=rand, autn=vec.autn)))
    if not replies or replies[0].auth_params.res != vec.expected_res:
        return False
    replies = tcu.handle_downlink(NasMessage(NasKind.SecurityModeCommand,
                                             security_selection=SecuritySelection(EeaAlg.EEA0, EiaAlg.EIA2)))
    return [m.kind for m in replies] == [NasKind.SecurityModeComplete]
