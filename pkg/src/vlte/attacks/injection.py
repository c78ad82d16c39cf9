"""Unsolicited SMS and warning broadcasts delivered to an attached TCU."""

from __future__ import annotations

from typing import Optional, Union

from ..codec import (
    NasKind,
    NasMessage,
    RrcKind,
    RrcMessage,
    SmsClass,
    SmsPdu,
    WarningMessage,
    WarningSystem,
)
from ..tcu import EmmState
from ..trace import TraceSink
from ..world import WorldConfig
from .common import SETTLE_MS, ChannelUnavailable, trial_world
from .reports import Channel, MessageInjectionReport

_BROADCAST = {
    Channel.EtwsSib10: (RrcKind.Sib10, WarningSystem.ETWS),
    Channel.EtwsSib11: (RrcKind.Sib11, WarningSystem.ETWS),
    Channel.CmasSib12: (RrcKind.Sib12, WarningSystem.CMAS),
}


def default_payload(channel: Channel) -> Union[SmsPdu, WarningMessage]:
    if channel == Channel.SmsIms:
        return SmsPdu(SmsClass.Normal, "15550001111", b"Test message: vehicle service notice")
    _, system = _BROADCAST[channel]
    return WarningMessage(system, 4352 if system == WarningSystem.ETWS else 4370, 1, b"Test alert: exercise only")


def run_message_injection(cfg: WorldConfig, channel, payload=None, seed: int = 0, *,
                          trace: Optional[TraceSink] = None, deliver_at_ms: int = SETTLE_MS,
                          observe_ms: int = 2000, attach: bool = True) -> MessageInjectionReport:
    channel = Channel(channel)
    payload = payload if payload is not None else default_payload(channel)
    world = trial_world(cfg, seed, f"inject:{channel.value}", 0, trace)
    if not attach:
        world.tcu.power_off()
    env, tcu = world.env, world.tcu
    env.run_until(deliver_at_ms)
    cell_id = tcu.serving_cell
    if tcu.emm_state != EmmState.Attached or not tcu.rrc_connected or cell_id is None:
        raise ChannelUnavailable(f"TCU is {tcu.emm_state.value}, not attached")

    before = len(tcu.event_log)
    record = None
    if channel == Channel.SmsIms:
        cell = env.cell(cell_id)
        cell.node.send_nas(env, cell, tcu, NasMessage(NasKind.SmsTransport, sms_payload=payload))
    else:
        kind, _ = _BROADCAST[channel]
        record = env.broadcast(cell_id, RrcMessage(kind, warning_payload=payload))
    env.run_until(env.now_ms + observe_ms)

    new = tcu.event_log[before:]
    processed = [e for e in new if e.kind in ("sms_processed", "warning_processed")]
    if channel == Channel.SmsIms:
        ack = any(e.detail.get("delivery_ack") for e in processed)
    else:
        ack = tcu.ue_id in record.acknowledged
    report = MessageInjectionReport(
        policy=cfg.policy.name,
        channel=channel,
        protocol_ack=ack,
        user_surface_event=any(e.surfaced for e in processed),
        internal_processing_event=bool(processed),
    )
    if ack and processed and not report.user_surface_event:
        tag = "silent_sms" if channel == Channel.SmsIms else "silent_alert"
        seqs = [e.seq for e in processed]
        if record is not None:
            seqs.insert(0, record.trace_seq)
        report.add_evidence(tag, [world.trace.ref(s) for s in seqs if s >= 0])
    return report
