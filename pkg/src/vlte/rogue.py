"""Attacker-operated eNodeB without core credentials."""

from __future__ import annotations

import numpy as np

from .codec import IdentityType, NasKind, NasMessage, RrcKind, RrcMessage


class RogueNode:
    """Accepts RRC connections, harvests identities, never completes attach.

    On an AttachRequest it records the presented identity and asks for the
    IMSI; on an IMSI response it asks for the IMEI.  It cannot authenticate,
    so the procedure stalls until the UE gives up.
    """

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)
        self.captured: list[dict] = []
        self.rrc_connections: list[dict] = []
        self._next_rnti = 200

    def sib1(self, cell) -> RrcMessage:
        cfg = cell.cfg
        forged = self.rng.bytes(16)
        return RrcMessage(RrcKind.Sib1, plmn=cfg.plmn, tac=cfg.tac, cell_identity=cfg.cell_id, signature=forged)

    def _capture(self, env, ue, id_type: IdentityType, value: str, via: str) -> None:
        seq = env.trace.emit(env.now_ms, "rogue", "identity_captured", ue=ue.ue_id,
                             identity_type=id_type.name, value=value, via=via)
        self.captured.append({"t": env.now_ms, "type": id_type.name, "value": value, "seq": seq})

    def on_uplink(self, env, cell, ue, msg):
        if isinstance(msg, RrcMessage):
            if msg.kind == RrcKind.RrcConnectionRequest:
                rnti = self._next_rnti
                self._next_rnti += 1
                seq = env.trace.emit(env.now_ms, "rogue", "rrc_connection", ue=ue.ue_id, cell=cell.cell_id)
                self.rrc_connections.append({"t": env.now_ms, "seq": seq})
                return [RrcMessage(RrcKind.RrcConnectionSetup, c_rnti=rnti)]
            if msg.kind == RrcKind.RrcReestablishmentRequest:
                return [RrcMessage(RrcKind.RrcReestablishmentReject)]
            return []
        if msg.kind == NasKind.AttachRequest:
            if msg.identity_type in (IdentityType.IMSI, IdentityType.GUTI):
                self._capture(env, ue, msg.identity_type, msg.identity_value, "AttachRequest")
            return [NasMessage(NasKind.IdentityRequest, identity_type=IdentityType.IMSI)]
        if msg.kind == NasKind.IdentityResponse:
            self._capture(env, ue, msg.identity_type, msg.identity_value, "IdentityResponse")
            if msg.identity_type == IdentityType.IMSI:
                return [NasMessage(NasKind.IdentityRequest, identity_type=IdentityType.IMEI)]
        return []

    def leaked_types(self) -> set[str]:
        return {c["type"] for c in self.captured}

    def send_nas(self, env, cell, ue, msg) -> int:
        return env.downlink(cell.cell_id, ue, msg)
