"""Legitimate core network (MME/HSS/gateways) and its eNodeB front end."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import aka
from .codec import (
    AuthParams,
    EeaAlg,
    EiaAlg,
    EmmCause,
    EsmCause,
    IdentityType,
    NasKind,
    NasMessage,
    PlmnId,
    RrcKind,
    RrcMessage,
    SecuritySelection,
)
from .trace import NullSink, TraceSink

BACKEND_SERVICES = (
    "maps-prd.go.tesla.services",
    "signaling-prd.vn.tesla.services",
    "npuv-prd.usw2.vn.cloud.tesla.com",
)


class EpcError(Exception):
    pass


class UnknownSubscriber(EpcError):
    pass


class NoSession(EpcError):
    pass


class UnknownGuti(EpcError):
    pass


class FaultKind(enum.Enum):
    NasReject = "NasReject"
    PdnReject = "PdnReject"
    RoutingBlackhole = "RoutingBlackhole"


@dataclass(frozen=True)
class CoreFault:
    kind: FaultKind
    cause: Optional[enum.IntEnum] = None
    active: bool = True

    def __post_init__(self):
        kind = FaultKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind == FaultKind.NasReject:
            object.__setattr__(self, "cause", EmmCause(self.cause) if not isinstance(self.cause, str)
                               else EmmCause[self.cause])
        elif kind == FaultKind.PdnReject:
            object.__setattr__(self, "cause", EsmCause(self.cause) if not isinstance(self.cause, str)
                               else EsmCause[self.cause])
        elif self.cause is not None:
            raise ValueError("RoutingBlackhole takes no cause")

    def describe(self) -> str:
        return self.kind.value if self.cause is None else f"{self.kind.value}({self.cause.name})"


@dataclass(frozen=True)
class SubscriberRecord:
    imsi: str
    ki: bytes
    opc: bytes
    home_plmn: PlmnId
    allowed_apns: tuple = ("internet",)

    def __post_init__(self):
        if len(self.ki) != 16 or len(self.opc) != 16:
            raise ValueError("ki and opc must be 16 octets")


class SessionState(enum.Enum):
    Registered = "Registered"
    PdnActive = "PdnActive"
    RadioLost = "RadioLost"


@dataclass
class SessionRecord:
    imsi: str
    guti: str
    bearer_id: Optional[int] = None
    ip_assigned: Optional[str] = None
    state: SessionState = SessionState.Registered


class PagingOutcome(enum.Enum):
    Answered = "Answered"
    Unreachable = "Unreachable"


_EEA_ORDER = (EeaAlg.EEA3, EeaAlg.EEA2, EeaAlg.EEA1, EeaAlg.EEA0)
_EIA_ORDER = (EiaAlg.EIA3, EiaAlg.EIA2, EiaAlg.EIA1)


@dataclass
class _Procedure:
    imsi: Optional[str] = None
    capabilities: object = None
    vector: Optional[aka.AuthVector] = None
    stage: str = "identity"


class Core:
    def __init__(
        self,
        name: str,
        plmn: PlmnId,
        subscribers=(),
        *,
        signing_key: Optional[bytes] = None,
        seed: int = 0,
        trace: Optional[TraceSink] = None,
        allowed_ciphers=tuple(EeaAlg),
    ):
        self.name = name
        self.plmn = plmn
        self.subscribers: dict[str, SubscriberRecord] = {}
        for sub in subscribers:
            self.add_subscriber(sub)
        self.signing_key = signing_key
        self.allowed_ciphers = frozenset(EeaAlg(a) for a in allowed_ciphers)
        self.faults: dict[FaultKind, CoreFault] = {}
        self.sessions: dict[str, SessionRecord] = {}
        self._procs: dict[str, _Procedure] = {}
        self._conn_imsi: dict[str, str] = {}
        self._next_bearer = 5
        self._next_ip = 1
        self.rng = np.random.default_rng(seed)
        self.trace = trace if trace is not None else NullSink()
        self.now = lambda: 0

    # --- HSS -----------------------------------------------------------------

    def add_subscriber(self, sub: SubscriberRecord) -> None:
        if sub.imsi in self.subscribers:
            raise ValueError(f"duplicate IMSI {sub.imsi}")
        self.subscribers[sub.imsi] = sub

    def run_aka(self, imsi: str, rand: bytes) -> aka.AuthVector:
        sub = self.subscribers.get(imsi)
        if sub is None:
            raise UnknownSubscriber(imsi)
        return aka.vector(sub.ki, sub.opc, rand)

    def _resolve_concealed(self, value: str) -> Optional[str]:
        for imsi in sorted(self.subscribers):
            if aka.concealed_matches(self.subscribers[imsi].ki, value):
                return imsi
        return None

    # --- faults --------------------------------------------------------------

    def inject_fault(self, fault: CoreFault) -> None:
        self.faults[fault.kind] = fault
        self.trace.emit(self.now(), f"core:{self.name}", "fault_injected", fault=fault.describe())

    def clear_fault(self, kind: FaultKind) -> None:
        self.faults.pop(FaultKind(kind), None)
        self.trace.emit(self.now(), f"core:{self.name}", "fault_cleared", fault=FaultKind(kind).value)

    def _fault(self, kind: FaultKind) -> Optional[CoreFault]:
        f = self.faults.get(kind)
        return f if f is not None and f.active else None

    # --- MME -----------------------------------------------------------------

    def handle_uplink(self, msg: NasMessage, conn: str = "ue") -> list[NasMessage]:
        """Network side of attach for one connection; returns downlink messages."""
        proc = self._procs.get(conn)
        k = msg.kind
        if k == NasKind.AttachRequest:
            proc = self._procs[conn] = _Procedure(capabilities=msg.capabilities)
            nas_fault = self._fault(FaultKind.NasReject)
            if nas_fault is not None:
                return self._reject(conn, nas_fault.cause)
            if msg.identity_type == IdentityType.IMSI:
                return self._identified(conn, msg.identity_value)
            if msg.identity_type == IdentityType.CONCEALED:
                imsi = self._resolve_concealed(msg.identity_value)
                return self._identified(conn, imsi) if imsi else self._reject(conn, EmmCause.UnknownUe)
            for imsi, sess in self.sessions.items():
                if sess.guti == msg.identity_value:
                    return self._identified(conn, imsi)
            proc.stage = "identity"
            return [NasMessage(NasKind.IdentityRequest, identity_type=IdentityType.IMSI)]
        if proc is None:
            return []
        if k == NasKind.IdentityResponse and proc.stage == "identity" and msg.identity_type == IdentityType.IMSI:
            return self._identified(conn, msg.identity_value)
        if k == NasKind.AuthenticationResponse and proc.stage == "auth":
            if msg.auth_params.res != proc.vector.expected_res:
                return self._reject(conn, EmmCause.MacFailure)
            sel = self._select(proc.capabilities)
            if sel is None:
                return self._reject(conn, EmmCause.EpsServicesNotAllowed)
            proc.stage = "smc"
            return [NasMessage(NasKind.SecurityModeCommand, security_selection=sel)]
        if k == NasKind.SecurityModeReject and proc.stage == "smc":
            return self._reject(conn, EmmCause.EpsServicesNotAllowed)
        if k == NasKind.SecurityModeComplete and proc.stage == "smc":
            proc.stage = "done"
            return self._accept(conn, proc.imsi)
        if k == NasKind.PdnConnectivityRequest and proc.stage == "done":
            return self._pdn(proc.imsi)
        if k == NasKind.DetachRequest:
            self.detach(proc.imsi)
            self._procs.pop(conn, None)
            return []
        return []

    def _identified(self, conn: str, imsi: Optional[str]) -> list[NasMessage]:
        proc = self._procs[conn]
        if imsi is None or imsi not in self.subscribers:
            return self._reject(conn, EmmCause.UnknownUe)
        proc.imsi = imsi
        rand = self.rng.bytes(16)
        proc.vector = self.run_aka(imsi, rand)
        proc.stage = "auth"
        return [NasMessage(NasKind.AuthenticationRequest, auth_params=AuthParams(rand=rand, autn=proc.vector.autn))]

    def _reject(self, conn: str, cause: EmmCause) -> list[NasMessage]:
        self._procs.pop(conn, None)
        return [NasMessage(NasKind.AttachReject, emm_cause=cause)]

    def _select(self, caps) -> Optional[SecuritySelection]:
        if caps is None:
            return None
        cipher = next((a for a in _EEA_ORDER if a in caps.eea and a in self.allowed_ciphers), None)
        integrity = next((a for a in _EIA_ORDER if a in caps.eia), None)
        if cipher is None or integrity is None:
            return None
        return SecuritySelection(cipher, integrity)

    def _accept(self, conn: str, imsi: str) -> list[NasMessage]:
        old = self.sessions.pop(imsi, None)
        if old is not None:
            self.trace.emit(self.now(), f"core:{self.name}", "session_replaced", imsi=imsi, guti=old.guti)
        tail = int(self.rng.integers(0, 1 << 56, dtype=np.uint64))
        guti = f"{self.plmn}{tail:017d}"
        self.sessions[imsi] = SessionRecord(imsi, guti)
        self._conn_imsi[conn] = imsi
        out = [NasMessage(NasKind.AttachAccept, identity_type=IdentityType.GUTI, identity_value=guti)]
        return out + self._pdn(imsi)

    def _pdn(self, imsi: str) -> list[NasMessage]:
        pdn_fault = self._fault(FaultKind.PdnReject)
        if pdn_fault is not None:
            return [NasMessage(NasKind.PdnConnectivityReject, esm_cause=pdn_fault.cause)]
        sess = self.sessions[imsi]
        sess.bearer_id = self._next_bearer
        sess.ip_assigned = f"ip-{self._next_ip:06d}"
        self._next_bearer += 1
        self._next_ip += 1
        sess.state = SessionState.PdnActive
        return [NasMessage(NasKind.ActivateDefaultBearerRequest)]

    def detach(self, imsi: Optional[str]) -> None:
        if imsi is not None:
            self.sessions.pop(imsi, None)

    def on_radio_lost(self, conn: str) -> None:
        imsi = self._conn_imsi.pop(conn, None)
        self._procs.pop(conn, None)
        sess = self.sessions.get(imsi) if imsi else None
        if sess is not None:
            sess.state = SessionState.RadioLost
            self.trace.emit(self.now(), f"core:{self.name}", "radio_lost", imsi=imsi, guti=sess.guti)

    def session_for(self, conn: str) -> Optional[SessionRecord]:
        imsi = self._conn_imsi.get(conn)
        return self.sessions.get(imsi) if imsi else None

    # --- gateways ------------------------------------------------------------

    def route_userplane(self, session: Optional[SessionRecord], app_request: str) -> Optional[str]:
        if session is None or session.state != SessionState.PdnActive:
            raise NoSession("no active PDN session")
        if self._fault(FaultKind.RoutingBlackhole) is not None:
            return None
        return f"echo:{app_request}"

    def page(self, env, guti: str) -> PagingOutcome:
        if not any(s.guti == guti for s in self.sessions.values()):
            raise UnknownGuti(guti)
        answered = False
        for cid in sorted(env.cells):
            cell = env.cells[cid]
            if cell.cfg.core_link != self.name:
                continue
            record = env.broadcast(cid, RrcMessage(RrcKind.Paging, paged_identity=guti))
            answered = answered or bool(record.acknowledged)
        outcome = PagingOutcome.Answered if answered else PagingOutcome.Unreachable
        self.trace.emit(env.now_ms, f"core:{self.name}", "paging", guti=guti, outcome=outcome.value)
        return outcome


class EnodeB:
    """Front end of a legitimate cell: RRC handling, NAS relay, signed SIB1."""

    def __init__(self, core: Core):
        self.core = core
        self.connected: dict[str, object] = {}
        self._next_rnti = 100

    def sib1(self, cell) -> RrcMessage:
        cfg = cell.cfg
        sig = b""
        if self.core.signing_key is not None:
            sig = aka.sib_signature(self.core.signing_key, str(cfg.plmn), cfg.tac, cfg.cell_id)
        return RrcMessage(RrcKind.Sib1, plmn=cfg.plmn, tac=cfg.tac, cell_identity=cfg.cell_id, signature=sig)

    def on_uplink(self, env, cell, ue, msg):
        if isinstance(msg, RrcMessage):
            if msg.kind == RrcKind.RrcConnectionRequest:
                self.connected[ue.ue_id] = ue
                rnti = self._next_rnti
                self._next_rnti = self._next_rnti % 65000 + 1
                return [RrcMessage(RrcKind.RrcConnectionSetup, c_rnti=rnti)]
            if msg.kind == RrcKind.RrcReestablishmentRequest:
                return [RrcMessage(RrcKind.RrcReestablishmentReject)]
            return []
        return self.core.handle_uplink(msg, conn=ue.ue_id)

    def on_release(self, env, cell, ue, reason):
        if self.connected.pop(ue.ue_id, None) is not None and reason not in ("detach", "handover"):
            self.core.on_radio_lost(ue.ue_id)

    def on_handover(self, env, cell, ue):
        self.connected[ue.ue_id] = ue
        return [RrcMessage(RrcKind.RrcConnectionReconfiguration, cell_identity=cell.cell_id)]

    def userplane(self, ue, request):
        try:
            return self.core.route_userplane(self.core.session_for(ue.ue_id), request)
        except NoSession:
            return None

    def send_nas(self, env, cell, ue, msg) -> int:
        return env.downlink(cell.cell_id, ue, msg)
