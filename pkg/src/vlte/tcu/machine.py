"""Vehicle-side connectivity state machine."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import aka
from ..codec import (
    AuthParams,
    CapabilitySet,
    EeaAlg,
    EiaAlg,
    GprsCipher,
    GsmCipher,
    IdentityType,
    NasKind,
    NasMessage,
    ProtocolMessage,
    RrcKind,
    RrcMessage,
    WARNING_KINDS,
)
from ..epc import BACKEND_SERVICES
from ..radio_env import CellMeasurement, RadioEnvironment
from .policy import (
    AlertSurface,
    Backoff,
    FallbackTarget,
    IdentityDisclosure,
    PlmnFilter,
    SmsInterface,
    TcuPolicy,
    TcuTiming,
)
from .sim import AdminState, SimProfile


class EmmState(enum.Enum):
    Deregistered = "Deregistered"
    Searching = "Searching"
    Attaching = "Attaching"
    PartialAttach = "PartialAttach"
    Attached = "Attached"
    Camped = "Camped"
    CooldownIdle = "CooldownIdle"


class PowerMode(enum.Enum):
    Hard = "Hard"
    Soft = "Soft"


class ProbeResult(enum.Enum):
    Reachable = "Reachable"
    SilentBlackhole = "SilentBlackhole"
    NoPdn = "NoPdn"


class TargetNotVisible(Exception):
    pass


@dataclass(frozen=True)
class ConnectionStages:
    valid_sim: bool = False
    valid_imei: bool = False
    network_registration: bool = False
    data_registration: bool = False
    cell_connection: bool = False
    roaming_approved: bool = False
    cell_link_state: str = "Offline"


@dataclass
class SecurityContext:
    kasme: bytes
    cipher: EeaAlg
    integrity: EiaAlg


@dataclass
class HandoverOutcome:
    source: int
    target: int
    context_preserved: bool
    reauth_performed: bool = False
    status: str = "pending"


@dataclass
class TcuEvent:
    t_ms: int
    state_before: str
    kind: str
    state_after: str
    surfaced: bool = False
    seq: int = -1
    detail: dict = field(default_factory=dict)


def capabilities_for(policy: TcuPolicy) -> CapabilitySet:
    eea = {EeaAlg.EEA1, EeaAlg.EEA2, EeaAlg.EEA3}
    if policy.accept_null_cipher:
        eea.add(EeaAlg.EEA0)
    if policy.advertise_legacy:
        return CapabilitySet(eea, {EiaAlg.EIA1, EiaAlg.EIA2, EiaAlg.EIA3}, {GsmCipher.A5_3},
                             {GprsCipher.GEA2, GprsCipher.GEA3}, True)
    return CapabilitySet(eea, {EiaAlg.EIA1, EiaAlg.EIA2, EiaAlg.EIA3})


class TcuMachine:
    def __init__(
        self,
        env: RadioEnvironment,
        sims: list[SimProfile],
        policy: TcuPolicy = TcuPolicy.observed(),
        timing: TcuTiming = TcuTiming(),
        *,
        imei: str = "356938035643809",
        ue_id: str = "tcu",
        seed: int = 0,
    ):
        self.env = env
        self.sims = list(sims)
        self.policy = policy
        self.timing = timing
        self.imei = imei
        self.ue_id = ue_id
        self.rng = np.random.default_rng(seed)
        self.trace = env.trace
        self.event_log: list[TcuEvent] = []
        self.powered = False
        self._tick_ev = None
        env.register(self)
        self._reset_all()

    # ------------------------------------------------------------------ state

    def _reset_all(self) -> None:
        self.emm_state = EmmState.Deregistered
        self.guti: Optional[str] = None
        self.tmsi: Optional[str] = None
        self.security_context: Optional[SecurityContext] = None
        self.retry_count = 0
        self.failed_attempts = 0
        self.consulted_fallbacks: list[FallbackTarget] = []
        self.wifi_active = False
        self._tried_sims: set[str] = set()
        self._reset_radio()

    def _reset_radio(self) -> None:
        self.serving_cell: Optional[int] = None
        self.rrc_connected = False
        self.c_rnti: Optional[int] = None
        self.network_registration = False
        self.data_registration = False
        self.roaming_approved = False
        self._pending_auth: Optional[bytes] = None
        self._security_established = False
        self._first_seen: dict[int, int] = {}
        self._last_scan: dict[int, CellMeasurement] = {}
        self._barred: set[int] = set()
        self._guard_ev = None
        self._retry_ev = None
        self._rlf_ev = None
        self._rrc_setup_ms: Optional[int] = None
        self._attach_started_ms: Optional[int] = None
        self._last_probe_ms: Optional[int] = None
        self._blackhole_streak = 0
        self._attached_at: Optional[int] = None
        self.handover_outcome: Optional[HandoverOutcome] = None
        self._handover_pending = False

    @property
    def active_sim(self) -> Optional[SimProfile]:
        for sim in self.sims:
            if sim.admin_state == AdminState.Enabled:
                return sim
        return None

    @property
    def imsi(self) -> Optional[str]:
        sim = self.active_sim
        return sim.imsi if sim else None

    @property
    def now(self) -> int:
        return self.env.now_ms

    def _valid_sim(self) -> bool:
        enabled = [s for s in self.sims if s.admin_state == AdminState.Enabled]
        return len(enabled) == 1 and enabled[0].is_valid()

    def stage_snapshot(self) -> ConnectionStages:
        valid_sim = self._valid_sim()
        if not valid_sim:
            return ConnectionStages(valid_imei=self._valid_imei())
        online = self.data_registration and self.rrc_connected and self.roaming_approved
        return ConnectionStages(
            valid_sim=True,
            valid_imei=self._valid_imei(),
            network_registration=self.network_registration,
            data_registration=self.data_registration,
            cell_connection=self.rrc_connected,
            roaming_approved=self.roaming_approved,
            cell_link_state="Online" if online else "Offline",
        )

    def _valid_imei(self) -> bool:
        return len(self.imei) == 15 and self.imei.isdigit()

    # ----------------------------------------------------------------- events

    def _log(self, kind: str, before: EmmState, surfaced: bool = False, **detail) -> TcuEvent:
        seq = self.trace.emit(self.now, "tcu", kind, before=before.value, after=self.emm_state.value,
                              surfaced=surfaced, **detail)
        ev = TcuEvent(self.now, before.value, kind, self.emm_state.value, surfaced, seq, detail)
        self.event_log.append(ev)
        return ev

    def _set_state(self, state: EmmState, reason: str, **detail) -> None:
        before = self.emm_state
        self.emm_state = state
        self._log(reason, before, **detail)

    def events(self, kind: str) -> list[TcuEvent]:
        return [e for e in self.event_log if e.kind == kind]

    # ------------------------------------------------------------------ power

    def power_cycle(self, mode: PowerMode = PowerMode.Hard) -> None:
        mode = PowerMode(mode)
        if mode == PowerMode.Soft:
            self._log("soft_reboot", self.emm_state)
            if not self.powered:
                self.powered = True
                self._schedule_tick()
            return
        self._drop_connection("power_off")
        for ev in (self._guard_ev, self._retry_ev, self._rlf_ev, self._tick_ev):
            self.env.clock.cancel(ev)
        before = self.emm_state
        self._reset_all()
        self.powered = True
        valid = self._valid_sim()
        if valid:
            self.emm_state = EmmState.Searching
        self._log("hard_power_cycle", before, valid_sim=valid,
                  sim=self.active_sim.sim_id if self.active_sim else None)
        if valid:
            self._schedule_tick()

    def power_off(self) -> None:
        self._drop_connection("power_off")
        for ev in (self._guard_ev, self._retry_ev, self._rlf_ev, self._tick_ev):
            self.env.clock.cancel(ev)
        self.powered = False
        before = self.emm_state
        self.emm_state = EmmState.Deregistered
        self._log("power_off", before)

    def _schedule_tick(self) -> None:
        self.env.clock.cancel(self._tick_ev)
        self._tick_ev = self.env.clock.schedule(self.timing.tick_ms, self._tick, "tcu:tick")

    # ------------------------------------------------------------ selection

    def _sib1_ok(self, cell_id: int) -> bool:
        sim = self.active_sim
        sib = self.env.read_sib1(cell_id)
        if sib is None or sim is None or sim.network_key is None:
            return False
        want = aka.sib_signature(sim.network_key, str(sib.plmn), sib.tac, sib.cell_identity)
        return sib.signature == want

    def _stage1_ok(self, cell_id: int) -> bool:
        sim = self.active_sim
        if sim is None:
            return False
        plmn = self.env.cell(cell_id).cfg.plmn
        if plmn not in sim.selection_set():
            return False
        if self.policy.stage1_plmn_filter == PlmnFilter.WhitelistStrict:
            if plmn not in self.policy.effective_whitelist():
                return False
        if self.policy.verify_sib1 and not self._sib1_ok(cell_id):
            return False
        return True

    def select_cell(self, measurements: list[CellMeasurement]) -> Optional[int]:
        """Strongest stage-1-eligible cell; ties go to the lower cell id."""
        best = None
        for m in measurements:
            if m.cell_id in self._barred or not self._stage1_ok(m.cell_id):
                continue
            if best is None or (m.rsrp_dbm, -m.cell_id) > (best.rsrp_dbm, -best.cell_id):
                best = m
        return best.cell_id if best else None

    def _acquired(self, m: CellMeasurement) -> bool:
        first = self._first_seen.get(m.cell_id)
        return first is not None and self.now - first >= self.timing.dwell_ms(m.rsrp_dbm)

    def _observe(self) -> list[CellMeasurement]:
        scan = self.env.scan()
        seen = {m.cell_id for m in scan}
        for cid in list(self._first_seen):
            if cid not in seen:
                del self._first_seen[cid]
        for m in scan:
            self._first_seen.setdefault(m.cell_id, self.now)
        self._last_scan = {m.cell_id: m for m in scan}
        return scan

    # ------------------------------------------------------------------- tick

    def _tick(self) -> None:
        if not self.powered:
            return
        self._tick_ev = self.env.clock.schedule(self.timing.tick_ms, self._tick, "tcu:tick")
        scan = self._observe()
        acquired = [m for m in scan if self._acquired(m)]
        state = self.emm_state

        if state == EmmState.Searching:
            target = self.select_cell(acquired)
            if target is not None:
                self._start_attach(target)
        elif state == EmmState.Attached and not self._handover_pending:
            self._maybe_move(acquired)
        elif state == EmmState.Camped and self.policy.reselect_after_stall:
            before = self.emm_state
            if self.serving_cell is not None:
                self._barred.add(self.serving_cell)
            self.serving_cell = None
            self.emm_state = EmmState.Searching
            self._log("reselect_after_stall", before, barred=sorted(self._barred))

        # applications only send traffic once the cell link is up, or while
        # the unit believes it is registered somewhere
        apps_active = (self.emm_state in (EmmState.PartialAttach, EmmState.Camped)
                       or (self.emm_state == EmmState.Attached and self.roaming_approved))
        if apps_active:
            due = self._last_probe_ms is None or self.now - self._last_probe_ms >= self.timing.probe_period_ms
            if due:
                self._last_probe_ms = self.now
                self.data_path_probe()
        if (self.emm_state == EmmState.Attached and self.policy.guti_refresh_ms
                and self._attached_at is not None and self.now - self._attached_at >= self.policy.guti_refresh_ms):
            self._attached_at = self.now
            self._log("guti_refresh", self.emm_state)
            self._send_attach_request()

    def _maybe_move(self, acquired: list[CellMeasurement]) -> None:
        serving = self._last_scan.get(self.serving_cell)
        serving_rsrp = serving.rsrp_dbm if serving else float("-inf")
        cfg = self.env.cell(self.serving_cell).cfg
        # connected-mode handover candidates are judged on measurements alone
        mimics = [m for m in acquired if m.cell_id != self.serving_cell
                  and self.env.cell(m.cell_id).cfg.plmn == cfg.plmn
                  and self.env.cell(m.cell_id).cfg.tac == cfg.tac]
        best_mimic = max(mimics, key=lambda m: (m.rsrp_dbm, -m.cell_id), default=None)
        if best_mimic and best_mimic.rsrp_dbm >= serving_rsrp + self.timing.hysteresis_db:
            self.handover(best_mimic.cell_id)
            return
        others = [m for m in acquired if m.cell_id != self.serving_cell]
        target = self.select_cell(others)
        if target is None:
            if serving is None:
                self._radio_link_failure()
            return
        if self._last_scan[target].rsrp_dbm >= serving_rsrp + self.timing.hysteresis_db:
            before = self.emm_state
            self._drop_connection("radio_lost")
            self._log("reselection", before, source=cfg.cell_id, target=target)
            self._start_attach(target)

    # ---------------------------------------------------------------- attach

    def _start_attach(self, cell_id: int) -> None:
        before = self.emm_state
        self._drop_connection("released")
        self.serving_cell = cell_id
        self.network_registration = False
        self.data_registration = False
        self.roaming_approved = False
        self._pending_auth = None
        self._security_established = False
        self._attach_started_ms = self.now
        self.emm_state = EmmState.Attaching
        self._log("attach_start", before, cell=cell_id, attempt=self.retry_count + 1)
        self.env.uplink(cell_id, self, RrcMessage(RrcKind.RrcConnectionRequest))

    def _attach_identity(self) -> tuple[IdentityType, str]:
        sim = self.active_sim
        if self.policy.conceal_identity:
            nonce = int(self.rng.integers(0, 1 << 32))
            return IdentityType.CONCEALED, aka.conceal(sim.ki, nonce)
        if self.guti is not None:
            return IdentityType.GUTI, self.guti
        return IdentityType.IMSI, sim.imsi

    def _send_attach_request(self) -> None:
        id_type, value = self._attach_identity()
        msg = NasMessage(NasKind.AttachRequest, identity_type=id_type, identity_value=value,
                         capabilities=capabilities_for(self.policy))
        self.env.clock.cancel(self._guard_ev)
        self._guard_ev = self.env.clock.schedule(self.timing.attach_guard_ms, self._guard_expired, "tcu:guard")
        self._send(msg)

    def _send(self, msg: ProtocolMessage) -> None:
        if self.serving_cell is not None:
            self.env.uplink(self.serving_cell, self, msg)

    def _guard_expired(self) -> None:
        self._guard_ev = None
        if self.emm_state not in (EmmState.Attaching, EmmState.Attached):
            return
        duration = self.now - self._rrc_setup_ms if self._rrc_setup_ms is not None else None
        cell = self.serving_cell
        before = self.emm_state
        self._drop_connection("released")
        self.serving_cell = cell
        self.emm_state = EmmState.Camped
        self._log("attach_stalled", before, cell=cell, conn_duration_ms=duration,
                  surfaced=self.policy.notify_failures)
        if self.policy.reselect_after_stall:
            self._attach_failed("stall", bar=cell)

    def _drop_connection(self, reason: str) -> None:
        for ev in (self._guard_ev, self._rlf_ev):
            self.env.clock.cancel(ev)
        self._guard_ev = self._rlf_ev = None
        if self.serving_cell is not None and (self.rrc_connected or self.emm_state == EmmState.Attaching):
            self.env.release(self.serving_cell, self, reason)
            if self.rrc_connected:
                self.trace.emit(self.now, "tcu", "rrc_released", cell=self.serving_cell, reason=reason,
                                duration_ms=self.now - (self._rrc_setup_ms or self.now))
        self.rrc_connected = False
        self.c_rnti = None
        self.data_registration = False
        self.roaming_approved = False
        self._handover_pending = False

    def _attach_failed(self, reason: str, bar: Optional[int] = None) -> None:
        self.env.clock.cancel(self._guard_ev)
        self._guard_ev = None
        self.failed_attempts += 1
        self.retry_count += 1
        cell = self.serving_cell
        if self.emm_state != EmmState.Camped:
            self._drop_connection("released")
        if bar is not None:
            self._barred.add(bar)
        before = self.emm_state
        if self.retry_count < self.policy.attach_retry_limit:
            delay = self._retry_delay()
            self.emm_state = EmmState.Attaching
            self._log("attach_failed", before, reason=reason, retry_count=self.retry_count,
                      next_attempt_in_ms=delay, surfaced=False)
            self._retry_ev = self.env.clock.schedule(delay, lambda: self._retry(cell), "tcu:retry")
            return
        self._log("attach_failed", before, reason=reason, retry_count=self.retry_count,
                  surfaced=self.policy.notify_failures)
        self._retry_limit_reached()

    def _retry_delay(self) -> int:
        if self.policy.backoff == Backoff.ExponentialRandomized:
            base = self.policy.backoff_base_ms * 2 ** (self.retry_count - 1)
            return int(base + self.rng.integers(0, self.policy.backoff_jitter_ms + 1))
        return self.policy.retry_gap_ms

    def _retry(self, cell: Optional[int]) -> None:
        self._retry_ev = None
        if self.emm_state != EmmState.Attaching:
            return
        if cell is not None and cell in self._last_scan and cell not in self._barred and self._stage1_ok(cell):
            self._start_attach(cell)
        else:
            before = self.emm_state
            self.serving_cell = None
            self.emm_state = EmmState.Searching
            self._log("search", before)

    def _retry_limit_reached(self) -> None:
        targets = [t for t in self.policy.fallback_targets if t != FallbackTarget.NONE]
        for target in targets:
            self.consulted_fallbacks.append(target)
            if target == FallbackTarget.AltSimProfile and self._switch_sim():
                return
            if target == FallbackTarget.WiFi:
                self.wifi_active = True
                self._log("fallback_wifi", self.emm_state, surfaced=self.policy.notify_failures)
                break
        self._enter_cooldown()

    def _switch_sim(self) -> bool:
        current = self.active_sim
        if current is not None:
            self._tried_sims.add(current.sim_id)
        for sim in self.sims:
            if sim.sim_id not in self._tried_sims and sim.is_valid():
                if current is not None:
                    current.admin_state = AdminState.Disabled
                sim.admin_state = AdminState.Enabled
                before = self.emm_state
                self.guti = None
                self.security_context = None
                self.retry_count = 0
                self.serving_cell = None
                self._barred.clear()
                self.emm_state = EmmState.Searching
                self._log("fallback_alt_sim", before, sim=sim.sim_id, surfaced=self.policy.notify_failures)
                return True
        self._log("fallback_alt_sim_unavailable", self.emm_state)
        return False

    def _enter_cooldown(self) -> None:
        before = self.emm_state
        self.emm_state = EmmState.CooldownIdle
        self._log("cooldown", before, duration_ms=self.policy.cooldown_ms)
        self._retry_ev = self.env.clock.schedule(self.policy.cooldown_ms, self._cooldown_over, "tcu:cooldown")

    def _cooldown_over(self) -> None:
        self._retry_ev = None
        if self.emm_state != EmmState.CooldownIdle:
            return
        self.retry_count = 0
        self.serving_cell = None
        self._barred.clear()
        self._set_state(EmmState.Searching, "search")

    # -------------------------------------------------------------- downlink

    def on_downlink(self, cell_id: int, msg: ProtocolMessage) -> None:
        if not self.powered or cell_id != self.serving_cell:
            return
        for reply in self.handle_downlink(msg):
            self._send(reply)

    def handle_downlink(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        if isinstance(msg, RrcMessage):
            if msg.kind in WARNING_KINDS or msg.kind == RrcKind.Paging:
                self.on_broadcast(self.serving_cell, msg)
                return []
            return self._rrc(msg)
        k = msg.kind
        if k == NasKind.IdentityRequest:
            return self._identity_request(msg)
        if k == NasKind.AuthenticationRequest:
            return self._authenticate(msg)
        if k == NasKind.SecurityModeCommand:
            return self._security_mode(msg)
        if k == NasKind.AttachAccept:
            before = self.emm_state
            self.guti = msg.identity_value
            self.network_registration = True
            self._log("attach_accept", before, cell=self.serving_cell, guti=self.guti)
            return []
        if k == NasKind.ActivateDefaultBearerRequest:
            return self._bearer_up()
        if k == NasKind.PdnConnectivityReject:
            self.env.clock.cancel(self._guard_ev)
            self._guard_ev = None
            self.data_registration = False
            before = self.emm_state
            self.emm_state = EmmState.PartialAttach
            self._log("pdn_rejected", before, cause=msg.esm_cause.name)
            self._attach_failed(f"pdn:{msg.esm_cause.name}")
            return []
        if k == NasKind.AttachReject:
            self.network_registration = False
            self.data_registration = False
            self._log("attach_reject", self.emm_state, cause=msg.emm_cause.name)
            self._attach_failed(f"reject:{msg.emm_cause.name}")
            return []
        if k == NasKind.SmsTransport:
            return self._sms(msg)
        if k == NasKind.DetachRequest:
            before = self.emm_state
            self._drop_connection("detach")
            self.network_registration = False
            self.emm_state = EmmState.Searching
            self._log("network_detach", before)
            return []
        self._log("unexpected_message", self.emm_state, kind=k.name)
        return []

    def _rrc(self, msg: RrcMessage) -> list[ProtocolMessage]:
        k = msg.kind
        if k == RrcKind.RrcConnectionSetup and self.emm_state == EmmState.Attaching and not self.rrc_connected:
            self.rrc_connected = True
            self.c_rnti = msg.c_rnti
            self._rrc_setup_ms = self.now
            self._log("rrc_established", self.emm_state, cell=self.serving_cell, c_rnti=msg.c_rnti,
                      since_attach_start_ms=self.now - self._attach_started_ms)
            self._send_attach_request()
            return []
        if k == RrcKind.RrcConnectionReconfiguration and self._handover_pending:
            self.env.clock.cancel(self._rlf_ev)
            self._rlf_ev = None
            self._handover_pending = False
            self.handover_outcome.status = "continued"
            self._log("handover_complete", self.emm_state, cell=self.serving_cell)
            return []
        if k == RrcKind.RrcReestablishmentReject:
            before = self.emm_state
            cell = self.serving_cell
            self._drop_connection("released")
            self.serving_cell = cell
            self.network_registration = False
            self.emm_state = EmmState.Camped
            if self.handover_outcome is not None and self.handover_outcome.status == "pending":
                self.handover_outcome.status = "terminated"
            self._log("reestablishment_rejected", before, cell=cell)
            return []
        if k == RrcKind.RrcConnectionRelease:
            before = self.emm_state
            self._drop_connection("released")
            self._log("rrc_release", before)
            return []
        return []

    def _identity_request(self, msg: NasMessage) -> list[ProtocolMessage]:
        wanted = msg.identity_type
        if wanted == IdentityType.IMSI:
            disclose = (self.policy.identity_response_pre_auth == IdentityDisclosure.Disclose
                        or self._security_established)
            self._log("identity_request", self.emm_state, requested="IMSI", disclosed=disclose)
            if disclose and self.imsi:
                return [NasMessage(NasKind.IdentityResponse, identity_type=IdentityType.IMSI,
                                   identity_value=self.imsi)]
            return []
        # IMEI and temporary identities are never returned in an IdentityResponse
        self._log("identity_request", self.emm_state, requested=wanted.name, disclosed=False)
        return []

    def _authenticate(self, msg: NasMessage) -> list[ProtocolMessage]:
        sim = self.active_sim
        rand, autn = msg.auth_params.rand, msg.auth_params.autn
        if sim is None or not aka.verify_autn(sim.ki, sim.opc, rand, autn):
            self._log("auth_failure", self.emm_state)
            return [NasMessage(NasKind.AuthenticationResponse, auth_params=AuthParams(res=b""))]
        self._pending_auth = aka.kasme(sim.ki, sim.opc, rand)
        self._log("auth_ok", self.emm_state)
        return [NasMessage(NasKind.AuthenticationResponse, auth_params=AuthParams(res=aka.res(sim.ki, sim.opc, rand)))]

    def _security_mode(self, msg: NasMessage) -> list[ProtocolMessage]:
        sel = msg.security_selection
        caps = capabilities_for(self.policy)
        reason = None
        if sel.integrity == EiaAlg.EIA0:
            reason = "null_integrity"
        elif sel.cipher == EeaAlg.EEA0 and not self.policy.accept_null_cipher:
            reason = "null_cipher"
        elif sel.cipher not in caps.eea or sel.integrity not in caps.eia:
            reason = "not_advertised"
        elif self._pending_auth is None:
            reason = "unauthenticated"
        if reason is not None:
            self._log("security_mode_reject", self.emm_state, cipher=sel.cipher.name,
                      integrity=sel.integrity.name, reason=reason)
            return [NasMessage(NasKind.SecurityModeReject)]
        self.security_context = SecurityContext(self._pending_auth, sel.cipher, sel.integrity)
        self._security_established = True
        self._log("security_mode_complete", self.emm_state, cipher=sel.cipher.name, integrity=sel.integrity.name)
        return [NasMessage(NasKind.SecurityModeComplete)]

    def _bearer_up(self) -> list[ProtocolMessage]:
        self.env.clock.cancel(self._guard_ev)
        self._guard_ev = None
        if not self.network_registration:
            return []
        self.data_registration = True
        plmn = self.env.cell(self.serving_cell).cfg.plmn
        self.roaming_approved = plmn in self.policy.roaming_markets
        self.retry_count = 0
        self._blackhole_streak = 0
        self._attached_at = self.now
        before = self.emm_state
        self.emm_state = EmmState.Attached
        self._log("attach_complete", before, cell=self.serving_cell, plmn=str(plmn),
                  roaming_approved=self.roaming_approved,
                  link=self.stage_snapshot().cell_link_state)
        return []

    def _sms(self, msg: NasMessage) -> list[ProtocolMessage]:
        pdu = msg.sms_payload
        if self.policy.sms_interface == SmsInterface.Disabled:
            self._log("sms_rejected", self.emm_state, sms_class=pdu.sms_class.name, origin=pdu.origin)
            return []
        self._log("sms_processed", self.emm_state, sms_class=pdu.sms_class.name, origin=pdu.origin,
                  delivery_ack=True, surfaced=False)
        return []

    # -------------------------------------------------------------- broadcast

    def acknowledges(self, msg: RrcMessage) -> bool:
        if msg.kind == RrcKind.Paging:
            return self.powered and self.guti is not None and msg.paged_identity == self.guti
        return self.powered

    def on_broadcast(self, cell_id: Optional[int], msg: RrcMessage) -> None:
        if not self.powered or cell_id != self.serving_cell:
            return
        if msg.kind in WARNING_KINDS:
            w = msg.warning_payload
            surfaced = self.policy.alert_surface == AlertSurface.Notify
            self._log("warning_processed", self.emm_state, surfaced=surfaced, channel=msg.kind.name,
                      system=w.system.name, message_id=w.message_id, serial=w.serial)
        elif msg.kind == RrcKind.Paging:
            self._log("paging", self.emm_state, answered=self.acknowledges(msg))

    def on_cell_lost(self, cell_id: int) -> None:
        self._first_seen.pop(cell_id, None)
        self._last_scan.pop(cell_id, None)
        if cell_id == self.serving_cell and self.powered:
            self._radio_link_failure()

    def _radio_link_failure(self) -> None:
        before = self.emm_state
        self._drop_connection("radio_lost")
        self.serving_cell = None
        self.network_registration = False
        if self.emm_state != EmmState.CooldownIdle:
            self.emm_state = EmmState.Searching
        self._log("radio_link_failure", before)

    # -------------------------------------------------------------- handover

    def handover(self, target_cell_id: int) -> HandoverOutcome:
        if target_cell_id not in self._last_scan:
            raise TargetNotVisible(f"cell {target_cell_id} not in the latest scan")
        source = self.serving_cell
        cell = self.env.cell(target_cell_id)
        node = cell.node
        prepared = node is not None and hasattr(node, "on_handover")
        # a network-prepared target keeps the session; otherwise the source only sees the UE vanish
        self.env.release(source, self, "handover" if prepared else "radio_lost")
        self.serving_cell = target_cell_id
        self._handover_pending = True
        self.handover_outcome = HandoverOutcome(source, target_cell_id,
                                                context_preserved=self.security_context is not None)
        self._log("handover", self.emm_state, source=source, target=target_cell_id,
                  context_preserved=self.handover_outcome.context_preserved, reauth=False)
        if prepared:
            for reply in node.on_handover(self.env, cell, self) or ():
                self.env.downlink(target_cell_id, self, reply)
        self._rlf_ev = self.env.clock.schedule(self.timing.rlf_ms, self._handover_rlf, "tcu:rlf")
        return self.handover_outcome

    def _handover_rlf(self) -> None:
        self._rlf_ev = None
        if not self._handover_pending:
            return
        self._log("rlf_after_handover", self.emm_state, cell=self.serving_cell)
        self._send(RrcMessage(RrcKind.RrcReestablishmentRequest, c_rnti=self.c_rnti or 1))

    # ---------------------------------------------------------------- probes

    def data_path_probe(self) -> ProbeResult:
        """One application-layer request to a backend service over the current path."""
        n = len(self.events("probe"))
        service = BACKEND_SERVICES[n % len(BACKEND_SERVICES)]
        cell = self.serving_cell
        lte_up = self.data_registration and self.rrc_connected
        if self.wifi_active:
            # traffic stays on WiFi until LTE has proven it can carry it again
            if lte_up and self.env.userplane(cell, self, service) is not None:
                self.wifi_active = False
                self._log("wifi_released", self.emm_state, cell=cell)
            else:
                self._log("probe", self.emm_state, service=service, result=ProbeResult.Reachable.value,
                          interface="wifi", cell=cell)
                return ProbeResult.Reachable
        if not lte_up:
            result = ProbeResult.NoPdn
        else:
            reply = self.env.userplane(cell, self, service)
            result = ProbeResult.Reachable if reply is not None else ProbeResult.SilentBlackhole
        self._log("probe", self.emm_state, service=service, result=result.value, interface="lte", cell=cell)
        if result == ProbeResult.SilentBlackhole:
            self._blackhole_streak += 1
            limit = self.policy.health_probe_failures
            if limit and self._blackhole_streak >= limit:
                self._blackhole_streak = 0
                self._log("health_check_failed", self.emm_state, surfaced=self.policy.notify_failures)
                self._drop_connection("released")
                self._retry_limit_reached()
        else:
            self._blackhole_streak = 0
        return result

    def has_working_data_path(self) -> bool:
        if self.wifi_active:
            return True
        probes = self.events("probe")
        return bool(probes) and probes[-1].detail.get("result") == ProbeResult.Reachable.value
