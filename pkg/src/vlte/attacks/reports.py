"""Report records produced by the attack scenarios.

Every report carries the policy name it was produced under and an
``evidence`` map from a finding tag to trace references (``trace#seq``).
``to_dict``/``report_from_dict`` give the stable serialized form read by the
harness renderer and the compliance mapper.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Optional


class SimType(enum.Enum):
    eSIM = "eSIM"
    pSIM = "pSIM"


class AttachType(enum.Enum):
    Partial = "Partial"
    Full = "Full"
    NONE = "None"


class PostState(enum.Enum):
    Reattach = "Reattach"
    Camps = "Camps"


class FaultClass(enum.Enum):
    Control = "Control"
    PDN = "PDN"
    Routing = "Routing"


class Outcome(enum.Enum):
    FullConnectivity = "FullConnectivity"
    PdnNoRoaming = "PdnNoRoaming"
    AttachWithoutPdn = "AttachWithoutPdn"
    RejectedAtAttach = "RejectedAtAttach"
    SimInvalid = "SimInvalid"


OUTCOME_LABELS = {
    Outcome.FullConnectivity: "Full Connectivity",
    Outcome.PdnNoRoaming: "PDN, No Roaming",
    Outcome.AttachWithoutPdn: "Attach Without PDN",
    Outcome.RejectedAtAttach: "Rejected at Attach",
    Outcome.SimInvalid: "SIM Invalid",
}


class Channel(enum.Enum):
    SmsIms = "SmsIms"
    EtwsSib10 = "EtwsSib10"
    EtwsSib11 = "EtwsSib11"
    CmasSib12 = "CmasSib12"


def _plain(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (set, frozenset)):
        return sorted(_plain(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in sorted(value.items())}
    return value


@dataclass
class _Report:
    policy: str = "observed"
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"type": type(self).__name__}
        for f in dataclasses.fields(self):
            d[f.name] = _plain(getattr(self, f.name))
        return d

    def add_evidence(self, tag: str, refs) -> None:
        refs = [r for r in refs if r and not r.endswith("#-1")]
        if refs:
            self.evidence.setdefault(tag, []).extend(refs)


@dataclass
class ImsiCatchReport(_Report):
    attacker_plmn: str = ""
    sim_plmn: str = ""
    sim_type: SimType = SimType.pSIM
    leaked: frozenset = frozenset()
    attack_success: bool = False
    trials: int = 0
    successes: int = 0

    def __post_init__(self):
        self.sim_type = SimType(self.sim_type)
        self.leaked = frozenset(self.leaked)
        if "IMEI" in self.leaked:
            raise ValueError("IMEI must never be leaked")
        if self.attack_success != bool(self.leaked & {"IMSI", "GUTI"}):
            raise ValueError("attack_success must equal leaked ∩ {IMSI, GUTI} ≠ ∅")


@dataclass
class FbsMetrics(_Report):
    dl_gain_db: float = 0.0
    attach_type: AttachType = AttachType.NONE
    time_to_attach_s: Optional[float] = None
    conn_duration_s: Optional[float] = None
    post_state: Optional[PostState] = None
    success_rate_pct: float = 0.0
    trials: int = 0
    successes: int = 0
    backend_blocked: bool = False

    def __post_init__(self):
        self.attach_type = AttachType(self.attach_type)
        if self.post_state is not None:
            self.post_state = PostState(self.post_state)
        if self.trials and abs(self.success_rate_pct - 100.0 * self.successes / self.trials) > 1e-9:
            raise ValueError("success_rate_pct must equal 100*successes/trials")


@dataclass
class FailureBehaviorRow(_Report):
    fault_class: FaultClass = FaultClass.Control
    stage1_attach: bool = False
    stage2_pdn: Optional[bool] = None
    stage3_data: Optional[bool] = None
    fallback_triggered: bool = False
    loop_trapped: bool = False
    state_transition_failure: bool = False
    causes: list = field(default_factory=list)
    consistent: bool = True

    def __post_init__(self):
        self.fault_class = FaultClass(self.fault_class)
        if (self.stage2_pdn is None) == self.stage1_attach:
            raise ValueError("stage2_pdn is absent exactly when stage 1 failed")
        if (self.stage3_data is None) == bool(self.stage2_pdn):
            raise ValueError("stage3_data is absent exactly when stage 2 failed or is absent")

    def matrix(self) -> tuple:
        return (self.stage1_attach, self.stage2_pdn, self.stage3_data,
                self.fallback_triggered, self.loop_trapped, self.state_transition_failure)


@dataclass
class PlmnClassification(_Report):
    plmn: str = ""
    outcome: Outcome = Outcome.SimInvalid
    case: str = ""

    def __post_init__(self):
        self.outcome = Outcome(self.outcome)

    @property
    def log_line(self) -> str:
        return f"{self.plmn} -> {OUTCOME_LABELS[self.outcome]}"


@dataclass
class MessageInjectionReport(_Report):
    channel: Channel = Channel.SmsIms
    protocol_ack: bool = False
    user_surface_event: bool = False
    internal_processing_event: bool = False

    def __post_init__(self):
        self.channel = Channel(self.channel)


@dataclass
class HandoverReport(_Report):
    handover_triggered: bool = False
    context_preserved: bool = False
    reauth_performed: bool = False
    final_state: str = ""
    rogue_attach: bool = False
    rogue_tac_matches: bool = True


@dataclass
class CapabilityReport(_Report):
    capabilities: dict = field(default_factory=dict)
    capability_bits: int = 0
    findings: dict = field(default_factory=dict)
    eia0_trials: int = 0
    eia0_rejects: int = 0
    eea0_accepted: bool = False


REPORT_TYPES = {
    cls.__name__: cls
    for cls in (ImsiCatchReport, FbsMetrics, FailureBehaviorRow, PlmnClassification,
                MessageInjectionReport, HandoverReport, CapabilityReport)
}


def report_from_dict(d: dict) -> _Report:
    d = dict(d)
    cls = REPORT_TYPES[d.pop("type")]
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {k: v for k, v in d.items() if k in names}
    if cls is ImsiCatchReport:
        kwargs["leaked"] = frozenset(kwargs.get("leaked", ()))
    return cls(**kwargs)
